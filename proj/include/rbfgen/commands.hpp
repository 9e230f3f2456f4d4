#pragma once

#include <string>

#include "rbfgen/config.hpp"
#include "rbfgen/training.hpp"

namespace rbfgen {

// Trained-model bundle as a single JSON document: kernel, domain, centers,
// particular solution, null-space basis, response map, generator
// parameters, and the cached ensemble members. Deserialization restores
// predictions bit-for-bit; structurally broken files throw IoError.
std::string serialize_model(const SurrogateEnsemble& ensemble);
SurrogateEnsemble deserialize_model(const std::string& json_text);

// Command implementations. Each writes its outputs (CSV/SVG plus
// manifest.json) under cfg.out_dir and returns 0; failures are reported by
// exception and mapped to the process exit code by run_command.
int cmd_demo1d(const RunConfig& cfg);
int cmd_beam(const RunConfig& cfg);
int cmd_crossval(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);

// Dispatch plus error-to-exit-code mapping: 2 for configuration and input
// mismatches, 3 for I/O and other runtime failures, 4 for numerical
// breakdowns. Messages go to stderr.
int run_command(const RunConfig& cfg);

}  // namespace rbfgen
