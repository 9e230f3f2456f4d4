#pragma once

#include <cstdio>
#include <string>

namespace rbfgen::log {

// Lightweight stderr logging. Kept free of iostreams so output interleaves
// predictably with C-style status prints from the CLI.
inline void warn(const std::string& msg) {
  std::fprintf(stderr, "[rbfgen] warning: %s\n", msg.c_str());
}

inline void info(const std::string& msg) {
  std::fprintf(stderr, "[rbfgen] %s\n", msg.c_str());
}

}  // namespace rbfgen::log
