#pragma once

#include <string>
#include <vector>

#include "rbfgen/evalcv.hpp"

namespace rbfgen {

// Shortest decimal text that round-trips the exact double; locale-free, so
// emitted files are byte-stable across runs and machines.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// All writers land atomically: content goes to "<path>.tmp" and is renamed
// over the target, so a failed run never leaves a partial file. IoError on
// any filesystem failure.
void write_text_file(const std::string& path, const std::string& content);
void write_csv(const std::string& path, const CsvTable& table);

// Strict numeric CSV: one header line, comma-separated, every cell after
// the header a parseable double, all rows the same width. IoError on
// missing files or malformed content (with line numbers).
CsvTable read_csv(const std::string& path);

// Dataset schema: header x1..xd then q1..qm (at least one of each, inputs
// first). Bounds come from the observed column ranges, padded when a
// column is constant.
MultiDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const MultiDataset& data);

// Trend-table schema: header "variable,<qoi names...>"; one row per input
// variable: its name then one {-1, 0, +1} entry per QoI.
MonotonicityTable read_mono_table_csv(const std::string& path,
                                      std::vector<std::string>* var_names = nullptr,
                                      std::vector<std::string>* qoi_names = nullptr);
void write_mono_table_csv(const std::string& path,
                          const MonotonicityTable& table,
                          const std::vector<std::string>& var_names,
                          const std::vector<std::string>& qoi_names);

}  // namespace rbfgen
