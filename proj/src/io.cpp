#include "rbfgen/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "rbfgen/errors.hpp"

namespace rbfgen {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  throw IoError(path + ": " + what);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim surrounding whitespace; the writers never emit any, but hand
    // edited inputs often do.
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos
                        ? std::string()
                        : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::string& path, int line,
                  int column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    io_fail(path, "line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": not a number: '" + cell + "'");
  }
  return value;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // Trailing blank lines are tolerated; interior ones are not, so strip
  // only from the end.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_fail(tmp, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) io_fail(tmp, "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) io_fail(path, "rename failed: " + ec.message());
}

void write_csv(const std::string& path, const CsvTable& table) {
  if (table.header.empty()) io_fail(path, "refusing to write a header-less CSV");
  const std::size_t width = table.header.size();
  std::string out;
  for (std::size_t j = 0; j < width; ++j) {
    if (j) out += ',';
    out += table.header[j];
  }
  out += '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != width) {
      io_fail(path, "row " + std::to_string(i) + " has " +
                        std::to_string(table.rows[i].size()) + " cells, header has " +
                        std::to_string(width));
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (j) out += ',';
      out += format_double(table.rows[i][j]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

CsvTable read_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) io_fail(path, "empty file");
  CsvTable table;
  table.header = split_line(lines[0]);
  if (table.header.empty()) io_fail(path, "empty header line");
  const std::size_t width = table.header.size();
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_line(lines[li]);
    if (cells.size() != width) {
      io_fail(path, "line " + std::to_string(li + 1) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(width));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      row[j] = parse_cell(cells[j], path, static_cast<int>(li + 1),
                          static_cast<int>(j + 1));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

MultiDataset read_dataset_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  // Inputs first, responses after: x-prefixed names, then q-prefixed ones.
  std::size_t split = 0;
  while (split < table.header.size() && table.header[split].rfind('x', 0) == 0) {
    ++split;
  }
  if (split == 0) io_fail(path, "first column must be an input (name starting with 'x')");
  if (split == table.header.size()) {
    io_fail(path, "no response columns (names starting with 'q') after the inputs");
  }
  for (std::size_t j = split; j < table.header.size(); ++j) {
    if (table.header[j].rfind('q', 0) != 0) {
      io_fail(path, "column '" + table.header[j] +
                        "' follows the responses but is not q-prefixed");
    }
  }
  const int n = static_cast<int>(table.rows.size());
  if (n == 0) io_fail(path, "no data rows");
  const int d = static_cast<int>(split);
  const int m = static_cast<int>(table.header.size() - split);

  MultiDataset data;
  data.X = Mat(n, d);
  data.Y = Mat(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.X(i, j) = table.rows[i][j];
    for (int k = 0; k < m; ++k) data.Y(i, k) = table.rows[i][split + k];
  }
  data.var_names.assign(table.header.begin(), table.header.begin() + split);
  data.qoi_names.assign(table.header.begin() + split, table.header.end());

  // The modeling box is the observed range; a constant column still needs
  // positive extent, so pad it symmetrically.
  data.bounds.lo = data.X.colwise().minCoeff();
  data.bounds.hi = data.X.colwise().maxCoeff();
  for (int j = 0; j < d; ++j) {
    if (data.bounds.hi[j] - data.bounds.lo[j] <= 0.0) {
      data.bounds.lo[j] -= 0.5;
      data.bounds.hi[j] += 0.5;
    }
  }
  validate_multi_dataset(data);

  // Duplicate input rows make every interpolation matrix downstream
  // singular; report them here where the row numbers still mean something.
  const MatRM U = normalize_rows(data.bounds, data.X);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      if ((U.row(i) - U.row(k)).cwiseAbs().maxCoeff() < 1e-12) {
        io_fail(path, "rows " + std::to_string(i + 2) + " and " +
                          std::to_string(k + 2) +
                          " have identical inputs (duplicate sample)");
      }
    }
  }
  return data;
}

void write_dataset_csv(const std::string& path, const MultiDataset& data) {
  validate_multi_dataset(data);
  CsvTable table;
  table.header = data.var_names;
  table.header.insert(table.header.end(), data.qoi_names.begin(),
                      data.qoi_names.end());
  for (int i = 0; i < data.count(); ++i) {
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(data.dim() + data.qoi_count()));
    for (int j = 0; j < data.dim(); ++j) row.push_back(data.X(i, j));
    for (int k = 0; k < data.qoi_count(); ++k) row.push_back(data.Y(i, k));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

MonotonicityTable read_mono_table_csv(const std::string& path,
                                      std::vector<std::string>* var_names,
                                      std::vector<std::string>* qoi_names) {
  const auto lines = read_lines(path);
  if (lines.empty()) io_fail(path, "empty file");
  const auto header = split_line(lines[0]);
  if (header.size() < 2 || header[0] != "variable") {
    io_fail(path, "header must be 'variable,<qoi names...>'");
  }
  const int m = static_cast<int>(header.size() - 1);
  const int v = static_cast<int>(lines.size() - 1);
  if (v == 0) io_fail(path, "no variable rows");

  MonotonicityTable table;
  table.entries = Eigen::MatrixXi(v, m);
  std::vector<std::string> vars;
  for (int i = 0; i < v; ++i) {
    const auto cells = split_line(lines[static_cast<std::size_t>(i) + 1]);
    if (cells.size() != header.size()) {
      io_fail(path, "line " + std::to_string(i + 2) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
    }
    if (cells[0].empty()) io_fail(path, "line " + std::to_string(i + 2) + ": empty variable name");
    vars.push_back(cells[0]);
    for (int k = 0; k < m; ++k) {
      const double raw = parse_cell(cells[static_cast<std::size_t>(k) + 1], path, i + 2, k + 2);
      const int sign = static_cast<int>(raw);
      if (static_cast<double>(sign) != raw || sign < -1 || sign > 1) {
        io_fail(path, "line " + std::to_string(i + 2) + ", column " +
                          std::to_string(k + 2) + ": trend entries must be -1, 0, or 1");
      }
      table.entries(i, k) = sign;
    }
  }
  if (var_names) *var_names = std::move(vars);
  if (qoi_names) qoi_names->assign(header.begin() + 1, header.end());
  return table;
}

void write_mono_table_csv(const std::string& path,
                          const MonotonicityTable& table,
                          const std::vector<std::string>& var_names,
                          const std::vector<std::string>& qoi_names) {
  validate_mono_table(table, static_cast<int>(var_names.size()),
                      static_cast<int>(qoi_names.size()));
  std::string out = "variable";
  for (const auto& q : qoi_names) out += "," + q;
  out += '\n';
  for (int i = 0; i < table.var_count(); ++i) {
    out += var_names[static_cast<std::size_t>(i)];
    for (int k = 0; k < table.qoi_count(); ++k) {
      out += ',';
      out += std::to_string(table.entries(i, k));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace rbfgen
