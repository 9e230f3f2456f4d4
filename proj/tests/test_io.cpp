#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "rbfgen/errors.hpp"
#include "rbfgen/io.hpp"
#include "rbfgen/svg.hpp"

using namespace rbfgen;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "rbfgen_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("double formatting round-trips exactly") {
  const double values[] = {0.0,
                           -0.0,
                           1.0,
                           -1.0,
                           0.1,
                           1.0 / 3.0,
                           1e-300,
                           -1e300,
                           3.141592653589793,
                           std::numeric_limits<double>::denorm_min(),
                           std::numeric_limits<double>::max(),
                           1.0000000000000002};
  for (double v : values) {
    CAPTURE(v);
    const std::string text = format_double(v);
    double back = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), back);
    REQUIRE(res.ec == std::errc());
    REQUIRE(res.ptr == text.data() + text.size());
    CHECK(back == v);
  }
  // Shortest form, not padded digits.
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("text writes are atomic and leave no temp file") {
  const auto dir = temp_dir();
  const auto path = dir / "atomic.txt";
  write_text_file(path.string(), "first\n");
  CHECK(slurp(path) == "first\n");
  // Overwrite through the same rename path.
  write_text_file(path.string(), "second\n");
  CHECK(slurp(path) == "second\n");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));

  // An unwritable target directory surfaces as IoError, not a partial file.
  CHECK_THROWS_AS(write_text_file((dir / "missing_subdir" / "x.txt").string(), "x"),
                  IoError);
}

TEST_CASE("csv write/read round-trips values bit-exactly") {
  const auto path = (temp_dir() / "table.csv").string();
  CsvTable table;
  table.header = {"a", "b", "c"};
  table.rows = {{1.0, 1.0 / 3.0, -2.5e-17}, {0.0, 1e300, 7.125}};
  write_csv(path, table);

  const CsvTable back = read_csv(path);
  REQUIRE(back.header == table.header);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.rows[i].size(); ++j) {
      CHECK(back.rows[i][j] == table.rows[i][j]);
    }
  }

  // Two writes of the same table produce identical bytes.
  const std::string first = slurp(path);
  write_csv(path, table);
  CHECK(slurp(path) == first);
}

TEST_CASE("csv reader rejects malformed content with location info") {
  const auto dir = temp_dir();
  const auto path = (dir / "bad.csv").string();

  write_text_file(path, "a,b\n1.0\n");
  CHECK_THROWS_WITH_AS(read_csv(path),
                       doctest::Contains("line 2"), IoError);

  write_text_file(path, "a,b\n1.0,oops\n");
  CHECK_THROWS_WITH_AS(read_csv(path), doctest::Contains("not a number"), IoError);

  write_text_file(path, "");
  CHECK_THROWS_WITH_AS(read_csv(path), doctest::Contains("empty"), IoError);

  CHECK_THROWS_AS(read_csv((dir / "does_not_exist.csv").string()), IoError);
}

TEST_CASE("dataset csv schema is inputs-then-responses") {
  const auto dir = temp_dir();
  const auto path = (dir / "data.csv").string();

  write_text_file(path,
                  "x1,x2,q1,q2\n"
                  "0.0,1.0,10.0,3.0\n"
                  "0.5,2.0,11.0,4.0\n"
                  "1.0,3.0,12.0,5.0\n");
  const MultiDataset data = read_dataset_csv(path);
  CHECK(data.count() == 3);
  CHECK(data.dim() == 2);
  CHECK(data.qoi_count() == 2);
  CHECK(data.var_names == std::vector<std::string>{"x1", "x2"});
  CHECK(data.qoi_names == std::vector<std::string>{"q1", "q2"});
  CHECK(data.X(1, 1) == 2.0);
  CHECK(data.Y(2, 0) == 12.0);
  // Bounds cover the observed range.
  CHECK(data.bounds.lo[0] == 0.0);
  CHECK(data.bounds.hi[0] == 1.0);
  CHECK(data.bounds.lo[1] == 1.0);
  CHECK(data.bounds.hi[1] == 3.0);

  // Write-back and re-read preserves everything.
  const auto path2 = (dir / "data2.csv").string();
  write_dataset_csv(path2, data);
  const MultiDataset back = read_dataset_csv(path2);
  CHECK(back.X == data.X);
  CHECK(back.Y == data.Y);
  CHECK(back.var_names == data.var_names);

  // A constant input column still yields a valid (padded) box.
  write_text_file(path,
                  "x1,q1\n"
                  "2.0,1.0\n"
                  "2.0,2.0\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(path), doctest::Contains("duplicate"),
                       IoError);
  write_text_file(path,
                  "x1,x2,q1\n"
                  "2.0,0.0,1.0\n"
                  "2.0,1.0,2.0\n");
  const MultiDataset padded = read_dataset_csv(path);
  CHECK(padded.bounds.lo[0] == 1.5);
  CHECK(padded.bounds.hi[0] == 2.5);
}

TEST_CASE("dataset csv rejects bad headers") {
  const auto path = (temp_dir() / "hdr.csv").string();
  write_text_file(path, "q1,x1\n1.0,2.0\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(path), doctest::Contains("starting with 'x'"),
                       IoError);
  write_text_file(path, "x1,x2\n1.0,2.0\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(path), doctest::Contains("response"), IoError);
  write_text_file(path, "x1,q1,x2\n1.0,2.0,3.0\n");
  CHECK_THROWS_AS(read_dataset_csv(path), IoError);
  write_text_file(path, "x1,q1\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(path), doctest::Contains("no data rows"),
                       IoError);
}

TEST_CASE("trend table csv round-trips names and signs") {
  const auto path = (temp_dir() / "mono.csv").string();
  MonotonicityTable table;
  table.entries = Eigen::MatrixXi(3, 2);
  table.entries << 1, 0, -1, 1, 0, -1;
  write_mono_table_csv(path, table, {"x1", "x2", "x3"}, {"q1", "q2"});

  std::vector<std::string> vars, qois;
  const MonotonicityTable back = read_mono_table_csv(path, &vars, &qois);
  CHECK(back.entries == table.entries);
  CHECK(vars == std::vector<std::string>{"x1", "x2", "x3"});
  CHECK(qois == std::vector<std::string>{"q1", "q2"});

  write_text_file(path, "variable,q1\nx1,2\n");
  CHECK_THROWS_WITH_AS(read_mono_table_csv(path), doctest::Contains("-1, 0, or 1"),
                       IoError);
  write_text_file(path, "var,q1\nx1,1\n");
  CHECK_THROWS_WITH_AS(read_mono_table_csv(path), doctest::Contains("variable"),
                       IoError);
}

TEST_CASE("svg plot renders every requested element") {
  SvgPlot plot("demo", "x", "f(x)");
  const std::vector<double> xs = {0.0, 0.5, 1.0};
  plot.add_band(xs, {-1.0, -0.5, 0.0}, {1.0, 1.5, 2.0}, "#88aaff", 0.3);
  plot.add_polyline(xs, {0.0, 0.5, 1.0}, "#1f4e9c", 2.0);
  plot.add_polyline(xs, {1.0, 0.5, 0.0}, "#c23b22", 1.5, "4 3");
  plot.add_points({0.0, 1.0}, {0.0, 1.0}, "#222222", 3.0);
  plot.add_legend("mean", "#1f4e9c");
  const std::string svg = plot.render();

  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count_occurrences(svg, "<polygon") == 1);
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(count_occurrences(svg, "stroke-dasharray") == 1);
  CHECK(count_occurrences(svg, "<circle") == 2);
  CHECK(svg.find(">demo<") != std::string::npos);
  CHECK(svg.find(">mean<") != std::string::npos);
  // Deterministic output.
  CHECK(plot.render() == svg);
}

TEST_CASE("svg plot rejects mismatched or non-finite input") {
  SvgPlot plot("", "", "");
  CHECK_THROWS_AS(plot.add_polyline({0.0, 1.0}, {0.0}, "#000", 1.0), ShapeError);
  CHECK_THROWS_AS(plot.add_band({0.0}, {0.0, 1.0}, {1.0}, "#000", 0.5), ShapeError);
  CHECK_THROWS_AS(
      plot.add_points({std::numeric_limits<double>::quiet_NaN()}, {0.0}, "#000", 1.0),
      DomainError);
  // Empty or degenerate data still renders a frame.
  const std::string svg = plot.render();
  CHECK(svg.find("</svg>") != std::string::npos);
  SvgPlot flat("", "", "");
  flat.add_points({2.0}, {7.0}, "#000", 1.0);
  CHECK(flat.render().find("<circle") != std::string::npos);
}
