#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rbfgen/commands.hpp"
#include "rbfgen/config.hpp"
#include "rbfgen/errors.hpp"
#include "rbfgen/evalcv.hpp"
#include "rbfgen/io.hpp"
#include "rbfgen/training.hpp"

using namespace rbfgen;
using doctest::Contains;
using nlohmann::json;

namespace {

// Fresh per-case scratch directory under the system temp root.
std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "rbfgen_cmd_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Small trained ensemble used by the serialization cases: five points of a
// smooth increasing 1-D response, one trend prior, deliberately tiny
// training budget.
SurrogateEnsemble tiny_ensemble() {
  Mat X(5, 1);
  X << 0.0, 0.25, 0.5, 0.75, 1.0;
  Vec y(5);
  for (int i = 0; i < 5; ++i) y[i] = std::exp(X(i, 0));
  const Dataset data = make_dataset(X, y, Box::unit(1));

  PriorTerm mono;
  mono.id = "up";
  mono.kind = PriorKind::Mono;
  mono.direction = MonoDirection::NonDecreasing;
  mono.points = Mat(9, 1);
  for (int i = 0; i < 9; ++i) mono.points(i, 0) = i / 8.0;
  mono.weight = 3.0;

  FitConfig cfg;
  cfg.kernel = KernelSpec{KernelKind::Gaussian, 2.0};
  cfg.center_count = 12;
  cfg.hidden = {8};
  cfg.ensemble_size = 8;
  cfg.train.iterations = 30;
  cfg.train.batch_size = 8;
  return fit_rbfgen(data, {mono}, cfg);
}

MultiDataset exp_train_data() {
  MultiDataset data;
  data.X = Mat(5, 1);
  data.X << 0.0, 0.25, 0.5, 0.75, 1.0;
  data.Y = Mat(5, 1);
  for (int i = 0; i < 5; ++i) data.Y(i, 0) = std::exp(data.X(i, 0));
  data.bounds = Box::unit(1);
  data.var_names = {"x1"};
  data.qoi_names = {"q1"};
  return data;
}

}  // namespace

TEST_CASE("model bundle round-trips to identical predictions") {
  const SurrogateEnsemble ens = tiny_ensemble();
  const std::string text = serialize_model(ens);
  const SurrogateEnsemble back = deserialize_model(text);

  // serialize -> deserialize -> serialize is byte-stable.
  CHECK(serialize_model(back) == text);

  Vec x(1);
  for (int i = 0; i <= 6; ++i) {
    x[0] = i / 6.0;
    const Prediction a = predict_with_ci(ens, x, 0.95);
    const Prediction b = predict_with_ci(back, x, 0.95);
    CHECK(a.mean == b.mean);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
  }
}

TEST_CASE("model deserialization rejects malformed bundles") {
  const std::string text = serialize_model(tiny_ensemble());
  const json good = json::parse(text);

  CHECK_THROWS_WITH_AS(deserialize_model("not json"), Contains("not valid JSON"),
                       IoError);
  CHECK_THROWS_WITH_AS(deserialize_model("[1, 2]"),
                       Contains("top level must be an object"), IoError);

  {
    json doc = good;
    doc.erase("centers");
    CHECK_THROWS_WITH_AS(deserialize_model(doc.dump()),
                         Contains("missing field 'centers'"), IoError);
  }
  {
    json doc = good;
    doc["kernel"]["kind"] = "cubic";
    CHECK_THROWS_WITH_AS(deserialize_model(doc.dump()),
                         Contains("unknown kernel kind"), IoError);
  }
  {
    json doc = good;
    doc["w0"].erase(doc["w0"].size() - 1);
    CHECK_THROWS_WITH_AS(deserialize_model(doc.dump()), Contains("w0 length"),
                         IoError);
  }
  {
    json doc = good;
    doc["members"][0].erase(0);
    CHECK_THROWS_WITH_AS(deserialize_model(doc.dump()), Contains("member length"),
                         IoError);
  }
  {
    json doc = good;
    doc["members"] = json::array();
    CHECK_THROWS_WITH_AS(deserialize_model(doc.dump()),
                         Contains("no ensemble members"), IoError);
  }
  {
    json doc = good;
    doc["nullspace"].erase(doc["nullspace"].size() - 1);
    CHECK_THROWS_WITH_AS(deserialize_model(doc.dump()), Contains("null basis rows"),
                         IoError);
  }
  {
    json doc = good;
    doc["ystd"]["stddev"] = -1.0;
    CHECK_THROWS_WITH_AS(deserialize_model(doc.dump()), Contains("stddev"), IoError);
  }
  {
    json doc = good;
    doc["centers"][0] = json::array({0.1, 0.2});  // 2-wide row in a 1-D model
    CHECK_THROWS_AS(deserialize_model(doc.dump()), IoError);
  }
}

TEST_CASE("demo command writes interpolating curve bundles") {
  const auto dir = scratch("demo");
  // 97 grid points make all four sample abscissae (thirds included) exact
  // grid nodes, so the curve files can be checked against the data.
  const json doc = {{"command", "demo1d"},
                    {"outDir", dir.string()},
                    {"seed", 7},
                    {"grid", 97},
                    {"svgMembers", 3},
                    {"trainCfg", {{"iterations", 40}, {"batchSize", 8}}},
                    {"fit", {{"ensembleSize", 12}, {"hidden", json::array({8})}}},
                    {"priors", json::array({{{"id", "cap"},
                                             {"kind", "pos"},
                                             {"slice", {{"var", 0}, {"count", 9}}},
                                             {"bound", 0.0}}})}};
  const RunConfig cfg = parse_config_json(doc);
  REQUIRE(run_command(cfg) == 0);

  const std::vector<std::string> names = {"relaxed", "point", "curvature",
                                          "monotone", "custom_cap"};
  for (const std::string& name : names) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(dir / ("demo1d_" + name + "_curves.csv")));
    CHECK(std::filesystem::exists(dir / ("demo1d_" + name + ".svg")));
    const bool trained = name != "relaxed";
    CHECK(std::filesystem::exists(dir / ("demo1d_" + name + "_loss.csv")) == trained);
  }

  // Every ensemble member interpolates the four data points.
  for (const std::string& name : names) {
    CAPTURE(name);
    const CsvTable curves = read_csv((dir / ("demo1d_" + name + "_curves.csv")).string());
    REQUIRE(curves.header.size() == 5 + 12);
    CHECK(curves.header[0] == "x");
    CHECK(curves.header[5] == "m0");
    REQUIRE(curves.rows.size() == 97);
    int matched = 0;
    for (const auto& row : curves.rows) {
      const double x = row[0];
      const double truth = row[1];
      const bool is_sample = std::abs(x - 0.0) < 1e-12 ||
                             std::abs(x - 1.0 / 3.0) < 1e-12 ||
                             std::abs(x - 2.0 / 3.0) < 1e-12 ||
                             std::abs(x - 1.0) < 1e-12;
      CHECK(row[3] <= row[2] + 1e-12);  // lo <= mean
      CHECK(row[2] <= row[4] + 1e-12);  // mean <= hi
      if (!is_sample) continue;
      ++matched;
      for (std::size_t m = 5; m < row.size(); ++m) {
        CHECK(std::abs(row[m] - truth) <= 1e-8 * std::max(1.0, std::abs(truth)));
      }
    }
    CHECK(matched == 4);
  }

  // The loss CSV is iteration-tagged and its term columns sum to the total.
  const CsvTable loss = read_csv((dir / "demo1d_monotone_loss.csv").string());
  REQUIRE(loss.header.size() == 3);
  CHECK(loss.header[0] == "iteration");
  CHECK(loss.header[1] == "total");
  CHECK(loss.header[2] == "monotone");
  REQUIRE(!loss.rows.empty());
  for (const auto& row : loss.rows) {
    CHECK(row[1] == doctest::Approx(row[2]).epsilon(1e-12));
  }

  // Manifest: parsed config plus version stamps, nothing time-dependent.
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("command") == "demo1d");
  CHECK(manifest.at("jobsResolved").get<int>() >= 1);
  CHECK(manifest.at("deterministic") == false);
  CHECK(manifest.at("versions").at("rbfgen") == "1.0.0");
  CHECK(manifest.at("config").at("grid") == 97);
  CHECK(slurp(dir / "manifest.json").find("timestamp") == std::string::npos);

  // The resolved config in the manifest re-parses to the same run.
  const RunConfig again = parse_config_json(manifest.at("config"));
  CHECK(serialize_config(again) == manifest.at("config"));
}

TEST_CASE("beam command writes study tables and slice plot") {
  const auto dir = scratch("beam");
  const json doc = {{"command", "beam"},
                    {"outDir", dir.string()},
                    {"seed", 3},
                    {"deterministic", true},
                    {"dims", json::array({2})},
                    {"seeds", 1},
                    {"ratio", 1},
                    {"trainCfg", {{"iterations", 40}, {"batchSize", 8}}},
                    {"fit", {{"hidden", json::array({8})}, {"ensembleSize", 8}}},
                    {"optimize", {{"starts", 2}, {"maxIters", 40}}}};
  const RunConfig cfg = parse_config_json(doc);
  REQUIRE(run_command(cfg) == 0);

  const std::string study = slurp(dir / "beam_study.csv");
  const auto study_lines = lines_of(study);
  REQUIRE(study_lines.size() == 3);  // header + one row per method
  CHECK(study_lines[0] ==
        "D,ratio,method,seed,C_initial,C_final_true,improvement_pct,wall_time_s");
  CHECK(study_lines[1].rfind("2,1,baseline_rbf,3,", 0) == 0);
  CHECK(study_lines[2].rfind("2,1,rbfgen,3,", 0) == 0);
  // Deterministic mode zeroes the wall-time column.
  CHECK(study_lines[1].substr(study_lines[1].rfind(',') + 1) == "0");
  CHECK(study_lines[2].substr(study_lines[2].rfind(',') + 1) == "0");

  const auto summary_lines = lines_of(slurp(dir / "beam_summary.csv"));
  REQUIRE(summary_lines.size() == 3);
  CHECK(summary_lines[0] ==
        "D,ratio,method,median_improvement_pct,mean_improvement_pct,mean_wall_time_s");

  const std::string svg = slurp(dir / "beam_slice_d2.svg");
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("square RBF") != std::string::npos);
  CHECK(svg.find("generator mean") != std::string::npos);

  // Same deterministic config into a second directory: identical tables.
  const auto dir2 = scratch("beam_rerun");
  json doc2 = doc;
  doc2["outDir"] = dir2.string();
  REQUIRE(run_command(parse_config_json(doc2)) == 0);
  CHECK(slurp(dir2 / "beam_study.csv") == study);
}

TEST_CASE("crossval command reports per-QoI metrics with an overall row") {
  const auto dir = scratch("crossval");
  SyntheticSpec spec;
  spec.count = 9;
  spec.vars = 3;
  spec.qois = 2;
  spec.relevant = 2;
  spec.seed = 5;
  const MultiDataset data = make_synthetic_dataset(spec);
  const MonotonicityTable table = synthetic_mono_table(spec);
  write_dataset_csv((dir / "data.csv").string(), data);
  write_mono_table_csv((dir / "mono.csv").string(), table, data.var_names,
                       data.qoi_names);

  const json doc = {{"command", "crossval"}, {"outDir", (dir / "out").string()},
                    {"datasetPath", "data.csv"}, {"monoTablePath", "mono.csv"},
                    {"ncomp", 2},             {"method", "baseline_rbf"}};
  const RunConfig cfg = parse_config_json(doc, dir.string());
  REQUIRE(run_command(cfg) == 0);

  const auto report_lines = lines_of(slurp(dir / "out" / "crossval_report.csv"));
  REQUIRE(report_lines.size() == 4);  // header, two QoIs, overall
  CHECK(report_lines[0] == "qoi,method,are,aae");
  CHECK(report_lines[1].rfind(data.qoi_names[0] + ",baseline_rbf,", 0) == 0);
  CHECK(report_lines[2].rfind(data.qoi_names[1] + ",baseline_rbf,", 0) == 0);
  CHECK(report_lines[3].rfind("overall,baseline_rbf,", 0) == 0);

  // The overall row is the mean of the per-QoI rows.
  auto fields = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  const double are1 = std::stod(fields(report_lines[1])[2]);
  const double are2 = std::stod(fields(report_lines[2])[2]);
  const double overall = std::stod(fields(report_lines[3])[2]);
  CHECK(overall == doctest::Approx(0.5 * (are1 + are2)).epsilon(1e-12));
}

TEST_CASE("fit and predict close the loop at the training points") {
  const auto dir = scratch("fitpredict");
  const MultiDataset data = exp_train_data();
  write_dataset_csv((dir / "train.csv").string(), data);

  const json fit_doc = {
      {"command", "fit"},
      {"outDir", (dir / "fit_out").string()},
      {"seed", 1},
      {"datasetPath", "train.csv"},
      {"modelOut", "model.json"},
      {"fit",
       {{"epsilon", 2.0}, {"centers", 12}, {"hidden", json::array({8})},
        {"ensembleSize", 8}}},
      {"trainCfg", {{"iterations", 30}, {"batchSize", 8}}},
      {"priors", json::array({{{"id", "up"},
                               {"kind", "mono"},
                               {"direction", "nondecreasing"},
                               {"slice", {{"var", 0}, {"count", 9}}},
                               {"weight", 3.0}}})}};
  REQUIRE(run_command(parse_config_json(fit_doc, dir.string())) == 0);
  CHECK(std::filesystem::exists(dir / "fit_out" / "model.json"));
  CHECK(std::filesystem::exists(dir / "fit_out" / "fit_loss.csv"));

  CsvTable points;
  points.header = {"x1"};
  for (int i = 0; i < data.count(); ++i) points.rows.push_back({data.X(i, 0)});
  write_csv((dir / "points.csv").string(), points);

  const json predict_doc = {{"command", "predict"},
                            {"outDir", (dir / "pred_out").string()},
                            {"modelPath", (dir / "fit_out" / "model.json").string()},
                            {"pointsPath", "points.csv"},
                            {"level", 0.9},
                            {"outCsv", "pred.csv"}};
  REQUIRE(run_command(parse_config_json(predict_doc, dir.string())) == 0);

  // Every member interpolates, so the interval collapses onto the data.
  const CsvTable pred = read_csv((dir / "pred_out" / "pred.csv").string());
  REQUIRE(pred.header == std::vector<std::string>({"x1", "mean", "lo", "hi"}));
  REQUIRE(pred.rows.size() == 5);
  for (std::size_t i = 0; i < pred.rows.size(); ++i) {
    const double y = data.Y(static_cast<int>(i), 0);
    CHECK(std::abs(pred.rows[i][1] - y) <= 1e-8);
    CHECK(pred.rows[i][3] - pred.rows[i][2] <= 1e-8);
    CHECK(pred.rows[i][2] <= pred.rows[i][1] + 1e-12);
    CHECK(pred.rows[i][1] <= pred.rows[i][3] + 1e-12);
  }
}

TEST_CASE("run_command maps failures to the documented exit codes") {
  const auto dir = scratch("exitcodes");
  const MultiDataset data = exp_train_data();
  write_dataset_csv((dir / "train.csv").string(), data);

  // Missing input file -> 3.
  {
    const json doc = {{"command", "crossval"},
                      {"outDir", (dir / "o1").string()},
                      {"datasetPath", (dir / "absent.csv").string()},
                      {"monoTablePath", (dir / "mono.csv").string()}};
    CHECK(run_command(parse_config_json(doc)) == 3);
  }

  // Points that disagree with the model dimension -> 2.
  {
    write_text_file((dir / "model.json").string(),
                    serialize_model(tiny_ensemble()) + "\n");
    CsvTable wide;
    wide.header = {"x1", "x2"};
    wide.rows.push_back({0.1, 0.2});
    write_csv((dir / "wide.csv").string(), wide);
    const json doc = {{"command", "predict"},
                      {"outDir", (dir / "o2").string()},
                      {"modelPath", (dir / "model.json").string()},
                      {"pointsPath", (dir / "wide.csv").string()}};
    CHECK(run_command(parse_config_json(doc)) == 2);
  }

  // A dataset with extra response columns is a fit-domain error -> 2.
  {
    MultiDataset two = data;
    two.Y = Mat(5, 2);
    two.Y.col(0) = data.Y.col(0);
    two.Y.col(1) = 2.0 * data.Y.col(0);
    two.qoi_names = {"q1", "q2"};
    write_dataset_csv((dir / "two.csv").string(), two);
    const json doc = {{"command", "fit"},
                      {"outDir", (dir / "o3").string()},
                      {"datasetPath", (dir / "two.csv").string()},
                      {"priors", json::array({{{"id", "up"},
                                               {"kind", "mono"},
                                               {"slice", {{"var", 0}, {"count", 5}}}}})}};
    CHECK(run_command(parse_config_json(doc)) == 2);
  }

  // A flat kernel collapses the system rank -> 4.
  {
    const json doc = {{"command", "fit"},
                      {"outDir", (dir / "o4").string()},
                      {"datasetPath", (dir / "train.csv").string()},
                      {"fit", {{"epsilon", 1e-8}, {"centers", 12}}},
                      {"priors", json::array({{{"id", "up"},
                                               {"kind", "mono"},
                                               {"slice", {{"var", 0}, {"count", 5}}}}})}};
    CHECK(run_command(parse_config_json(doc)) == 4);
  }
}
