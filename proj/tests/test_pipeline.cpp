#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#ifdef GFD_CLI_PATH
#include <sys/wait.h>
#endif

#include "gfd/config.hpp"
#include "gfd/errors.hpp"
#include "gfd/features.hpp"
#include "gfd/model.hpp"
#include "gfd/pipeline.hpp"
#include "test_support.hpp"

using test_support::read_text;
using test_support::TempDir;
using test_support::write_text;

namespace {

// 3-class synthetic run small enough for unit-test budgets: 6 records of
// 4096 samples, fixed 256/128 segmentation -> 30 segments per record
gfd::PipelineConfig base_config() {
  gfd::PipelineConfig cfg;
  cfg.seed = 4242;
  cfg.dataset_mode = gfd::DatasetMode::synth;
  cfg.synth.classes = {{"healthy", 0.0, 0.0, 0.0, 0.0},
                       {"inner", 105.0, 5.0, 3200.0, 900.0},
                       {"outer", 78.0, 5.0, 2000.0, 650.0}};
  cfg.synth.duration_s = 0.5;
  cfg.synth.sample_rate_hz = 8192.0;
  cfg.synth.channels = 1;
  cfg.synth.noise_std = 1.0;
  cfg.synth.records_per_class = 2;
  cfg.segmentation_mode = gfd::SegmentationMode::fixed;
  cfg.window = 256;
  cfg.step = 128;
  cfg.train.kind = gfd::ModelKind::random_forest;
  cfg.train.trees = 30;
  cfg.folds = 2;
  return cfg;
}

double column_mean(const gfd::FeatureMatrix& m, std::size_t c,
                   const std::vector<std::size_t>& rows) {
  double s = 0.0;
  for (auto r : rows) s += m.at(r, c);
  return s / static_cast<double>(rows.size());
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

// the subset of JSON Schema the report schema uses: type (string or list),
// properties, required, items
bool validate_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                     std::string& why, const std::string& at = "$") {
  if (schema.contains("type")) {
    auto matches = [&](const std::string& t) {
      if (t == "object") return doc.is_object();
      if (t == "array") return doc.is_array();
      if (t == "string") return doc.is_string();
      if (t == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
      if (t == "number") return doc.is_number();
      if (t == "boolean") return doc.is_boolean();
      if (t == "null") return doc.is_null();
      return false;
    };
    const auto& type = schema.at("type");
    bool ok = false;
    if (type.is_string()) {
      ok = matches(type.get<std::string>());
    } else {
      for (const auto& t : type) ok = ok || matches(t.get<std::string>());
    }
    if (!ok) {
      why = at + ": type mismatch, got " + doc.dump();
      return false;
    }
  }
  if (schema.contains("required")) {
    for (const auto& key : schema.at("required")) {
      if (!doc.contains(key.get<std::string>())) {
        why = at + ": missing required key " + key.get<std::string>();
        return false;
      }
    }
  }
  if (schema.contains("properties") && doc.is_object()) {
    for (const auto& [key, sub] : schema.at("properties").items()) {
      if (doc.contains(key) &&
          !validate_schema(doc.at(key), sub, why, at + "." + key))
        return false;
    }
  }
  if (schema.contains("items") && doc.is_array()) {
    std::size_t i = 0;
    for (const auto& item : doc) {
      if (!validate_schema(item, schema.at("items"), why,
                           at + "[" + std::to_string(i) + "]"))
        return false;
      ++i;
    }
  }
  return true;
}

#ifdef GFD_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(GFD_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_CASE("prepared features have the expected shape and standardization") {
  auto cfg = base_config();
  const auto result = gfd::run_pipeline(cfg);
  const auto& prep = result.prep;

  CHECK(prep.class_names == std::vector<std::string>{"healthy", "inner", "outer"});
  CHECK(prep.final_z.rows == 180);  // 6 records x 30 segments
  CHECK(prep.final_z.cols == 23);   // 20 base features + 3 graph columns
  REQUIRE(prep.final_z.names.size() == 23);
  CHECK(prep.final_z.names[20] == "graph_L");
  CHECK(prep.final_z.names[21] == "graph_Q");
  CHECK(prep.final_z.names[22] == "graph_gap");
  CHECK(prep.labels.size() == 180);

  // 30% of each 60-segment class goes to the test side
  CHECK(prep.split.test.size() == 54);
  CHECK(prep.split.train.size() == 126);

  // faithful mode standardizes every column on all rows
  const auto rows = all_rows(prep.final_z.rows);
  for (std::size_t c = 0; c < prep.final_z.cols; ++c) {
    CHECK(std::fabs(column_mean(prep.final_z, c, rows)) < 1e-9);
  }

  CHECK(result.report.accuracy >= 0.0);
  CHECK(result.report.accuracy <= 1.0);
  CHECK(result.report.has_cv);
}

TEST_CASE("strict mode fits scalers and graphs on training rows only") {
  auto cfg = base_config();
  cfg.leakage = gfd::LeakageMode::strict;
  const auto result = gfd::run_pipeline(cfg);
  const auto& prep = result.prep;

  CHECK(prep.final_z.cols == 23);
  for (std::size_t c = 0; c < prep.final_z.cols; ++c) {
    CHECK(std::fabs(column_mean(prep.final_z, c, prep.split.train)) < 1e-9);
  }

  const auto doc = nlohmann::json::parse(gfd::report_json(cfg, result));
  CHECK(doc.at("mode").get<std::string>() == "strict");
}

TEST_CASE("identical configurations reproduce bitwise identical runs") {
  const auto cfg = base_config();
  const auto a = gfd::run_pipeline(cfg);
  const auto b = gfd::run_pipeline(cfg);
  CHECK(a.prep.final_z.values == b.prep.final_z.values);
  CHECK(a.prep.labels == b.prep.labels);
  CHECK(gfd::report_json(cfg, a) == gfd::report_json(cfg, b));
}

TEST_CASE("two channels widen the feature table to 43 columns") {
  auto cfg = base_config();
  cfg.synth.channels = 2;
  const auto result = gfd::run_pipeline(cfg);
  const auto& z = result.prep.final_z;
  CHECK(z.cols == 43);

  const auto base = gfd::feature_names(2);
  REQUIRE(base.size() == 40);
  for (std::size_t c = 0; c < 40; ++c) CHECK(z.names[c] == base[c]);
  CHECK(z.names[40] == "graph_L");
  CHECK(z.names[41] == "graph_Q");
  CHECK(z.names[42] == "graph_gap");
}

TEST_CASE("the run report serializes every advertised field and no timing") {
  auto cfg = base_config();
  const auto result = gfd::run_pipeline(cfg);
  const auto text = gfd::report_json(cfg, result);
  CHECK(text.find("timing") == std::string::npos);

  const auto doc = nlohmann::json::parse(text);
  CHECK(doc.at("class_names").size() == 3);
  CHECK(doc.at("rows").get<std::size_t>() == 180);
  CHECK(doc.at("feature_count").get<std::size_t>() == 23);
  CHECK(doc.at("seed").get<std::uint64_t>() == 4242);
  CHECK(doc.at("mode").get<std::string>() == "faithful");
  CHECK(doc.at("scope").get<std::string>() == "subgraph");
  CHECK(doc.at("segmentation").at("window").get<std::size_t>() == 256);
  CHECK(doc.at("segmentation").at("step").get<std::size_t>() == 128);
  CHECK(doc.at("segmentation").contains("score"));
  const auto& graph = doc.at("graph");
  CHECK(graph.contains("L"));
  CHECK(graph.contains("Q"));
  CHECK(graph.contains("gap"));
  CHECK(graph.contains("d_avg"));
  CHECK(graph.contains("L_exp_sw"));
  CHECK(graph.at("k_max").get<int>() == 5);
  CHECK(graph.at("N_max").get<std::size_t>() == 200);
  CHECK(graph.at("clusters").get<std::size_t>() >= 2);
  CHECK(graph.at("subgraphs").is_array());
  CHECK(!graph.at("subgraphs").empty());
  CHECK(graph.at("subgraphs")[0].contains("nodes"));
  const auto& eval = doc.at("evaluation");
  CHECK(eval.contains("accuracy"));
  CHECK(eval.contains("confusion"));
  CHECK(eval.contains("cv_mean"));  // folds >= 2 in the base config

  auto no_cv = cfg;
  no_cv.folds = 0;
  const auto plain = nlohmann::json::parse(gfd::report_json(no_cv, gfd::run_pipeline(no_cv)));
  CHECK(!plain.at("evaluation").contains("cv_mean"));

#ifdef GFD_SCHEMA_PATH
  const auto schema = nlohmann::json::parse(read_text(GFD_SCHEMA_PATH));
  std::string why;
  const bool ok = validate_schema(doc, schema, why);
  INFO("schema violation: ", why);
  CHECK(ok);
#endif
}

TEST_CASE("a full run writes its artifact set atomically and reproducibly") {
  TempDir tmp("pipeline_dir");
  auto cfg = base_config();
  cfg.output_dir = tmp.path / "run1";
  const auto result = gfd::run_pipeline_to_dir(cfg);

  for (const char* name :
       {"report.json", "features.csv", "edges.csv", "model.json", "timings.json"}) {
    INFO("missing ", name);
    CHECK(std::filesystem::exists(cfg.output_dir / name));
  }

  CHECK(read_text(cfg.output_dir / "report.json") == gfd::report_json(cfg, result));

  const auto feats = gfd::read_feature_csv(cfg.output_dir / "features.csv");
  CHECK(feats.rows == 180);
  CHECK(feats.cols == 23);
  CHECK(feats.labels == result.prep.labels);

  const auto edges = read_text(cfg.output_dir / "edges.csv");
  CHECK(edges.rfind("u,v,w\n", 0) == 0);

  const auto timings = nlohmann::json::parse(read_text(cfg.output_dir / "timings.json"));
  for (const char* stage : {"segmentation", "extraction", "graph", "train", "inference"}) {
    INFO("missing stage ", stage);
    CHECK(timings.contains(stage));
  }
  CHECK(timings.contains("cross_validation"));

  const auto model = gfd::load_model(cfg.output_dir / "model.json");
  CHECK(model.kind == gfd::ModelKind::random_forest);
  CHECK(model.feature_names == result.prep.final_z.names);

  // a second run with the same seed produces byte-identical artifacts
  auto cfg2 = cfg;
  cfg2.output_dir = tmp.path / "run2";
  gfd::run_pipeline_to_dir(cfg2);
  for (const char* name : {"report.json", "features.csv", "model.json", "edges.csv"}) {
    CHECK(read_text(cfg.output_dir / name) == read_text(cfg2.output_dir / name));
  }
}

TEST_CASE("stage failures carry the stage name") {
  auto cfg = base_config();
  cfg.window = 8192;  // longer than the 4096-sample records
  try {
    gfd::run_pipeline(cfg);
    FAIL("expected a segmentation failure");
  } catch (const gfd::DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.rfind("stage 'segmentation': ", 0) == 0);
    CHECK(msg.find("WindowExceedsSignal") != std::string::npos);
  }
}

#ifdef GFD_CLI_PATH

TEST_CASE("command line pipeline runs, reruns identically, honors seed override") {
  TempDir tmp("cli_pipeline");
  const std::string ini =
      "seed = 42\n"
      "[dataset]\n"
      "mode = synth\n"
      "classes = healthy:0:0:0:0, inner:105:5:3200:900, outer:78:5:2000:650\n"
      "duration_s = 0.5\n"
      "sample_rate_hz = 8192\n"
      "channels = 1\n"
      "noise_std = 1\n"
      "records_per_class = 2\n"
      "[segmentation]\n"
      "mode = fixed\n"
      "window = 256\n"
      "step = 128\n"
      "[model]\n"
      "kind = random_forest\n"
      "trees = 30\n"
      "[eval]\n"
      "folds = 2\n"
      "[output]\n"
      "dir = run1\n";
  write_text(tmp.path / "cfg.ini", ini);

  const auto cfg_path = (tmp.path / "cfg.ini").string();
  CHECK(run_cli("pipeline --config " + cfg_path) == 0);
  const auto report1 = read_text(tmp.path / "run1" / "report.json");
  CHECK(!report1.empty());

  CHECK(run_cli("pipeline --config " + cfg_path + " --out " +
                (tmp.path / "run2").string()) == 0);
  CHECK(read_text(tmp.path / "run2" / "report.json") == report1);

  CHECK(run_cli("pipeline --config " + cfg_path + " --seed 99 --out " +
                (tmp.path / "run3").string()) == 0);
  const auto report3 = read_text(tmp.path / "run3" / "report.json");
  CHECK(report3.find("\"seed\": 99") != std::string::npos);
  CHECK(report3 != report1);

  CHECK(run_cli("pipeline --config " + cfg_path + " --seed 99 --out " +
                (tmp.path / "run4").string()) == 0);
  CHECK(read_text(tmp.path / "run4" / "report.json") == report3);
}

TEST_CASE("command line exit codes distinguish failure classes") {
  TempDir tmp("cli_errors");

  // config problems exit 2
  CHECK(run_cli("pipeline --config " + (tmp.path / "missing.ini").string() +
                " 2> /dev/null") == 2);

  write_text(tmp.path / "noman.ini",
             "seed = 1\n[dataset]\nmode = manifest\nmanifest = nomanifest.json\n");
  const auto err_file = (tmp.path / "stderr.txt").string();
  CHECK(run_cli("pipeline --config " + (tmp.path / "noman.ini").string() + " 2> " +
                err_file) == 2);
  const auto err_text = read_text(err_file);
  CHECK(err_text.rfind("gfd: ", 0) == 0);
  CHECK(err_text.find("nomanifest.json") != std::string::npos);

  // non-finite samples exit 4
  write_text(tmp.path / "bad.csv", "0.1,0.2\n0.3,inf\n");
  write_text(tmp.path / "man.json",
             "{\"class_names\": [\"a\"], \"records\": [{\"path\": \"bad.csv\", "
             "\"label\": 0, \"sample_rate_hz\": 1000}]}\n");
  write_text(tmp.path / "inf.ini",
             "seed = 1\n[dataset]\nmode = manifest\nmanifest = man.json\n"
             "[segmentation]\nmode = fixed\nwindow = 64\nstep = 32\n");
  CHECK(run_cli("extract --config " + (tmp.path / "inf.ini").string() + " --out " +
                (tmp.path / "f.csv").string() + " 2> /dev/null") == 4);

  // other data problems exit 3
  CHECK(run_cli("train --features " + (tmp.path / "absent.csv").string() +
                " --out " + (tmp.path / "m.json").string() + " 2> /dev/null") == 3);
}

TEST_CASE("command line synth and extract cooperate") {
  TempDir tmp("cli_synth");
  write_text(tmp.path / "cfg.ini",
             "seed = 11\n[dataset]\nmode = synth\n"
             "classes = healthy:0:0:0:0, inner:105:5:3200:900\n"
             "duration_s = 0.25\nsample_rate_hz = 8192\nchannels = 1\n"
             "noise_std = 1\nrecords_per_class = 2\n"
             "[segmentation]\nmode = fixed\nwindow = 256\nstep = 128\n");

  CHECK(run_cli("synth --config " + (tmp.path / "cfg.ini").string() + " --out " +
                (tmp.path / "data").string()) == 0);
  REQUIRE(std::filesystem::exists(tmp.path / "data" / "manifest.json"));

  write_text(tmp.path / "use.ini",
             "seed = 11\n[dataset]\nmode = manifest\nmanifest = data/manifest.json\n"
             "[segmentation]\nmode = fixed\nwindow = 256\nstep = 128\n");
  CHECK(run_cli("extract --config " + (tmp.path / "use.ini").string() + " --out " +
                (tmp.path / "feats.csv").string()) == 0);

  const auto feats = gfd::read_feature_csv(tmp.path / "feats.csv");
  CHECK(feats.rows == 4 * 14);  // 4 records, floor((2048-256)/128) = 14 segments
  CHECK(feats.cols == 20);
  CHECK(!feats.labels.empty());
}

#endif  // GFD_CLI_PATH
