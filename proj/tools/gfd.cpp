// gfd: vibration-signal fault diagnosis from the command line.
//
// Subcommands are thin wrappers over one library module each; `pipeline`
// chains them all from a single INI config. Exit codes: 0 success, 2 config
// problem, 4 numeric failure, 3 any other data problem.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "gfd/clustering.hpp"
#include "gfd/config.hpp"
#include "gfd/errors.hpp"
#include "gfd/eval.hpp"
#include "gfd/features.hpp"
#include "gfd/graph.hpp"
#include "gfd/model.hpp"
#include "gfd/pipeline.hpp"
#include "gfd/rng.hpp"
#include "gfd/segmentation.hpp"
#include "gfd/signal.hpp"

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw gfd::DataError("cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

// stdout unless --out was given
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
    std::cout << "wrote " << out_path << "\n";
  }
}

// --config plus the --seed override every subcommand carries
struct ConfigArgs {
  std::string path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "INI config file")->required();
    seed_opt = cmd->add_option("--seed", seed, "override the config seed");
  }

  gfd::PipelineConfig load() const {
    gfd::PipelineConfig cfg;
    try {
      cfg = gfd::load_config(path);
    } catch (const gfd::ConfigError& e) {
      throw gfd::ConfigError(std::string("stage 'config': ") + e.what());
    } catch (const gfd::DataError& e) {
      throw gfd::DataError(std::string("stage 'config': ") + e.what());
    }
    if (seed_opt != nullptr && seed_opt->count() > 0) cfg.seed = seed;
    return cfg;
  }
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

gfd::FeatureMatrix standardized_all(const gfd::FeatureMatrix& m) {
  const auto rows = all_rows(m.rows);
  return gfd::standardize_apply(m, gfd::standardize_fit(m, rows));
}

// dataset-level segmentation choice per config (fixed short-circuits)
gfd::SegmentationParams resolve_segmentation(const gfd::PipelineConfig& cfg,
                                             const gfd::DatasetManifest& ds) {
  if (cfg.segmentation_mode == gfd::SegmentationMode::fixed)
    return {cfg.window, cfg.step, 0.0};
  return gfd::optimize_window_dataset(ds, cfg.space, cfg.weights, cfg.max_segments);
}

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out.empty() ? "class" : out;
}

gfd::ModelKind kind_from(const std::string& s) {
  if (s == "softmax") return gfd::ModelKind::softmax;
  if (s == "random_forest") return gfd::ModelKind::random_forest;
  if (s == "linear_svm") return gfd::ModelKind::linear_svm;
  throw gfd::ConfigError("kind: expected softmax|random_forest|linear_svm, got '" + s + "'");
}

void setup_pipeline(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    ConfigArgs cfg;
    std::string out, mode;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("pipeline", "full run: segment, extract, cluster, graph, train, evaluate");
  o->cfg.attach(cmd);
  cmd->add_option("--out", o->out, "override [output] dir from the config");
  cmd->add_option("--mode", o->mode, "override graph leakage mode")
      ->check(CLI::IsMember({"faithful", "strict"}));
  cmd->callback([o, &job] {
    job = [o] {
      auto cfg = o->cfg.load();
      if (!o->out.empty()) cfg.output_dir = o->out;
      if (o->mode == "faithful") cfg.leakage = gfd::LeakageMode::faithful;
      if (o->mode == "strict") cfg.leakage = gfd::LeakageMode::strict;
      const auto result = gfd::run_pipeline_to_dir(cfg);
      const auto& prep = result.prep;
      std::cout << "window = " << prep.segmentation.window << "\n"
                << "step = " << prep.segmentation.step << "\n"
                << "rows = " << prep.final_z.rows << "\n"
                << "features = " << prep.final_z.cols << "\n"
                << "clusters = " << prep.clusters.k << "\n"
                << "subgraphs = " << prep.subgraphs.size() << "\n"
                << "test accuracy = " << fmt(result.report.accuracy) << "\n";
      if (result.report.has_cv)
        std::cout << "cv accuracy = " << fmt(result.report.cv_mean) << " +/- "
                  << fmt(result.report.cv_std) << "\n";
      std::cout << "outputs in " << cfg.output_dir.string() << "\n";
    };
  });
}

void setup_synth(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    ConfigArgs cfg;
    std::string out, format;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("synth", "generate the configured synthetic dataset");
  o->cfg.attach(cmd);
  cmd->add_option("--out", o->out, "output directory")->required();
  cmd->add_option("--format", o->format, "record file format")
      ->check(CLI::IsMember({"csv", "raw"}));
  cmd->callback([o, &job] {
    job = [o] {
      auto cfg = o->cfg.load();
      if (cfg.dataset_mode != gfd::DatasetMode::synth)
        throw gfd::ConfigError("synth: config must set dataset.mode = synth");
      const std::string format = o->format.empty() ? cfg.synth_format : o->format;
      const auto ds = gfd::synth_dataset(cfg.synth, gfd::derive_seed(cfg.seed, "synth"));

      const std::filesystem::path dir(o->out);
      std::filesystem::create_directories(dir);
      std::vector<std::string> rel_paths;
      std::map<int, int> per_class;
      for (const auto& rec : ds.records) {
        const auto idx = per_class[rec.label]++;
        std::string name = safe_name(ds.class_names.at(static_cast<std::size_t>(rec.label))) +
                           "_" + std::to_string(idx) + (format == "csv" ? ".csv" : ".f64");
        if (format == "csv")
          gfd::write_signal_csv(rec, dir / name);
        else
          gfd::write_signal_raw(rec, dir / name);
        rel_paths.push_back(name);
      }
      gfd::save_manifest(ds, dir / "manifest.json", rel_paths);
      std::cout << "wrote " << ds.records.size() << " records and manifest.json to "
                << dir.string() << "\n";
    };
  });
}

void setup_optimize_window(CLI::App& app, std::function<void()>& job) {
  auto o = std::make_shared<ConfigArgs>();
  auto* cmd = app.add_subcommand("optimize-window", "entropy-guided window/step search");
  o->attach(cmd);
  cmd->callback([o, &job] {
    job = [o] {
      const auto cfg = o->load();
      const auto ds = gfd::load_dataset(cfg);
      const auto seg = gfd::optimize_window_dataset(ds, cfg.space, cfg.weights, cfg.max_segments);
      std::cout << "window = " << seg.window << "\n"
                << "step = " << seg.step << "\n"
                << "score = " << fmt(seg.score) << "\n";
    };
  });
}

void setup_extract(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    ConfigArgs cfg;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("extract", "segment the dataset and write the raw feature table");
  o->cfg.attach(cmd);
  cmd->add_option("--out", o->out, "feature CSV path")->required();
  cmd->callback([o, &job] {
    job = [o] {
      const auto cfg = o->cfg.load();
      const auto ds = gfd::load_dataset(cfg);
      const auto seg = resolve_segmentation(cfg, ds);
      const auto m = gfd::extract_all(ds, {seg.window, seg.step});
      gfd::write_feature_csv(m, o->out);
      std::cout << "window = " << seg.window << "\n"
                << "step = " << seg.step << "\n"
                << "rows = " << m.rows << "\n"
                << "features = " << m.cols << "\n"
                << "wrote " << o->out << "\n";
    };
  });
}

void setup_cluster(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    std::string features, out;
    std::size_t clusters = 0, n_max = 200, batch = 256, iters = 100;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("cluster", "mini-batch k-means over a feature CSV");
  cmd->add_option("--features", o->features, "feature CSV (standardized internally)")->required();
  cmd->add_option("--clusters", o->clusters, "cluster count; 0 picks max(2, ceil(n / (2 n_max)))");
  cmd->add_option("--n-max", o->n_max, "subgraph size cap used by the default cluster count");
  cmd->add_option("--batch", o->batch, "mini-batch size");
  cmd->add_option("--iters", o->iters, "max iterations");
  cmd->add_option("--seed", o->seed, "rng seed");
  cmd->add_option("--out", o->out, "assignment JSON path (stdout when omitted)");
  cmd->callback([o, &job] {
    job = [o] {
      const auto z = standardized_all(gfd::read_feature_csv(o->features));
      const auto k = o->clusters > 0 ? o->clusters : gfd::default_cluster_count(z.rows, o->n_max);
      const auto model = gfd::minibatch_kmeans(z, k, o->batch, o->iters, o->seed);
      json doc = {{"k", model.k}, {"inertia", model.inertia}, {"assignments", model.assignments}};
      emit(o->out, doc.dump(2) + "\n");
    };
  });
}

void setup_graph(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    std::string features, out_edges, out_metrics;
    std::size_t clusters = 0, n_max = 200, batch = 256, iters = 100;
    int k_max = 5;
    double tau = 95.0;
    std::string path_cost = "similarity";
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("graph", "cluster a feature CSV, build kNN graphs, report metrics");
  cmd->add_option("--features", o->features, "feature CSV (standardized internally)")->required();
  cmd->add_option("--clusters", o->clusters, "cluster count; 0 picks the default");
  cmd->add_option("--k-max", o->k_max, "neighbors per node");
  cmd->add_option("--n-max", o->n_max, "max nodes per subgraph");
  cmd->add_option("--tau", o->tau, "distance percentile cutoff");
  cmd->add_option("--path-cost", o->path_cost, "edge cost for path lengths")
      ->check(CLI::IsMember({"similarity", "inverse_similarity"}));
  cmd->add_option("--seed", o->seed, "rng seed");
  cmd->add_option("--out-edges", o->out_edges, "edge CSV path (global row ids)");
  cmd->add_option("--out-metrics", o->out_metrics, "metrics JSON path (stdout when omitted)");
  cmd->callback([o, &job] {
    job = [o] {
      const auto m = gfd::read_feature_csv(o->features);
      const auto z = standardized_all(m);
      const auto k = o->clusters > 0 ? o->clusters : gfd::default_cluster_count(z.rows, o->n_max);
      const auto model = gfd::minibatch_kmeans(z, k, o->batch, o->iters, o->seed);

      std::vector<std::vector<int>> members(model.k);
      for (std::size_t r = 0; r < z.rows; ++r)
        members[static_cast<std::size_t>(model.assignments[r])].push_back(static_cast<int>(r));

      std::vector<gfd::Subgraph> subgraphs;
      for (std::size_t c = 0; c < model.k; ++c) {
        if (members[c].size() < 2) continue;
        const auto g = gfd::build_knn_graph(z, members[c], o->k_max, o->tau);
        for (auto& sg : gfd::split_subgraphs(g, o->n_max, static_cast<int>(c)))
          subgraphs.push_back(std::move(sg));
      }
      if (subgraphs.empty())
        throw gfd::NoEligibleSubgraphs("graph: every cluster has fewer than 2 rows");

      const auto cost = o->path_cost == "similarity" ? gfd::PathCost::similarity
                                                     : gfd::PathCost::inverse_similarity;
      const auto metrics = gfd::aggregate_system_metrics(subgraphs, z.labels, cost);

      if (!o->out_edges.empty()) {
        std::string edges = "u,v,w\n";
        for (const auto& sg : subgraphs) {
          for (const auto& e : sg.edges) {
            edges += std::to_string(sg.node_ids[static_cast<std::size_t>(e.u)]) + ',' +
                     std::to_string(sg.node_ids[static_cast<std::size_t>(e.v)]) + ',' +
                     fmt(e.w) + '\n';
          }
        }
        write_text(o->out_edges, edges);
        std::cout << "wrote " << o->out_edges << "\n";
      }

      json subs = json::array();
      for (const auto& s : metrics.per_subgraph) {
        subs.push_back({{"L", s.path_length},
                        {"Q", s.modularity},
                        {"gap", s.spectral_gap},
                        {"nodes", s.nodes},
                        {"edges", s.edges}});
      }
      json doc = {{"L", metrics.l_avg},          {"Q", metrics.q_mod},
                  {"gap", metrics.delta_spec},   {"d_avg", metrics.d_avg},
                  {"L_exp_sw", metrics.l_exp_sw}, {"clusters", model.k},
                  {"subgraphs", subs}};
      emit(o->out_metrics, doc.dump(2) + "\n");
    };
  });
}

void setup_train(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    std::string features, out, kind = "random_forest", features_per_split = "sqrt";
    gfd::TrainConfig tc;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train", "fit a classifier on a prepared feature CSV");
  cmd->add_option("--features", o->features, "feature CSV with labels")->required();
  cmd->add_option("--out", o->out, "model JSON path")->required();
  cmd->add_option("--kind", o->kind, "classifier")
      ->check(CLI::IsMember({"softmax", "random_forest", "linear_svm"}));
  cmd->add_option("--trees", o->tc.trees, "forest size");
  cmd->add_option("--max-depth", o->tc.max_depth, "tree depth cap, 0 = unlimited");
  cmd->add_option("--min-leaf", o->tc.min_leaf, "min samples per leaf");
  cmd->add_option("--features-per-split", o->features_per_split, "sqrt, all, or a count");
  cmd->add_option("--epochs", o->tc.epochs, "gradient descent epochs");
  cmd->add_option("--learning-rate", o->tc.learning_rate, "gradient descent step size");
  cmd->add_option("--lambda", o->tc.lambda, "L2 strength");
  cmd->add_option("--seed", o->seed, "rng seed");
  cmd->callback([o, &job] {
    job = [o] {
      const auto m = gfd::read_feature_csv(o->features);
      gfd::TrainConfig tc = o->tc;
      tc.kind = kind_from(o->kind);
      tc.seed = o->seed;
      if (o->features_per_split == "sqrt") {
        tc.features_per_split = gfd::FeatureSubset::sqrt_count;
      } else if (o->features_per_split == "all") {
        tc.features_per_split = gfd::FeatureSubset::all;
      } else {
        tc.features_per_split = gfd::FeatureSubset::fixed;
        tc.fixed_features = std::stoi(o->features_per_split);
      }
      const auto model = gfd::train_model(m, m.labels, tc);
      gfd::save_model(model, o->out);
      const auto pred = gfd::predict(model, m);
      std::size_t hit = 0;
      for (std::size_t i = 0; i < m.rows; ++i)
        if (pred.labels[i] == m.labels[i]) ++hit;
      std::cout << "training accuracy = "
                << fmt(static_cast<double>(hit) / static_cast<double>(m.rows)) << "\n"
                << "wrote " << o->out << "\n";
    };
  });
}

void setup_evaluate(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    std::string features, model, out;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("evaluate", "score a saved model against a labelled feature CSV");
  cmd->add_option("--features", o->features, "feature CSV with labels")->required();
  cmd->add_option("--model", o->model, "model JSON from `train` or `pipeline`")->required();
  cmd->add_option("--out", o->out, "report JSON path (stdout when omitted)");
  cmd->add_option("--seed", o->seed, "accepted for interface symmetry; evaluation is deterministic");
  cmd->callback([o, &job] {
    job = [o] {
      const auto m = gfd::read_feature_csv(o->features);
      const auto model = gfd::load_model(o->model);
      const auto pred = gfd::predict(model, m);
      int num_classes = model.classes.empty() ? 0 : model.classes.back() + 1;
      for (int y : m.labels) num_classes = std::max(num_classes, y + 1);
      const auto rep = gfd::classification_report(m.labels, pred.labels, num_classes);
      emit(o->out, gfd::eval_report_json(rep) + "\n");
    };
  });
}

void setup_cross_eval(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    ConfigArgs cfg;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "cross-eval", "source-to-target transfer matrix over [eval] transfer_pairs");
  o->cfg.attach(cmd);
  cmd->add_option("--out", o->out, "result CSV path (stdout when omitted)");
  cmd->callback([o, &job] {
    job = [o] {
      auto cfg = o->cfg.load();
      if (cfg.transfer_pairs.empty())
        throw gfd::ConfigError("cross-eval: [eval] transfer_pairs is empty");

      // one segmentation for every domain so feature schemas line up;
      // chosen on the first source when the config says optimize
      gfd::PipelineConfig domain_cfg = cfg;
      domain_cfg.dataset_mode = gfd::DatasetMode::manifest;
      domain_cfg.leakage = gfd::LeakageMode::faithful;
      std::map<std::string, gfd::DatasetManifest> datasets;
      auto dataset_of = [&](const std::string& path) -> gfd::DatasetManifest& {
        auto it = datasets.find(path);
        if (it == datasets.end())
          it = datasets.emplace(path, gfd::load_manifest(path)).first;
        return it->second;
      };
      const auto seg = resolve_segmentation(cfg, dataset_of(cfg.transfer_pairs.front().first));
      domain_cfg.segmentation_mode = gfd::SegmentationMode::fixed;
      domain_cfg.window = seg.window;
      domain_cfg.step = seg.step;

      std::map<std::string, gfd::PreparedFeatures> prepared;
      auto prep_of = [&](const std::string& path) -> gfd::PreparedFeatures& {
        auto it = prepared.find(path);
        if (it == prepared.end()) {
          domain_cfg.manifest_path = path;
          it = prepared.emplace(path, gfd::prepare_features(domain_cfg, dataset_of(path))).first;
        }
        return it->second;
      };

      gfd::TrainConfig tc = cfg.train;
      tc.seed = gfd::derive_seed(cfg.seed, "transfer");

      std::string csv = "source,target,mode,accuracy,macro_f1,weighted_f1\n";
      for (const auto& [src, dst] : cfg.transfer_pairs) {
        const auto& s = prep_of(src);
        const auto& t = prep_of(dst);
        for (const auto mode : {gfd::TransferMode::zero_shot, gfd::TransferMode::augmented_refit}) {
          const auto r =
              gfd::transfer_run(s.final_z, s.labels, t.final_z, t.labels, tc, mode);
          csv += src + ',' + dst + ',' +
                 (mode == gfd::TransferMode::zero_shot ? "zero_shot" : "augmented_refit") + ',' +
                 fmt(r.accuracy) + ',' + fmt(r.macro_f1) + ',' + fmt(r.weighted_f1) + '\n';
        }
      }
      emit(o->out, csv);
    };
  });
}

void setup_noise_sweep(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    ConfigArgs cfg;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("noise-sweep", "cross-validated accuracy under feature noise");
  o->cfg.attach(cmd);
  cmd->add_option("--out", o->out, "result CSV path (stdout when omitted)");
  cmd->callback([o, &job] {
    job = [o] {
      const auto cfg = o->cfg.load();
      const auto ds = gfd::load_dataset(cfg);
      const auto prep = gfd::prepare_features(cfg, ds);
      gfd::TrainConfig tc = cfg.train;
      tc.seed = gfd::derive_seed(cfg.seed, "train");
      const auto points = gfd::noise_sweep(prep.final_z, prep.labels, tc, cfg.sigmas, cfg.folds,
                                           gfd::derive_seed(cfg.seed, "cv"));
      std::string csv = "sigma,cv_mean,cv_std\n";
      for (const auto& p : points)
        csv += fmt(p.sigma) + ',' + fmt(p.cv_mean) + ',' + fmt(p.cv_std) + '\n';
      emit(o->out, csv);
    };
  });
}

void setup_importance(CLI::App& app, std::function<void()>& job) {
  struct Opts {
    ConfigArgs cfg;
    std::string out;
    int repeats = 5;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("importance", "permutation importance on the held-out split");
  o->cfg.attach(cmd);
  cmd->add_option("--repeats", o->repeats, "permutations per feature");
  cmd->add_option("--out", o->out, "result CSV path (stdout when omitted)");
  cmd->callback([o, &job] {
    job = [o] {
      const auto cfg = o->cfg.load();
      const auto result = gfd::run_pipeline(cfg);
      const auto test_z = gfd::select_rows(result.prep.final_z, result.prep.split.test);
      const auto ranked = gfd::permutation_importance(result.model, test_z, test_z.labels,
                                                      o->repeats,
                                                      gfd::derive_seed(cfg.seed, "importance"));
      std::string csv = "feature,importance\n";
      for (const auto& fi : ranked) csv += fi.name + ',' + fmt(fi.importance) + '\n';
      emit(o->out, csv);
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-augmented fault diagnosis for rotating-machinery vibration signals"};
  app.require_subcommand(1);

  std::function<void()> job;
  setup_pipeline(app, job);
  setup_synth(app, job);
  setup_optimize_window(app, job);
  setup_extract(app, job);
  setup_cluster(app, job);
  setup_graph(app, job);
  setup_train(app, job);
  setup_evaluate(app, job);
  setup_cross_eval(app, job);
  setup_noise_sweep(app, job);
  setup_importance(app, job);

  CLI11_PARSE(app, argc, argv);

  try {
    if (job) job();
    return 0;
  } catch (const gfd::ConfigError& e) {
    std::cerr << "gfd: " << e.what() << "\n";
    return 2;
  } catch (const gfd::NumericError& e) {
    std::cerr << "gfd: " << e.what() << "\n";
    return 4;
  } catch (const gfd::Error& e) {
    std::cerr << "gfd: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "gfd: " << e.what() << "\n";
    return 1;
  }
}
