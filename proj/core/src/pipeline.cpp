#include "gfd/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <type_traits>

#include <json.hpp>

#include "gfd/errors.hpp"
#include "gfd/features.hpp"
#include "gfd/rng.hpp"

namespace gfd {

namespace {

using nlohmann::json;

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

  template <typename F>
  auto run(const std::string& stage, F&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto out = fn();
        record(stage, start);
        return out;
      }
    } catch (const ConfigError& e) {
      throw ConfigError("stage '" + stage + "': " + e.what());
    } catch (const DataError& e) {
      throw DataError("stage '" + stage + "': " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("stage '" + stage + "': " + e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const auto end = std::chrono::steady_clock::now();
    sink_[stage] += std::chrono::duration<double>(end - start).count();
  }

  std::map<std::string, double>& sink_;
};

// NaN metric values serialize as JSON null.
json metrics_to_json(const GraphMetrics& m) {
  json subs = json::array();
  for (const auto& s : m.per_subgraph) {
    subs.push_back({{"L", s.path_length},
                    {"Q", s.modularity},
                    {"gap", s.spectral_gap},
                    {"nodes", s.nodes},
                    {"edges", s.edges}});
  }
  return {{"L", m.l_avg},
          {"Q", m.q_mod},
          {"gap", m.delta_spec},
          {"d_avg", m.d_avg},
          {"L_exp_sw", m.l_exp_sw},
          {"subgraphs", subs}};
}

void atomic_write(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

// standardize a suffix of columns in place, fitting on fit_rows
void standardize_columns(FeatureMatrix& m, std::size_t first_col,
                         std::span<const std::size_t> fit_rows) {
  for (std::size_t c = first_col; c < m.cols; ++c) {
    double mean = 0.0;
    for (std::size_t r : fit_rows) mean += m.at(r, c);
    mean /= static_cast<double>(fit_rows.size());
    double var = 0.0;
    for (std::size_t r : fit_rows) {
      const double d = m.at(r, c) - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(fit_rows.size()));
    for (std::size_t r = 0; r < m.rows; ++r) {
      m.at(r, c) = sd < 1e-12 ? 0.0 : (m.at(r, c) - mean) / sd;
    }
  }
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

DatasetManifest load_dataset(const PipelineConfig& cfg) {
  if (cfg.dataset_mode == DatasetMode::manifest) return load_manifest(cfg.manifest_path);
  return synth_dataset(cfg.synth, derive_seed(cfg.seed, "synth"));
}

PreparedFeatures prepare_features(const PipelineConfig& cfg, const DatasetManifest& dataset) {
  PreparedFeatures prep;
  StageTimer timer(prep.timing_s);
  prep.class_names = dataset.class_names;

  prep.segmentation = timer.run("segmentation", [&] {
    if (cfg.segmentation_mode == SegmentationMode::fixed)
      return SegmentationParams{cfg.window, cfg.step, 0.0};
    return optimize_window_dataset(dataset, cfg.space, cfg.weights, cfg.max_segments);
  });

  FeatureMatrix raw = timer.run("extraction", [&] {
    return extract_all(dataset, {prep.segmentation.window, prep.segmentation.step});
  });
  prep.labels = raw.labels;

  timer.run("graph", [&] {
    const bool strict = cfg.leakage == LeakageMode::strict;
    prep.split = stratified_split(prep.labels, cfg.test_fraction, derive_seed(cfg.seed, "split"));
    const auto fit_rows = strict ? prep.split.train : all_rows(raw.rows);

    const auto standardizer = standardize_fit(raw, fit_rows);
    FeatureMatrix z = standardize_apply(raw, standardizer);

    // cluster on the fit rows, assign everything
    const auto fit_z = strict ? select_rows(z, fit_rows) : z;
    const std::size_t k_c =
        cfg.clusters > 0 ? cfg.clusters : default_cluster_count(fit_z.rows, cfg.n_max);
    prep.clusters = minibatch_kmeans(fit_z, k_c, cfg.batch_size, cfg.kmeans_iters,
                                     derive_seed(cfg.seed, "kmeans"));
    const auto assignment = assign_clusters(prep.clusters, z);

    // graphs per cluster over the fit rows only; clusters below 2 rows drop out
    std::vector<std::vector<int>> members(k_c);
    for (std::size_t r : fit_rows)
      members[static_cast<std::size_t>(assignment[r])].push_back(static_cast<int>(r));

    std::unordered_map<int, int> row_to_subgraph;
    std::vector<int> cluster_of_subgraph;
    for (std::size_t c = 0; c < k_c; ++c) {
      if (members[c].size() < 2) {
        for (int r : members[c]) row_to_subgraph[r] = -1;
        continue;
      }
      const auto graph = build_knn_graph(z, members[c], cfg.k_max, cfg.tau_percentile);
      auto subs = split_subgraphs(graph, cfg.n_max, static_cast<int>(c));
      for (auto& sg : subs) {
        const int idx = static_cast<int>(prep.subgraphs.size());
        for (int node : sg.node_ids) row_to_subgraph[node] = idx;
        cluster_of_subgraph.push_back(static_cast<int>(c));
        prep.subgraphs.push_back(std::move(sg));
      }
    }
    if (prep.subgraphs.empty())
      throw NoEligibleSubgraphs("prepare_features: every cluster has fewer than 2 rows");

    prep.metrics = aggregate_system_metrics(prep.subgraphs, prep.labels, cfg.path_cost);

    if (!strict) {
      prep.final_z = augment_feature_matrix(z, prep.metrics, row_to_subgraph, cfg.scope);
    } else {
      // test rows never joined a graph: impute through their assigned cluster
      const double sys[3] = {prep.metrics.l_avg, prep.metrics.q_mod, prep.metrics.delta_spec};
      auto defined = [](double v) { return !std::isnan(v); };
      auto fallback = [&](double v, int i) {
        if (defined(v)) return v;
        return defined(sys[i]) ? sys[i] : 0.0;
      };

      std::vector<std::array<double, 3>> cluster_mean(k_c);
      for (std::size_t c = 0; c < k_c; ++c) {
        double sum[3] = {0, 0, 0};
        std::size_t cnt[3] = {0, 0, 0};
        for (std::size_t s = 0; s < prep.subgraphs.size(); ++s) {
          if (cluster_of_subgraph[s] != static_cast<int>(c)) continue;
          const auto& sm = prep.metrics.per_subgraph[s];
          const double v[3] = {sm.path_length, sm.modularity, sm.spectral_gap};
          for (int i = 0; i < 3; ++i) {
            if (defined(v[i])) {
              sum[i] += v[i];
              ++cnt[i];
            }
          }
        }
        for (int i = 0; i < 3; ++i)
          cluster_mean[c][i] = cnt[i] ? sum[i] / static_cast<double>(cnt[i])
                                      : fallback(std::nan(""), i);
      }

      prep.final_z = z;
      prep.final_z.cols = z.cols + 3;
      prep.final_z.names.insert(prep.final_z.names.end(), {"graph_L", "graph_Q", "graph_gap"});
      prep.final_z.values.assign(prep.final_z.rows * prep.final_z.cols, 0.0);
      for (std::size_t r = 0; r < z.rows; ++r) {
        double triple[3];
        if (cfg.scope == AugmentScope::global) {
          for (int i = 0; i < 3; ++i) triple[i] = fallback(sys[i], i);
        } else {
          const auto it = row_to_subgraph.find(static_cast<int>(r));
          if (it != row_to_subgraph.end() && it->second >= 0) {
            const auto& sm = prep.metrics.per_subgraph[static_cast<std::size_t>(it->second)];
            triple[0] = fallback(sm.path_length, 0);
            triple[1] = fallback(sm.modularity, 1);
            triple[2] = fallback(sm.spectral_gap, 2);
          } else {
            const auto& cm = cluster_mean[static_cast<std::size_t>(assignment[r])];
            for (int i = 0; i < 3; ++i) triple[i] = cm[i];
          }
        }
        const double* src = z.values.data() + r * z.cols;
        double* dst = prep.final_z.values.data() + r * prep.final_z.cols;
        std::copy(src, src + z.cols, dst);
        for (int i = 0; i < 3; ++i) dst[z.cols + i] = triple[i];
      }
    }

    // appended metric columns join the standardized scale
    standardize_columns(prep.final_z, z.cols, fit_rows);
  });

  return prep;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult result;
  auto dataset = load_dataset(cfg);
  result.prep = prepare_features(cfg, dataset);
  StageTimer timer(result.prep.timing_s);

  auto& prep = result.prep;
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = derive_seed(cfg.seed, "train");

  result.model = timer.run("train", [&] {
    const auto train_z = select_rows(prep.final_z, prep.split.train);
    return train_model(train_z, train_z.labels, train_cfg);
  });

  result.report = timer.run("inference", [&] {
    const auto test_z = select_rows(prep.final_z, prep.split.test);
    const auto pred = predict(result.model, test_z);
    int num_classes = static_cast<int>(prep.class_names.size());
    for (int c : prep.labels) num_classes = std::max(num_classes, c + 1);
    return classification_report(test_z.labels, pred.labels, num_classes);
  });

  if (cfg.folds >= 2) {
    timer.run("cross_validation", [&] {
      const auto cv = cross_validate(prep.final_z, prep.labels, train_cfg, cfg.folds,
                                     derive_seed(cfg.seed, "cv"));
      result.report.has_cv = true;
      result.report.cv_mean = cv.mean;
      result.report.cv_std = cv.stddev;
    });
  }
  result.report.timing_s = result.prep.timing_s;
  return result;
}

std::string report_json(const PipelineConfig& cfg, const PipelineResult& result) {
  const auto& prep = result.prep;
  json doc;
  doc["class_names"] = prep.class_names;
  doc["rows"] = prep.final_z.rows;
  doc["feature_count"] = prep.final_z.cols;
  doc["seed"] = cfg.seed;
  doc["mode"] = cfg.leakage == LeakageMode::strict ? "strict" : "faithful";
  doc["scope"] = cfg.scope == AugmentScope::global ? "global" : "subgraph";
  doc["segmentation"] = {{"window", prep.segmentation.window},
                         {"step", prep.segmentation.step},
                         {"score", prep.segmentation.score}};
  auto graph = metrics_to_json(prep.metrics);
  graph["k_max"] = cfg.k_max;
  graph["N_max"] = cfg.n_max;
  graph["clusters"] = prep.clusters.k;
  doc["graph"] = std::move(graph);
  doc["evaluation"] = json::parse(eval_report_json(result.report));
  return doc.dump(2) + "\n";
}

PipelineResult run_pipeline_to_dir(const PipelineConfig& cfg) {
  auto result = run_pipeline(cfg);
  const auto& prep = result.prep;

  std::filesystem::create_directories(cfg.output_dir);
  atomic_write(cfg.output_dir / "report.json", report_json(cfg, result));

  FeatureMatrix with_labels = prep.final_z;
  with_labels.labels = prep.labels;
  write_feature_csv(with_labels, cfg.output_dir / "features.csv");

  {
    std::string edges = "u,v,w\n";
    char buf[64];
    for (const auto& sg : prep.subgraphs) {
      for (const auto& e : sg.edges) {
        edges += std::to_string(sg.node_ids[static_cast<std::size_t>(e.u)]);
        edges += ',';
        edges += std::to_string(sg.node_ids[static_cast<std::size_t>(e.v)]);
        edges += ',';
        const int len = std::snprintf(buf, sizeof buf, "%.17g", e.w);
        edges.append(buf, static_cast<std::size_t>(len));
        edges += '\n';
      }
    }
    atomic_write(cfg.output_dir / "edges.csv", edges);
  }

  save_model(result.model, cfg.output_dir / "model.json");

  {
    json timings(result.prep.timing_s);
    atomic_write(cfg.output_dir / "timings.json", timings.dump(2) + "\n");
  }
  return result;
}

}  // namespace gfd
