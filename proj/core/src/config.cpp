#include "gfd/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gfd/errors.hpp"

namespace gfd {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected number, got '" + v + "'");
  }
}

long long to_int(const std::string& v, const std::string& key) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": expected integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": expected unsigned integer, got '" + v + "'");
  return out;
}

SynthClassSpec parse_synth_class(const std::string& item) {
  // name:impulse_rate_hz:amplitude:resonance_hz:decay_rate
  const auto parts = split_list(item, ':');
  if (parts.size() != 5)
    throw ConfigError("dataset.classes: expected name:rate:amplitude:resonance:decay, got '" +
                      item + "'");
  SynthClassSpec c;
  c.name = parts[0];
  c.impulse_rate_hz = to_double(parts[1], "dataset.classes");
  c.impulse_amplitude = to_double(parts[2], "dataset.classes");
  c.resonance_hz = to_double(parts[3], "dataset.classes");
  c.decay_rate = to_double(parts[4], "dataset.classes");
  return c;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& context) {
  PipelineConfig cfg;
  bool seed_seen = false;

  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const std::string where = context + ":" + std::to_string(lineno);

    if (stripped.front() == '[') {
      if (stripped.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section != "dataset" && section != "segmentation" && section != "graph" &&
          section != "model" && section != "eval" && section != "output")
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }

    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    const std::string qual = section.empty() ? key : section + "." + key;

    if (section.empty()) {
      if (key == "seed") {
        cfg.seed = to_u64(value, qual);
        seed_seen = true;
      } else {
        throw ConfigError(where + ": unknown key '" + key + "'");
      }
    } else if (section == "dataset") {
      if (key == "mode") {
        if (value == "manifest")
          cfg.dataset_mode = DatasetMode::manifest;
        else if (value == "synth")
          cfg.dataset_mode = DatasetMode::synth;
        else
          throw ConfigError(qual + ": expected manifest|synth");
      } else if (key == "manifest") {
        cfg.manifest_path = value;
      } else if (key == "duration_s") {
        cfg.synth.duration_s = to_double(value, qual);
      } else if (key == "sample_rate_hz") {
        cfg.synth.sample_rate_hz = to_double(value, qual);
      } else if (key == "channels") {
        cfg.synth.channels = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "noise_std") {
        cfg.synth.noise_std = to_double(value, qual);
      } else if (key == "records_per_class") {
        cfg.synth.records_per_class = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "classes") {
        cfg.synth.classes.clear();
        for (const auto& item : split_list(value, ','))
          cfg.synth.classes.push_back(parse_synth_class(item));
      } else if (key == "format") {
        if (value != "csv" && value != "raw") throw ConfigError(qual + ": expected csv|raw");
        cfg.synth_format = value;
      } else {
        throw ConfigError(where + ": unknown key '" + qual + "'");
      }
    } else if (section == "segmentation") {
      if (key == "mode") {
        if (value == "optimize")
          cfg.segmentation_mode = SegmentationMode::optimize;
        else if (value == "fixed")
          cfg.segmentation_mode = SegmentationMode::fixed;
        else
          throw ConfigError(qual + ": expected optimize|fixed");
      } else if (key == "window") {
        cfg.window = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "step") {
        cfg.step = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "window_sizes") {
        cfg.space.window_sizes.clear();
        for (const auto& item : split_list(value, ','))
          cfg.space.window_sizes.push_back(static_cast<std::size_t>(to_int(item, qual)));
      } else if (key == "overlap_ratios") {
        cfg.space.overlap_ratios.clear();
        for (const auto& item : split_list(value, ','))
          cfg.space.overlap_ratios.push_back(to_double(item, qual));
      } else if (key == "alpha") {
        cfg.weights.alpha = to_double(value, qual);
      } else if (key == "alpha_t") {
        cfg.weights.alpha_t = to_double(value, qual);
      } else if (key == "alpha_s") {
        cfg.weights.alpha_s = to_double(value, qual);
      } else if (key == "max_segments") {
        cfg.max_segments = static_cast<std::size_t>(to_int(value, qual));
      } else {
        throw ConfigError(where + ": unknown key '" + qual + "'");
      }
    } else if (section == "graph") {
      if (key == "k_max") {
        cfg.k_max = static_cast<int>(to_int(value, qual));
      } else if (key == "n_max") {
        cfg.n_max = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "tau_percentile") {
        cfg.tau_percentile = to_double(value, qual);
      } else if (key == "clusters") {
        cfg.clusters = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "batch_size") {
        cfg.batch_size = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "kmeans_iters") {
        cfg.kmeans_iters = static_cast<std::size_t>(to_int(value, qual));
      } else if (key == "scope") {
        if (value == "subgraph")
          cfg.scope = AugmentScope::subgraph;
        else if (value == "global")
          cfg.scope = AugmentScope::global;
        else
          throw ConfigError(qual + ": expected subgraph|global");
      } else if (key == "leakage") {
        if (value == "faithful")
          cfg.leakage = LeakageMode::faithful;
        else if (value == "strict")
          cfg.leakage = LeakageMode::strict;
        else
          throw ConfigError(qual + ": expected faithful|strict");
      } else if (key == "path_cost") {
        if (value == "similarity")
          cfg.path_cost = PathCost::similarity;
        else if (value == "inverse_similarity")
          cfg.path_cost = PathCost::inverse_similarity;
        else
          throw ConfigError(qual + ": expected similarity|inverse_similarity");
      } else {
        throw ConfigError(where + ": unknown key '" + qual + "'");
      }
    } else if (section == "model") {
      if (key == "kind") {
        if (value == "softmax")
          cfg.train.kind = ModelKind::softmax;
        else if (value == "random_forest")
          cfg.train.kind = ModelKind::random_forest;
        else if (value == "linear_svm")
          cfg.train.kind = ModelKind::linear_svm;
        else
          throw ConfigError(qual + ": expected softmax|random_forest|linear_svm");
      } else if (key == "lambda") {
        cfg.train.lambda = to_double(value, qual);
      } else if (key == "epochs") {
        cfg.train.epochs = static_cast<int>(to_int(value, qual));
      } else if (key == "learning_rate") {
        cfg.train.learning_rate = to_double(value, qual);
      } else if (key == "trees") {
        cfg.train.trees = static_cast<int>(to_int(value, qual));
      } else if (key == "max_depth") {
        cfg.train.max_depth = static_cast<int>(to_int(value, qual));
      } else if (key == "min_leaf") {
        cfg.train.min_leaf = static_cast<int>(to_int(value, qual));
      } else if (key == "features_per_split") {
        if (value == "sqrt") {
          cfg.train.features_per_split = FeatureSubset::sqrt_count;
        } else if (value == "all") {
          cfg.train.features_per_split = FeatureSubset::all;
        } else {
          cfg.train.features_per_split = FeatureSubset::fixed;
          cfg.train.fixed_features = static_cast<int>(to_int(value, qual));
        }
      } else {
        throw ConfigError(where + ": unknown key '" + qual + "'");
      }
    } else if (section == "eval") {
      if (key == "test_fraction") {
        cfg.test_fraction = to_double(value, qual);
      } else if (key == "folds") {
        cfg.folds = static_cast<int>(to_int(value, qual));
      } else if (key == "sigmas") {
        cfg.sigmas.clear();
        for (const auto& item : split_list(value, ','))
          cfg.sigmas.push_back(to_double(item, qual));
      } else if (key == "transfer_pairs") {
        cfg.transfer_pairs.clear();
        for (const auto& pair : split_list(value, ';')) {
          const auto gt = pair.find('>');
          if (gt == std::string::npos)
            throw ConfigError(qual + ": expected source>target, got '" + pair + "'");
          cfg.transfer_pairs.emplace_back(trim(pair.substr(0, gt)), trim(pair.substr(gt + 1)));
        }
      } else {
        throw ConfigError(where + ": unknown key '" + qual + "'");
      }
    } else if (section == "output") {
      if (key == "dir") {
        cfg.output_dir = value;
      } else {
        throw ConfigError(where + ": unknown key '" + qual + "'");
      }
    }
  }

  if (!seed_seen) throw ConfigError(context + ": missing top-level 'seed'");
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0)
    throw ConfigError("eval.test_fraction: must lie in (0, 1)");
  if (cfg.folds < 2) throw ConfigError("eval.folds: must be at least 2");
  for (double s : cfg.sigmas) {
    if (s < 0.0) throw ConfigError("eval.sigmas: must be non-negative");
  }
  if (cfg.k_max < 1) throw ConfigError("graph.k_max: must be positive");
  if (cfg.n_max < 1) throw ConfigError("graph.n_max: must be positive");
  if (cfg.tau_percentile <= 0.0 || cfg.tau_percentile > 100.0)
    throw ConfigError("graph.tau_percentile: must lie in (0, 100]");
  if (cfg.segmentation_mode == SegmentationMode::fixed && (cfg.window == 0 || cfg.step == 0))
    throw ConfigError("segmentation: fixed mode needs window and step");
  if (cfg.train.epochs < 1) throw ConfigError("model.epochs: must be positive");
  if (cfg.train.learning_rate <= 0.0) throw ConfigError("model.learning_rate: must be positive");
  if (cfg.train.lambda < 0.0) throw ConfigError("model.lambda: must be non-negative");
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto cfg = parse_config(buffer.str(), path.string());

  // referenced paths must exist up front, resolved against the config location
  const auto base = path.parent_path();
  auto resolve = [&](const std::filesystem::path& p) {
    return p.is_relative() ? base / p : p;
  };
  if (cfg.dataset_mode == DatasetMode::manifest) {
    if (cfg.manifest_path.empty())
      throw ConfigError("dataset.manifest: required when dataset.mode = manifest");
    cfg.manifest_path = resolve(cfg.manifest_path);
    if (!std::filesystem::exists(cfg.manifest_path))
      throw ConfigError("dataset.manifest: no such file: " + cfg.manifest_path.string());
  } else if (cfg.synth.classes.empty()) {
    throw ConfigError("dataset.classes: required when dataset.mode = synth");
  }
  for (auto& [src, dst] : cfg.transfer_pairs) {
    const auto sp = resolve(src), dp = resolve(dst);
    if (!std::filesystem::exists(sp))
      throw ConfigError("eval.transfer_pairs: no such file: " + sp.string());
    if (!std::filesystem::exists(dp))
      throw ConfigError("eval.transfer_pairs: no such file: " + dp.string());
    src = sp.string();
    dst = dp.string();
  }
  cfg.output_dir = resolve(cfg.output_dir);
  return cfg;
}

}  // namespace gfd
