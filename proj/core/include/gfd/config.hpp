#ifndef GFD_CONFIG_HPP
#define GFD_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gfd/graph.hpp"
#include "gfd/model.hpp"
#include "gfd/segmentation.hpp"
#include "gfd/signal.hpp"

namespace gfd {

enum class DatasetMode { manifest, synth };
enum class SegmentationMode { optimize, fixed };
enum class LeakageMode { faithful, strict };

struct PipelineConfig {
  std::uint64_t seed = 0;

  // [dataset]
  DatasetMode dataset_mode = DatasetMode::synth;
  std::filesystem::path manifest_path;
  SynthSpec synth;
  std::string synth_format = "csv";  // csv | raw

  // [segmentation]
  SegmentationMode segmentation_mode = SegmentationMode::optimize;
  std::size_t window = 0;
  std::size_t step = 0;
  SearchSpace space;
  EntropyWeights weights;
  std::size_t max_segments = 0;

  // [graph]
  int k_max = 5;
  std::size_t n_max = 200;
  double tau_percentile = 95.0;
  std::size_t clusters = 0;  // 0 = auto
  std::size_t batch_size = 256;
  std::size_t kmeans_iters = 100;
  AugmentScope scope = AugmentScope::subgraph;
  LeakageMode leakage = LeakageMode::faithful;
  PathCost path_cost = PathCost::similarity;

  // [model]
  TrainConfig train;

  // [eval]
  double test_fraction = 0.3;
  int folds = 5;
  std::vector<double> sigmas{0.0, 0.05, 0.1, 0.2, 0.5};
  std::vector<std::pair<std::string, std::string>> transfer_pairs;

  // [output]
  std::filesystem::path output_dir = "out";
};

// Flat INI: "[section]" headers, "key = value" lines, full-line comments
// starting with '#' or ';'. Lists are comma-separated. Unknown sections or
// keys are errors, as are missing referenced paths and a missing seed.
PipelineConfig load_config(const std::filesystem::path& path);

// Parse the same grammar from a string (path context only for messages).
PipelineConfig parse_config(const std::string& text, const std::string& context);

}  // namespace gfd

#endif
