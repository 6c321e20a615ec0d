#ifndef GFD_PIPELINE_HPP
#define GFD_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gfd/clustering.hpp"
#include "gfd/config.hpp"
#include "gfd/eval.hpp"
#include "gfd/graph.hpp"
#include "gfd/model.hpp"

namespace gfd {

// Everything derived from a dataset up to the final classifier input matrix.
struct PreparedFeatures {
  SegmentationParams segmentation;
  FeatureMatrix final_z;  // augmented, fully standardized
  std::vector<int> labels;
  std::vector<std::string> class_names;
  SplitIndices split;  // 70/30 by default
  ClusterModel clusters;
  std::vector<Subgraph> subgraphs;
  GraphMetrics metrics;
  std::map<std::string, double> timing_s;
};

struct PipelineResult {
  PreparedFeatures prep;
  TrainedModel model;
  EvalReport report;  // on the held-out split; cv fields filled when folds >= 2
};

DatasetManifest load_dataset(const PipelineConfig& cfg);

// Segmentation, extraction, standardization, clustering, graph construction,
// metric aggregation, augmentation. Honors cfg.leakage (faithful: graphs over
// all rows before the split; strict: graphs over training rows only, test rows
// imputed through their assigned cluster).
PreparedFeatures prepare_features(const PipelineConfig& cfg, const DatasetManifest& dataset);

PipelineResult run_pipeline(const PipelineConfig& cfg);

// run_pipeline plus report.json, features.csv, edges.csv, model.json and
// timings.json in cfg.output_dir (all writes are temp-file + rename).
PipelineResult run_pipeline_to_dir(const PipelineConfig& cfg);

// The report.json payload for a finished run. Excludes wall-clock times so
// identical (config, seed) runs serialize identically.
std::string report_json(const PipelineConfig& cfg, const PipelineResult& result);

}  // namespace gfd

#endif
