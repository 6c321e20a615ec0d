#include <fstream>

#include <json.hpp>

#include "gfd/errors.hpp"
#include "gfd/model.hpp"

namespace gfd {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::softmax:
      return "softmax";
    case ModelKind::random_forest:
      return "random_forest";
    case ModelKind::linear_svm:
      return "linear_svm";
  }
  return "unknown";
}

ModelKind kind_from(const std::string& s) {
  if (s == "softmax") return ModelKind::softmax;
  if (s == "random_forest") return ModelKind::random_forest;
  if (s == "linear_svm") return ModelKind::linear_svm;
  throw DataError("load_model: unknown kind '" + s + "'");
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = kind_name(model.kind);
  doc["classes"] = model.classes;
  doc["feature_names"] = model.feature_names;
  doc["class_priors"] = model.class_priors;
  if (model.kind == ModelKind::random_forest) {
    json trees = json::array();
    for (const auto& tree : model.forest) {
      json nodes = json::array();
      for (const auto& tn : tree) {
        json n;
        n["feature"] = tn.feature;
        if (tn.feature >= 0) {
          n["threshold"] = tn.threshold;
          n["left"] = tn.left;
          n["right"] = tn.right;
        } else {
          n["counts"] = tn.counts;
        }
        nodes.push_back(std::move(n));
      }
      trees.push_back(std::move(nodes));
    }
    doc["forest"] = std::move(trees);
  } else {
    doc["weights"] = model.weights;
    doc["bias"] = model.bias;
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("save_model: cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_model: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("load_model: " + path.string() + ": " + e.what());
  }
  if (doc.at("format_version").get<int>() != kFormatVersion)
    throw DataError("load_model: unsupported format version");

  TrainedModel model;
  model.kind = kind_from(doc.at("kind").get<std::string>());
  model.classes = doc.at("classes").get<std::vector<int>>();
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  model.class_priors = doc.at("class_priors").get<std::vector<double>>();
  if (model.kind == ModelKind::random_forest) {
    for (const auto& tree : doc.at("forest")) {
      std::vector<TreeNode> nodes;
      for (const auto& n : tree) {
        TreeNode tn;
        tn.feature = n.at("feature").get<int>();
        if (tn.feature >= 0) {
          tn.threshold = n.at("threshold").get<double>();
          tn.left = n.at("left").get<int>();
          tn.right = n.at("right").get<int>();
        } else {
          tn.counts = n.at("counts").get<std::vector<double>>();
        }
        nodes.push_back(std::move(tn));
      }
      model.forest.push_back(std::move(nodes));
    }
  } else {
    model.weights = doc.at("weights").get<std::vector<double>>();
    model.bias = doc.at("bias").get<std::vector<double>>();
  }
  return model;
}

}  // namespace gfd
