#include "iotguard/typemodel.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iotguard/random.hpp"

namespace iotguard {

namespace {

constexpr std::string_view kModelSchema = "iotguard.model/1";

}  // namespace

TypeClassifier::TypeClassifier(DeviceTypeId type, std::vector<DecisionTree> trees,
                               ForestParams params, TrainingMeta meta)
    : type_(std::move(type)), trees_(std::move(trees)), params_(params), meta_(meta) {
  if (trees_.empty()) throw Error(ErrorCode::invalid_argument, "classifier needs >= 1 tree");
}

Prediction TypeClassifier::predict(const FixedFingerprint& fp) const {
  Prediction p;
  for (const auto& tree : trees_) p.votes += tree.predict(fp.values) ? 1 : 0;
  p.score = static_cast<double>(p.votes) / static_cast<double>(trees_.size());
  p.match = 2 * p.votes >= trees_.size();
  return p;
}

Prediction TypeClassifier::predict_values(std::span<const std::int32_t> values) const {
  if (values.size() != kFixedLength) {
    throw Error(ErrorCode::dimension_mismatch,
                "expected 276 values, got " + std::to_string(values.size()));
  }
  FixedFingerprint fp;
  std::copy(values.begin(), values.end(), fp.values.begin());
  return predict(fp);
}

TypeClassifier train_type_classifier(const DeviceTypeId& type,
                                     std::span<const FixedFingerprint* const> positives,
                                     std::span<const FixedFingerprint* const> negatives_pool,
                                     const ForestParams& params, std::uint64_t seed, Exec exec) {
  const std::size_t n = positives.size();
  if (n < 2) throw Error(ErrorCode::insufficient_data, type.str() + ": need >= 2 positives");
  const std::size_t n_neg = kNegativesPerPositive * n;
  if (negatives_pool.size() < n_neg) {
    throw Error(ErrorCode::insufficient_data,
                type.str() + ": negative pool smaller than 10 x positives");
  }

  TrainingSet data;
  data.rows.reserve(n + n_neg);
  for (const auto* p : positives) {
    data.rows.push_back(&p->values);
    data.labels.push_back(1);
  }
  Rng rng(derive_seed(seed, {0}));
  for (std::size_t i : rng.sample_without_replacement(negatives_pool.size(), n_neg)) {
    data.rows.push_back(&negatives_pool[i]->values);
    data.labels.push_back(0);
  }

  auto trees = train_forest(data, params, derive_seed(seed, {1}), exec);
  return TypeClassifier(type, std::move(trees), params, TrainingMeta{n, n_neg, seed});
}

TypeClassifier train_type_classifier(const DeviceTypeId& type,
                                     std::span<const FixedFingerprint> positives,
                                     std::span<const FixedFingerprint> negatives_pool,
                                     const ForestParams& params, std::uint64_t seed, Exec exec) {
  std::vector<const FixedFingerprint*> pos, neg;
  for (const auto& p : positives) pos.push_back(&p);
  for (const auto& p : negatives_pool) neg.push_back(&p);
  return train_type_classifier(type, pos, neg, params, seed, exec);
}

void ClassifierRegistry::add(TypeClassifier clf) {
  const DeviceTypeId type = clf.device_type();
  if (!classifiers_.try_emplace(type, std::move(clf)).second) {
    throw Error(ErrorCode::duplicate_type, "classifier already registered for " + type.str());
  }
}

const TypeClassifier& ClassifierRegistry::at(const DeviceTypeId& type) const {
  auto it = classifiers_.find(type);
  if (it == classifiers_.end()) {
    throw Error(ErrorCode::invalid_argument, "no classifier for " + type.str());
  }
  return it->second;
}

std::vector<DeviceTypeId> ClassifierRegistry::types() const {
  std::vector<DeviceTypeId> out;
  out.reserve(classifiers_.size());
  for (const auto& [type, clf] : classifiers_) out.push_back(type);
  return out;
}

std::vector<TypeMatch> ClassifierRegistry::predict_all(const FixedFingerprint& fp,
                                                       Exec exec) const {
  if (classifiers_.empty()) throw Error(ErrorCode::empty_registry, "registry is empty");
  std::vector<const TypeClassifier*> order;
  order.reserve(classifiers_.size());
  for (const auto& [type, clf] : classifiers_) order.push_back(&clf);

  std::vector<TypeMatch> out(order.size());
  for_each_index(exec, order.size(), [&](std::size_t i) {
    const Prediction p = order[i]->predict(fp);
    out[i] = TypeMatch{order[i]->device_type(), p.match, p.score};
  });
  return out;
}

std::string model_to_json(const ClassifierRegistry& reg) {
  using nlohmann::json;
  json doc;
  doc["schema"] = kModelSchema;
  json& list = doc["classifiers"] = json::array();
  for (const auto& [type, clf] : reg.classifiers()) {
    json trees = json::array();
    for (const auto& tree : clf.trees()) {
      json feature = json::array(), threshold = json::array(), left = json::array(),
           right = json::array(), in = json::array(), out = json::array();
      for (const auto& node : tree.nodes()) {
        feature.push_back(node.feature);
        threshold.push_back(node.threshold);
        left.push_back(node.left);
        right.push_back(node.right);
        in.push_back(node.votes_in);
        out.push_back(node.votes_out);
      }
      trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                       {"right", right}, {"votes_in", in}, {"votes_out", out}});
    }
    const auto& p = clf.params();
    const auto& m = clf.training_meta();
    list.push_back({
        {"device_type", type.str()},
        {"n_trees", clf.n_trees()},
        {"params",
         {{"n_trees", p.n_trees},
          {"features_per_node", p.features_per_node},
          {"bootstrap", p.bootstrap},
          {"min_samples_split", p.min_samples_split},
          {"max_depth", p.max_depth}}},
        {"training_meta",
         {{"n_positive", m.n_positive}, {"n_negative", m.n_negative}, {"seed", m.seed}}},
        {"trees", std::move(trees)},
    });
  }
  return doc.dump() + "\n";
}

ClassifierRegistry model_from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt_file, std::string("model: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_string() ||
      doc["schema"].get<std::string>() != kModelSchema) {
    const std::string got =
        doc.is_object() && doc.contains("schema") ? doc["schema"].dump() : "<none>";
    throw Error(ErrorCode::version_mismatch,
                "model: expected schema " + std::string(kModelSchema) + ", got " + got);
  }

  ClassifierRegistry reg;
  try {
    for (const auto& item : doc.at("classifiers")) {
      std::vector<DecisionTree> trees;
      for (const auto& t : item.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<std::int32_t>>();
        const auto right = t.at("right").get<std::vector<std::int32_t>>();
        const auto in = t.at("votes_in").get<std::vector<std::uint32_t>>();
        const auto out = t.at("votes_out").get<std::vector<std::uint32_t>>();
        const std::size_t n = feature.size();
        if (threshold.size() != n || left.size() != n || right.size() != n || in.size() != n ||
            out.size() != n) {
          throw Error(ErrorCode::corrupt_file, "model: tree arrays differ in length");
        }
        std::vector<DecisionTree::Node> nodes(n);
        for (std::size_t i = 0; i < n; ++i) {
          nodes[i] = {feature[i], threshold[i], left[i], right[i], in[i], out[i]};
        }
        trees.emplace_back(std::move(nodes));
      }
      const auto& p = item.at("params");
      ForestParams params;
      params.n_trees = p.at("n_trees").get<std::size_t>();
      params.features_per_node = p.at("features_per_node").get<std::size_t>();
      params.bootstrap = p.at("bootstrap").get<bool>();
      params.min_samples_split = p.at("min_samples_split").get<std::size_t>();
      params.max_depth = p.at("max_depth").get<std::size_t>();
      const auto& m = item.at("training_meta");
      TrainingMeta meta{m.at("n_positive").get<std::size_t>(),
                        m.at("n_negative").get<std::size_t>(),
                        m.at("seed").get<std::uint64_t>()};
      if (item.at("n_trees").get<std::size_t>() != trees.size()) {
        throw Error(ErrorCode::corrupt_file, "model: n_trees disagrees with tree list");
      }
      reg.add(TypeClassifier(DeviceTypeId(item.at("device_type").get<std::string>()),
                             std::move(trees), params, meta));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt_file, std::string("model: ") + e.what());
  }
  return reg;
}

void save_model(const ClassifierRegistry& reg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << model_to_json(reg);
}

ClassifierRegistry load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace iotguard
