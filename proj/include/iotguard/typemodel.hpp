#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "iotguard/fingerprint.hpp"
#include "iotguard/forest.hpp"
#include "iotguard/parallel.hpp"

namespace iotguard {

// Negatives drawn per positive when training a type's classifier.
inline constexpr std::size_t kNegativesPerPositive = 10;

struct TrainingMeta {
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::uint64_t seed = 0;
  bool operator==(const TrainingMeta&) const = default;
};

struct Prediction {
  bool match = false;
  double score = 0.0;  // fraction of trees voting for the type
  std::size_t votes = 0;
};

// Binary forest answering "is this fingerprint of my device-type?".
class TypeClassifier {
 public:
  TypeClassifier(DeviceTypeId type, std::vector<DecisionTree> trees, ForestParams params,
                 TrainingMeta meta);

  const DeviceTypeId& device_type() const { return type_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t n_trees() const { return trees_.size(); }
  const ForestParams& params() const { return params_; }
  const TrainingMeta& training_meta() const { return meta_; }

  // A tie (score == 0.5) counts as a match.
  Prediction predict(const FixedFingerprint& fp) const;
  // Throws dimension_mismatch unless values.size() == 276.
  Prediction predict_values(std::span<const std::int32_t> values) const;

  bool operator==(const TypeClassifier&) const = default;

 private:
  DeviceTypeId type_;
  std::vector<DecisionTree> trees_;
  ForestParams params_;
  TrainingMeta meta_;
};

// Trains on every positive against exactly 10 * |positives| negatives drawn
// without replacement from the pool.
TypeClassifier train_type_classifier(const DeviceTypeId& type,
                                     std::span<const FixedFingerprint* const> positives,
                                     std::span<const FixedFingerprint* const> negatives_pool,
                                     const ForestParams& params, std::uint64_t seed,
                                     Exec exec = Exec::parallel);

TypeClassifier train_type_classifier(const DeviceTypeId& type,
                                     std::span<const FixedFingerprint> positives,
                                     std::span<const FixedFingerprint> negatives_pool,
                                     const ForestParams& params, std::uint64_t seed,
                                     Exec exec = Exec::parallel);

struct TypeMatch {
  DeviceTypeId device_type;
  bool match = false;
  double score = 0.0;
  bool operator==(const TypeMatch&) const = default;
};

// One classifier per device-type. Classifiers are immutable once added.
class ClassifierRegistry {
 public:
  // Throws duplicate_type if the type already has a classifier.
  void add(TypeClassifier clf);

  std::size_t size() const { return classifiers_.size(); }
  bool empty() const { return classifiers_.empty(); }
  bool contains(const DeviceTypeId& type) const { return classifiers_.contains(type); }
  const TypeClassifier& at(const DeviceTypeId& type) const;
  std::vector<DeviceTypeId> types() const;
  const std::map<DeviceTypeId, TypeClassifier>& classifiers() const { return classifiers_; }

  // Results for every registered type in id order.
  std::vector<TypeMatch> predict_all(const FixedFingerprint& fp, Exec exec = Exec::serial) const;

  bool operator==(const ClassifierRegistry&) const = default;

 private:
  std::map<DeviceTypeId, TypeClassifier> classifiers_;
};

std::string model_to_json(const ClassifierRegistry& reg);
ClassifierRegistry model_from_json(const std::string& text);
void save_model(const ClassifierRegistry& reg, const std::filesystem::path& path);
ClassifierRegistry load_model(const std::filesystem::path& path);

}  // namespace iotguard
