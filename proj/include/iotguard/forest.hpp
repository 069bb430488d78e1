#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "iotguard/fingerprint.hpp"
#include "iotguard/parallel.hpp"

namespace iotguard {

using FeatureVector = std::array<std::int32_t, kFixedLength>;

struct ForestParams {
  std::size_t n_trees = 100;
  // Features examined per node; 0 means ceil(sqrt(276)) = 17.
  std::size_t features_per_node = 0;
  bool bootstrap = true;
  std::size_t min_samples_split = 2;
  // 0 = grow until pure.
  std::size_t max_depth = 0;

  std::size_t effective_features_per_node() const;
  bool operator==(const ForestParams&) const = default;
};

// Binary CART tree stored as a flat node array, root at 0. Children always
// have a larger index than their parent.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t votes_in = 0;   // training samples of the positive class
    std::uint32_t votes_out = 0;  // and of the negative class

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  DecisionTree() = default;
  // Throws corrupt_file if the node array is not a well-formed tree.
  explicit DecisionTree(std::vector<Node> nodes);

  bool predict(std::span<const std::int32_t, kFixedLength> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

struct TrainingSet {
  std::vector<const FeatureVector*> rows;
  std::vector<std::uint8_t> labels;  // 1 = positive class
};

DecisionTree train_tree(const TrainingSet& data, const ForestParams& params, std::uint64_t seed);

// Tree t is grown from derive_seed(seed, {t}), so the result does not
// depend on exec.
std::vector<DecisionTree> train_forest(const TrainingSet& data, const ForestParams& params,
                                       std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace iotguard
