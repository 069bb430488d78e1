#include "iotguard/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "iotguard/random.hpp"

namespace iotguard {

std::size_t ForestParams::effective_features_per_node() const {
  if (features_per_node != 0) return std::min(features_per_node, kFixedLength);
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(kFixedLength))));
}

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::corrupt_file, "tree: " + why); };
  if (nodes_.empty()) bad("no nodes");
  std::vector<int> refs(nodes_.size(), 0);
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (node.feature != -1 || node.left != -1 || node.right != -1) bad("malformed leaf");
      continue;
    }
    if (node.feature >= static_cast<std::int32_t>(kFixedLength)) bad("feature index out of range");
    if (node.left <= i || node.left >= n || node.right <= i || node.right >= n ||
        node.left == node.right) {
      bad("child index out of range");
    }
    ++refs[static_cast<std::size_t>(node.left)];
    ++refs[static_cast<std::size_t>(node.right)];
  }
  if (refs[0] != 0) bad("root has a parent");
  for (std::size_t i = 1; i < refs.size(); ++i) {
    if (refs[i] != 1) bad("node " + std::to_string(i) + " is not referenced exactly once");
  }
}

bool DecisionTree::predict(std::span<const std::int32_t, kFixedLength> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const Node& node = nodes_[i];
    const double v = x[static_cast<std::size_t>(node.feature)];
    i = static_cast<std::size_t>(v <= node.threshold ? node.left : node.right);
  }
  return nodes_[i].votes_in >= nodes_[i].votes_out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // sum over children of (p^2 + q^2) / n; larger is purer
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestParams& params, std::uint64_t seed)
      : data_(data), params_(params), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = data_.rows.size();
    std::vector<std::uint32_t> idx(n);
    if (params_.bootstrap) {
      for (auto& i : idx) i = static_cast<std::uint32_t>(rng_.uniform_index(n));
    } else {
      std::iota(idx.begin(), idx.end(), 0u);
    }

    struct Pending {
      std::size_t node, begin, end, depth;
    };
    std::vector<DecisionTree::Node> nodes(1);
    std::vector<Pending> stack{{0, 0, n, 0}};
    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();

      std::uint32_t pos = 0;
      for (std::size_t k = job.begin; k < job.end; ++k) pos += data_.labels[idx[k]];
      const auto count = static_cast<std::uint32_t>(job.end - job.begin);
      nodes[job.node].votes_in = pos;
      nodes[job.node].votes_out = count - pos;

      const bool pure = pos == 0 || pos == count;
      const bool too_deep = params_.max_depth != 0 && job.depth >= params_.max_depth;
      if (pure || too_deep || count < params_.min_samples_split) continue;

      const Split split = best_split(idx, job.begin, job.end);
      if (split.feature < 0) continue;

      const auto f = static_cast<std::size_t>(split.feature);
      const auto mid = std::partition(
          idx.begin() + static_cast<std::ptrdiff_t>(job.begin),
          idx.begin() + static_cast<std::ptrdiff_t>(job.end),
          [&](std::uint32_t r) { return (*data_.rows[r])[f] <= split.threshold; });
      const auto cut = static_cast<std::size_t>(mid - idx.begin());

      const auto left = static_cast<std::int32_t>(nodes.size());
      nodes.resize(nodes.size() + 2);
      auto& parent = nodes[job.node];
      parent.feature = split.feature;
      parent.threshold = split.threshold;
      parent.left = left;
      parent.right = left + 1;
      stack.push_back({static_cast<std::size_t>(left + 1), cut, job.end, job.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), job.begin, cut, job.depth + 1});
    }
    return DecisionTree(std::move(nodes));
  }

 private:
  // Visits features in random order until `mtry` non-constant ones have
  // been scored, or none are left.
  Split best_split(const std::vector<std::uint32_t>& idx, std::size_t begin, std::size_t end) {
    const std::size_t mtry = params_.effective_features_per_node();
    std::array<std::int32_t, kFixedLength> order;
    std::iota(order.begin(), order.end(), 0);

    Split best;
    std::size_t scored = 0;
    for (std::size_t j = 0; j < kFixedLength && scored < mtry; ++j) {
      std::swap(order[j], order[j + rng_.uniform_index(kFixedLength - j)]);
      const auto f = static_cast<std::size_t>(order[j]);

      values_.clear();
      for (std::size_t k = begin; k < end; ++k) {
        values_.emplace_back((*data_.rows[idx[k]])[f], data_.labels[idx[k]]);
      }
      const auto [lo, hi] = std::minmax_element(
          values_.begin(), values_.end(), [](auto& a, auto& b) { return a.first < b.first; });
      if (lo->first == hi->first) continue;
      ++scored;

      std::sort(values_.begin(), values_.end());
      const double total = static_cast<double>(values_.size());
      double total_pos = 0;
      for (auto& v : values_) total_pos += v.second;

      double left_n = 0, left_pos = 0;
      for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
        left_n += 1;
        left_pos += values_[k].second;
        if (values_[k].first == values_[k + 1].first) continue;
        const double right_n = total - left_n;
        const double right_pos = total_pos - left_pos;
        const double left_neg = left_n - left_pos;
        const double right_neg = right_n - right_pos;
        const double score = (left_pos * left_pos + left_neg * left_neg) / left_n +
                             (right_pos * right_pos + right_neg * right_neg) / right_n;
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = (static_cast<double>(values_[k].first) + values_[k + 1].first) / 2.0;
        }
      }
    }
    return best;
  }

  const TrainingSet& data_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<std::pair<std::int32_t, std::uint8_t>> values_;
};

}  // namespace

DecisionTree train_tree(const TrainingSet& data, const ForestParams& params, std::uint64_t seed) {
  if (data.rows.empty() || data.rows.size() != data.labels.size()) {
    throw Error(ErrorCode::insufficient_data, "training set is empty or inconsistent");
  }
  return TreeBuilder(data, params, seed).build();
}

std::vector<DecisionTree> train_forest(const TrainingSet& data, const ForestParams& params,
                                       std::uint64_t seed, Exec exec) {
  if (params.n_trees == 0) throw Error(ErrorCode::invalid_argument, "n_trees must be >= 1");
  std::vector<DecisionTree> trees(params.n_trees);
  for_each_index(exec, params.n_trees, [&](std::size_t t) {
    trees[t] = train_tree(data, params, derive_seed(seed, {t}));
  });
  return trees;
}

}  // namespace iotguard
