#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace iotguard {

std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view text);

// Child seed for a (parent, path...) coordinate. Lets parallel work items
// draw independent streams without sharing an engine.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path);

// mt19937_64 plus distribution code of our own, so sequences are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Uniform in [0, 1).
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace iotguard
