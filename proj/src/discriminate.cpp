#include "iotguard/discriminate.hpp"

#include <algorithm>
#include <numeric>

namespace iotguard {

std::size_t dl_distance(std::span<const PacketFeatures> a, std::span<const PacketFeatures> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;

  // Three rolling rows of the (n+1) x (m+1) table.
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      std::size_t d = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        d = std::min(d, prev2[j - 2] + 1);
      }
      cur[j] = d;
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

double normalized_distance(std::span<const PacketFeatures> a, std::span<const PacketFeatures> b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) throw Error(ErrorCode::both_empty, "both sequences are empty");
  return static_cast<double>(dl_distance(a, b)) / static_cast<double>(longest);
}

DissimilarityScore score_type(const Fingerprint& query, const DeviceTypeId& type,
                              std::span<const Fingerprint* const> refs) {
  if (refs.empty()) throw Error(ErrorCode::no_references, "no references for " + type.str());
  const std::size_t used = std::min(refs.size(), kRefsPerType);
  double sum = 0.0;
  for (std::size_t i = 0; i < used; ++i) sum += normalized_distance(query.columns, refs[i]->columns);
  if (used < kRefsPerType) sum *= kMaxDissimilarity / static_cast<double>(used);
  return {type, std::clamp(sum, 0.0, kMaxDissimilarity), used};
}

Discrimination discriminate(const Fingerprint& query, std::span<const Candidate> candidates,
                            Exec exec) {
  if (candidates.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "discrimination needs at least two candidates");
  }
  Discrimination out;
  out.scores.resize(candidates.size());
  for_each_index(exec, candidates.size(), [&](std::size_t i) {
    out.scores[i] = score_type(query, candidates[i].device_type, candidates[i].refs);
  });
  const auto best = std::min_element(
      out.scores.begin(), out.scores.end(), [](const auto& x, const auto& y) {
        if (x.score != y.score) return x.score < y.score;
        return x.device_type < y.device_type;
      });
  out.winner = best->device_type;
  return out;
}

}  // namespace iotguard
