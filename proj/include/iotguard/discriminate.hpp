#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iotguard/fingerprint.hpp"
#include "iotguard/parallel.hpp"

namespace iotguard {

// Reference fingerprints compared per candidate type.
inline constexpr std::size_t kRefsPerType = 5;
inline constexpr double kMaxDissimilarity = 5.0;

// Optimal string alignment distance (insertion, deletion, substitution,
// adjacent transposition) where one packet is one character.
std::size_t dl_distance(std::span<const PacketFeatures> a, std::span<const PacketFeatures> b);

// dl_distance / max(|a|, |b|). Throws both_empty if both are empty.
double normalized_distance(std::span<const PacketFeatures> a, std::span<const PacketFeatures> b);

struct DissimilarityScore {
  DeviceTypeId device_type;
  double score = 0.0;  // in [0, 5]
  std::size_t comparisons_used = 0;
};

// Sum of normalized distances to up to five references; with fewer than
// five the sum is scaled by 5 / |refs|.
DissimilarityScore score_type(const Fingerprint& query, const DeviceTypeId& type,
                              std::span<const Fingerprint* const> refs);

struct Candidate {
  DeviceTypeId device_type;
  std::vector<const Fingerprint*> refs;
};

struct Discrimination {
  DeviceTypeId winner;
  std::vector<DissimilarityScore> scores;  // same order as the candidates
};

// Lowest score wins; equal scores go to the lexicographically smallest id.
Discrimination discriminate(const Fingerprint& query, std::span<const Candidate> candidates,
                            Exec exec = Exec::serial);

}  // namespace iotguard
