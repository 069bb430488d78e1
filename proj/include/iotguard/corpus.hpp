#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "iotguard/fingerprint.hpp"
#include "iotguard/packet.hpp"

namespace iotguard {

struct CorpusNoise {
  double drop_prob = 0.0;
  // Probability that a packet is retransmitted after the packet following it.
  double duplicate_prob = 0.0;
  // Probability that a packet's size is shifted by up to size_jitter_bytes.
  double size_jitter_prob = 0.0;
  std::uint32_t size_jitter_bytes = 0;

  bool operator==(const CorpusNoise&) const = default;
};

// Each type owns a base setup sequence; every fingerprint of the type is
// that sequence perturbed by `noise`. The second type of each duplicated
// pair reuses the first one's base sequence.
struct SyntheticCorpusSpec {
  std::size_t n_types = 27;
  std::size_t fingerprints_per_type = 20;
  std::size_t packets_min = 14;
  std::size_t packets_max = 30;
  CorpusNoise noise;
  std::vector<std::pair<std::size_t, std::size_t>> duplicated_type_pairs;

  void validate() const;
  static SyntheticCorpusSpec from_json_text(const std::string& text);
  static SyntheticCorpusSpec load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

DeviceTypeId synthetic_type_id(std::size_t index);

struct DeviceTrace {
  Mac mac;
  DeviceTypeId label;
  std::vector<RawFrame> frames;
};

// Rendered setup captures, one per fingerprint, grouped by type.
std::vector<DeviceTrace> generate_traces(const SyntheticCorpusSpec& spec, std::uint64_t seed);

// Traces pushed through decode, feature extraction and fingerprinting.
FingerprintDb generate_corpus(const SyntheticCorpusSpec& spec, std::uint64_t seed);

FingerprintRecord fingerprint_trace(const DeviceTrace& trace,
                                    const SetupSessionConfig& cfg = {});

}  // namespace iotguard
