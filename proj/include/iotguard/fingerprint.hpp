#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "iotguard/features.hpp"
#include "iotguard/packet.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

inline constexpr std::size_t kFixedPackets = 12;
inline constexpr std::size_t kFixedLength = kFixedPackets * kFeatureCount;  // 276

// When a device's setup burst is considered over.
struct SetupSessionConfig {
  double idle_timeout = 30.0;      // seconds of silence
  std::size_t max_packets = 500;
  double rate_window = 10.0;       // seconds
  double rate_drop_factor = 0.1;   // fraction of the peak windowed rate

  void validate() const;
  // key=value lines, '#' comments. Unknown keys are an error.
  static SetupSessionConfig parse(std::string_view text);
  static SetupSessionConfig load(const std::filesystem::path& path);
};

// Returns the prefix of `stream` that belongs to the setup phase. The cut
// happens before the first packet that arrives after idle_timeout of
// silence, or whose arrival leaves the windowed rate below
// rate_drop_factor * peak, or once max_packets are collected.
std::vector<PacketFeatures> segment_setup(std::span<const TimedFeatures> stream,
                                          const SetupSessionConfig& cfg);

// Index at which segment_setup cuts (== stream.size() if it never does).
std::size_t setup_cut_index(std::span<const TimedFeatures> stream, const SetupSessionConfig& cfg);

// Variable-length fingerprint: one column per retained packet, no two
// consecutive columns equal.
struct Fingerprint {
  Mac device_mac;
  std::vector<PacketFeatures> columns;
  std::optional<DeviceTypeId> label;

  bool operator==(const Fingerprint&) const = default;
};

// The first 12 globally unique columns, flattened and zero-padded.
struct FixedFingerprint {
  std::array<std::int32_t, kFixedLength> values{};
  std::optional<DeviceTypeId> label;

  bool operator==(const FixedFingerprint&) const = default;
};

Fingerprint build_fingerprint(const Mac& mac, std::span<const PacketFeatures> packets);
FixedFingerprint to_fixed(const Fingerprint& fp);

struct FingerprintRecord {
  Fingerprint full;
  FixedFingerprint fixed;

  static FingerprintRecord from(Fingerprint fp) {
    FixedFingerprint fixed = to_fixed(fp);
    return {std::move(fp), std::move(fixed)};
  }
  bool operator==(const FingerprintRecord&) const = default;
};

using FingerprintDb = std::vector<FingerprintRecord>;

// A database lives in two sibling files: <stem>.json holds the F matrices
// and <stem>.csv the 277-column F' table. `path` may name either one.
void save_fingerprints(const FingerprintDb& db, const std::filesystem::path& path);
FingerprintDb load_fingerprints(const std::filesystem::path& path);

}  // namespace iotguard
