#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "iotguard/discriminate.hpp"
#include "iotguard/enforce.hpp"
#include "iotguard/fingerprint.hpp"
#include "iotguard/typemodel.hpp"

namespace iotguard {

// Labeled full fingerprints grouped by type, in database order.
class ReferenceStore {
 public:
  ReferenceStore() = default;
  explicit ReferenceStore(const FingerprintDb& db);
  // Only records whose index is listed; used for training splits.
  ReferenceStore(const FingerprintDb& db, const std::vector<std::size_t>& indices);

  void add(const Fingerprint& fp);
  const std::vector<const Fingerprint*>& refs(const DeviceTypeId& type) const;
  bool contains(const DeviceTypeId& type) const { return by_type_.contains(type); }

 private:
  std::map<DeviceTypeId, std::vector<const Fingerprint*>> by_type_;
};

enum class ReferencePolicy {
  most_recent,    // the last refs_per_type records of the type
  seeded_random,  // drawn without replacement from the identification seed
};

struct StageTimes {
  double classify_ms = 0.0;
  double discriminate_ms = 0.0;
  double total_ms = 0.0;
};

struct IdentificationResult {
  Mac device_mac;
  std::optional<DeviceTypeId> identified;  // empty = Unknown
  std::vector<TypeMatch> matched_types;     // one entry per registered type
  std::vector<DissimilarityScore> dissimilarity;
  bool discrimination_used = false;
  StageTimes elapsed;

  bool unknown() const { return !identified.has_value(); }
  std::size_t match_count() const;
};

// Classification, then edit-distance discrimination when several types
// match. Immutable after construction; identify() may run concurrently.
class Identifier {
 public:
  Identifier(const ClassifierRegistry& registry, const ReferenceStore& refs,
             ReferencePolicy policy = ReferencePolicy::most_recent,
             std::size_t refs_per_type = kRefsPerType, Exec exec = Exec::serial);

  IdentificationResult identify(const FixedFingerprint& fixed, const Fingerprint& full,
                                std::uint64_t seed = 0) const;

 private:
  std::vector<const Fingerprint*> pick_refs(const DeviceTypeId& type, std::uint64_t seed) const;

  const ClassifierRegistry& registry_;
  const ReferenceStore& refs_;
  ReferencePolicy policy_;
  std::size_t refs_per_type_;
  Exec exec_;
};

struct VulnerabilityEntry {
  IsolationLevel level = IsolationLevel::strict;
  std::vector<std::string> permitted_destinations;  // IPs or DNS names
};

// Device-type -> isolation level, backed by a local JSON file:
// {"<type>": {"isolation": "restricted", "permitted_ip": ["..."]}, ...}
class VulnerabilityRegistry {
 public:
  void set(const DeviceTypeId& type, VulnerabilityEntry entry);
  const VulnerabilityEntry* find(const DeviceTypeId& type) const;
  std::size_t size() const { return entries_.size(); }

  static VulnerabilityRegistry from_json_text(const std::string& text);
  static VulnerabilityRegistry load(const std::filesystem::path& path);

 private:
  std::map<DeviceTypeId, VulnerabilityEntry> entries_;
};

struct IsolationAssignment {
  IsolationLevel level = IsolationLevel::strict;
  std::vector<std::string> permitted;
};

// Unknown devices and identified types missing from the registry get strict.
IsolationAssignment assign_isolation(const IdentificationResult& result,
                                     const VulnerabilityRegistry& vulns);

// Turns permitted destinations into addresses once, when a rule is built.
using Resolver = std::function<std::vector<Ipv4>(const std::string& name)>;
std::vector<Ipv4> system_resolve(const std::string& name);
std::vector<Ipv4> resolve_destinations(const std::vector<std::string>& destinations,
                                       const Resolver& resolver = system_resolve);

nlohmann::json to_json(const IdentificationResult& result, bool with_timing = true);

}  // namespace iotguard
