#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "iotguard/types.hpp"

namespace iotguard {

enum class IsolationLevel { strict, restricted, trusted };
enum class Overlay { untrusted, trusted };

std::string_view to_string(IsolationLevel level);
std::optional<IsolationLevel> parse_isolation(std::string_view text);
std::string_view to_string(Overlay overlay);
std::optional<Overlay> parse_overlay(std::string_view text);

// strict and restricted devices live in the untrusted overlay.
Overlay overlay_of(IsolationLevel level);

struct EnforcementRule {
  std::int64_t id = 0;
  std::string name;
  std::vector<Mac> source_mac;
  std::vector<Ipv4> permitted_ip;
  std::int64_t priority = 0;
  std::string hash;
  IsolationLevel level = IsolationLevel::strict;

  bool operator==(const EnforcementRule&) const = default;
};

// 10-character base62 digest of (sorted MACs, level, sorted IPs).
std::string rule_hash(const std::vector<Mac>& macs, IsolationLevel level,
                      const std::vector<Ipv4>& permitted_ip);

// Throws restricted_without_permitted_ips for a restricted rule with no
// destinations, and invalid_argument if a strict/trusted rule has some.
EnforcementRule make_rule(const Mac& mac, IsolationLevel level, std::vector<Ipv4> permitted_ip,
                          std::int64_t id, std::int64_t priority, std::string name = {});

// Fields: id, name, source_mac, permitted_ip, priority, hash, isolation.
nlohmann::json rule_to_json(const EnforcementRule& rule);
EnforcementRule rule_from_json(const nlohmann::json& j);
void save_rules(const std::vector<EnforcementRule>& rules, const std::filesystem::path& path);
std::vector<EnforcementRule> load_rules(const std::filesystem::path& path);
std::vector<EnforcementRule> rules_from_json_text(const std::string& text);

// MAC-keyed hash table of rules. Lookups take a shared lock and updates an
// exclusive one. Devices that leave the network can be marked absent; when
// the capacity bound is hit the longest-absent device is evicted.
class RuleCache {
 public:
  explicit RuleCache(std::size_t capacity = 0);  // 0 = unbounded

  // Replaces any rule held for the same MACs. Throws capacity_exceeded if
  // a new MAC does not fit and nothing can be evicted.
  void update(const EnforcementRule& rule);
  std::shared_ptr<const EnforcementRule> lookup(const Mac& mac) const;

  void mark_absent(const Mac& mac);
  void mark_present(const Mac& mac);
  bool erase(const Mac& mac);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  struct Entry {
    std::shared_ptr<const EnforcementRule> rule;
    std::optional<std::uint64_t> absent_since;
  };

  void evict_one_locked();

  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<Mac, Entry> entries_;
  std::map<std::uint64_t, Mac> absent_order_;
  std::uint64_t tick_ = 0;
};

struct DeviceDestination {
  Mac dst_mac;
  // Looked up from the cache when unset; uncached devices are untrusted.
  std::optional<Overlay> overlay;
};

struct InternetDestination {
  Ipv4 dst_ip;
};

struct FlowKey {
  Mac src_mac;
  std::variant<DeviceDestination, InternetDestination> dst;
};

enum class Verdict { permit, deny };
std::string_view to_string(Verdict v);

struct Decision {
  Verdict verdict = Verdict::deny;
  std::string reason;
  // Source had no rule; the device should go through identification.
  bool needs_identification = false;
};

Decision decide(const FlowKey& flow, const RuleCache& cache);

// Flow CSV rows: src_mac,dst_kind,dst_value,dst_overlay with dst_kind in
// {device, internet}. A header line starting with "src_mac" is skipped.
std::vector<FlowKey> parse_flows_csv(std::istream& in);

}  // namespace iotguard
