#include "iotguard/enforce.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace iotguard {

std::string_view to_string(IsolationLevel level) {
  switch (level) {
    case IsolationLevel::strict: return "strict";
    case IsolationLevel::restricted: return "restricted";
    case IsolationLevel::trusted: return "trusted";
  }
  return "strict";
}

std::optional<IsolationLevel> parse_isolation(std::string_view text) {
  if (text == "strict") return IsolationLevel::strict;
  if (text == "restricted") return IsolationLevel::restricted;
  if (text == "trusted") return IsolationLevel::trusted;
  return std::nullopt;
}

std::string_view to_string(Overlay overlay) {
  return overlay == Overlay::trusted ? "trusted" : "untrusted";
}

std::optional<Overlay> parse_overlay(std::string_view text) {
  if (text == "trusted") return Overlay::trusted;
  if (text == "untrusted") return Overlay::untrusted;
  return std::nullopt;
}

Overlay overlay_of(IsolationLevel level) {
  return level == IsolationLevel::trusted ? Overlay::trusted : Overlay::untrusted;
}

std::string_view to_string(Verdict v) { return v == Verdict::permit ? "permit" : "deny"; }

std::string rule_hash(const std::vector<Mac>& macs, IsolationLevel level,
                      const std::vector<Ipv4>& permitted_ip) {
  std::vector<Mac> m = macs;
  std::vector<Ipv4> ips = permitted_ip;
  std::sort(m.begin(), m.end());
  std::sort(ips.begin(), ips.end());
  ips.erase(std::unique(ips.begin(), ips.end()), ips.end());

  std::string canon;
  for (const auto& mac : m) canon += mac.to_string() + ",";
  canon += "|";
  canon += to_string(level);
  canon += "|";
  for (const auto& ip : ips) canon += ip.to_string() + ",";

  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kAlphabet[] =
      "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  std::string out(10, '0');
  for (int i = 9; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kAlphabet[h % 62];
    h /= 62;
  }
  return out;
}

namespace {

void check_level_invariant(IsolationLevel level, const std::vector<Ipv4>& ips) {
  if (level == IsolationLevel::restricted && ips.empty()) {
    throw Error(ErrorCode::restricted_without_permitted_ips,
                "restricted rule needs at least one permitted ip");
  }
  if (level != IsolationLevel::restricted && !ips.empty()) {
    throw Error(ErrorCode::invalid_argument,
                std::string(to_string(level)) + " rule must not list permitted ips");
  }
}

}  // namespace

EnforcementRule make_rule(const Mac& mac, IsolationLevel level, std::vector<Ipv4> permitted_ip,
                          std::int64_t id, std::int64_t priority, std::string name) {
  check_level_invariant(level, permitted_ip);
  EnforcementRule rule;
  rule.id = id;
  rule.name = name.empty() ? "policy-" + std::to_string(id) : std::move(name);
  rule.source_mac = {mac};
  rule.permitted_ip = std::move(permitted_ip);
  rule.priority = priority;
  rule.level = level;
  rule.hash = rule_hash(rule.source_mac, level, rule.permitted_ip);
  return rule;
}

nlohmann::json rule_to_json(const EnforcementRule& rule) {
  nlohmann::json macs = nlohmann::json::array();
  for (const auto& m : rule.source_mac) macs.push_back(m.to_string());
  nlohmann::json ips = nlohmann::json::array();
  for (const auto& ip : rule.permitted_ip) ips.push_back(ip.to_string());
  return {
      {"id", rule.id},         {"name", rule.name},
      {"source_mac", macs},    {"permitted_ip", ips},
      {"priority", rule.priority}, {"hash", rule.hash},
      {"isolation", std::string(to_string(rule.level))},
  };
}

EnforcementRule rule_from_json(const nlohmann::json& j) {
  auto corrupt = [](const std::string& why) {
    throw Error(ErrorCode::corrupt_file, "rule: " + why);
  };
  EnforcementRule rule;
  try {
    rule.id = j.at("id").get<std::int64_t>();
    rule.name = j.at("name").get<std::string>();
    for (const auto& m : j.at("source_mac")) {
      auto mac = Mac::parse(m.get<std::string>());
      if (!mac) corrupt("bad mac " + m.dump());
      rule.source_mac.push_back(*mac);
    }
    for (const auto& s : j.at("permitted_ip")) {
      auto ip = Ipv4::parse(s.get<std::string>());
      if (!ip) corrupt("bad ip " + s.dump());
      rule.permitted_ip.push_back(*ip);
    }
    rule.priority = j.at("priority").get<std::int64_t>();
    rule.hash = j.at("hash").get<std::string>();
    auto level = parse_isolation(j.at("isolation").get<std::string>());
    if (!level) corrupt("bad isolation level");
    rule.level = *level;
  } catch (const nlohmann::json::exception& e) {
    corrupt(e.what());
  }
  if (rule.source_mac.empty()) corrupt("no source_mac");
  check_level_invariant(rule.level, rule.permitted_ip);
  if (rule.hash != rule_hash(rule.source_mac, rule.level, rule.permitted_ip)) {
    corrupt("hash does not match rule contents");
  }
  return rule;
}

std::vector<EnforcementRule> rules_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_file, std::string("rules: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::corrupt_file, "rules: expected a JSON array");
  std::vector<EnforcementRule> rules;
  for (const auto& j : doc) rules.push_back(rule_from_json(j));
  return rules;
}

void save_rules(const std::vector<EnforcementRule>& rules, const std::filesystem::path& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rules) doc.push_back(rule_to_json(r));
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<EnforcementRule> load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return rules_from_json_text(ss.str());
}

RuleCache::RuleCache(std::size_t capacity) : capacity_(capacity) {}

void RuleCache::evict_one_locked() {
  if (absent_order_.empty()) {
    throw Error(ErrorCode::capacity_exceeded, "rule cache full and no absent device to evict");
  }
  const auto oldest = absent_order_.begin();
  entries_.erase(oldest->second);
  absent_order_.erase(oldest);
}

void RuleCache::update(const EnforcementRule& rule) {
  auto shared = std::make_shared<const EnforcementRule>(rule);
  std::unique_lock lock(mutex_);
  std::size_t fresh = 0;
  for (const auto& mac : rule.source_mac) fresh += entries_.contains(mac) ? 0 : 1;
  if (capacity_ != 0) {
    if (fresh > capacity_) {
      throw Error(ErrorCode::capacity_exceeded, "rule lists more MACs than the cache holds");
    }
    // Check first so a failed update leaves the cache untouched.
    std::size_t evictable = 0;
    for (const auto& [tick, mac] : absent_order_) {
      const bool in_rule = std::find(rule.source_mac.begin(), rule.source_mac.end(), mac) !=
                           rule.source_mac.end();
      evictable += in_rule ? 0 : 1;
    }
    const std::size_t over = entries_.size() + fresh > capacity_
                                 ? entries_.size() + fresh - capacity_
                                 : 0;
    if (over > evictable) {
      throw Error(ErrorCode::capacity_exceeded, "rule cache full and no absent device to evict");
    }
  }
  for (const auto& mac : rule.source_mac) {
    auto it = entries_.find(mac);
    if (it != entries_.end()) {
      if (it->second.absent_since) absent_order_.erase(*it->second.absent_since);
      it->second = Entry{shared, std::nullopt};
      continue;
    }
    while (capacity_ != 0 && entries_.size() >= capacity_) evict_one_locked();
    entries_.emplace(mac, Entry{shared, std::nullopt});
  }
}

std::shared_ptr<const EnforcementRule> RuleCache::lookup(const Mac& mac) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(mac);
  return it == entries_.end() ? nullptr : it->second.rule;
}

void RuleCache::mark_absent(const Mac& mac) {
  std::unique_lock lock(mutex_);
  auto it = entries_.find(mac);
  if (it == entries_.end() || it->second.absent_since) return;
  it->second.absent_since = ++tick_;
  absent_order_.emplace(*it->second.absent_since, mac);
}

void RuleCache::mark_present(const Mac& mac) {
  std::unique_lock lock(mutex_);
  auto it = entries_.find(mac);
  if (it == entries_.end() || !it->second.absent_since) return;
  absent_order_.erase(*it->second.absent_since);
  it->second.absent_since.reset();
}

bool RuleCache::erase(const Mac& mac) {
  std::unique_lock lock(mutex_);
  auto it = entries_.find(mac);
  if (it == entries_.end()) return false;
  if (it->second.absent_since) absent_order_.erase(*it->second.absent_since);
  entries_.erase(it);
  return true;
}

std::size_t RuleCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

Decision decide(const FlowKey& flow, const RuleCache& cache) {
  const auto rule = cache.lookup(flow.src_mac);
  if (!rule) return {Verdict::deny, "no rule for source; identification required", true};

  const IsolationLevel level = rule->level;
  if (const auto* dev = std::get_if<DeviceDestination>(&flow.dst)) {
    Overlay dst_overlay = Overlay::untrusted;
    if (dev->overlay) {
      dst_overlay = *dev->overlay;
    } else if (const auto dst_rule = cache.lookup(dev->dst_mac)) {
      dst_overlay = overlay_of(dst_rule->level);
    }
    if (overlay_of(level) == dst_overlay) {
      return {Verdict::permit, std::string(to_string(level)) + ": peer in same overlay"};
    }
    return {Verdict::deny, std::string(to_string(level)) + ": cross-overlay flow"};
  }

  const auto& inet = std::get<InternetDestination>(flow.dst);
  switch (level) {
    case IsolationLevel::strict:
      return {Verdict::deny, "strict: no internet access"};
    case IsolationLevel::restricted: {
      const auto& ips = rule->permitted_ip;
      if (std::find(ips.begin(), ips.end(), inet.dst_ip) != ips.end()) {
        return {Verdict::permit, "restricted: permitted destination"};
      }
      return {Verdict::deny, "restricted: destination not permitted"};
    }
    case IsolationLevel::trusted:
      return {Verdict::permit, "trusted: unrestricted internet"};
  }
  return {Verdict::deny, "unreachable"};
}

std::vector<FlowKey> parse_flows_csv(std::istream& in) {
  std::vector<FlowKey> flows;
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::corrupt_file, "flows line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("src_mac")) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() < 3 || cells.size() > 4) bad("expected 3 or 4 columns");

    FlowKey flow;
    auto src = Mac::parse(cells[0]);
    if (!src) bad("bad src_mac");
    flow.src_mac = *src;
    if (cells[1] == "device") {
      auto dst = Mac::parse(cells[2]);
      if (!dst) bad("bad device mac");
      DeviceDestination d{*dst, std::nullopt};
      if (cells.size() == 4 && !cells[3].empty()) {
        d.overlay = parse_overlay(cells[3]);
        if (!d.overlay) bad("bad dst_overlay");
      }
      flow.dst = d;
    } else if (cells[1] == "internet") {
      auto ip = Ipv4::parse(cells[2]);
      if (!ip) bad("bad ip");
      flow.dst = InternetDestination{*ip};
    } else {
      bad("dst_kind must be device or internet");
    }
    flows.push_back(flow);
  }
  return flows;
}

}  // namespace iotguard
