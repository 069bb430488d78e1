#include "iotguard/identify.hpp"

#include <netdb.h>
#include <sys/socket.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iotguard/random.hpp"

namespace iotguard {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from, Clock::time_point to) {
  return static_cast<double>(
             std::chrono::duration_cast<std::chrono::microseconds>(to - from).count()) /
         1000.0;
}

const std::vector<const Fingerprint*> kNoRefs;

}  // namespace

ReferenceStore::ReferenceStore(const FingerprintDb& db) {
  for (const auto& rec : db) add(rec.full);
}

ReferenceStore::ReferenceStore(const FingerprintDb& db, const std::vector<std::size_t>& indices) {
  for (std::size_t i : indices) add(db.at(i).full);
}

void ReferenceStore::add(const Fingerprint& fp) {
  if (fp.label) by_type_[*fp.label].push_back(&fp);
}

const std::vector<const Fingerprint*>& ReferenceStore::refs(const DeviceTypeId& type) const {
  auto it = by_type_.find(type);
  return it == by_type_.end() ? kNoRefs : it->second;
}

std::size_t IdentificationResult::match_count() const {
  return static_cast<std::size_t>(
      std::count_if(matched_types.begin(), matched_types.end(), [](auto& m) { return m.match; }));
}

Identifier::Identifier(const ClassifierRegistry& registry, const ReferenceStore& refs,
                       ReferencePolicy policy, std::size_t refs_per_type, Exec exec)
    : registry_(registry), refs_(refs), policy_(policy), refs_per_type_(refs_per_type),
      exec_(exec) {
  if (registry_.empty()) throw Error(ErrorCode::empty_registry, "registry is empty");
  if (refs_per_type_ == 0) throw Error(ErrorCode::invalid_argument, "refs_per_type must be >= 1");
  for (const auto& type : registry_.types()) {
    if (refs_.refs(type).empty()) {
      throw Error(ErrorCode::no_references, "no reference fingerprints for " + type.str());
    }
  }
}

std::vector<const Fingerprint*> Identifier::pick_refs(const DeviceTypeId& type,
                                                      std::uint64_t seed) const {
  const auto& all = refs_.refs(type);
  const std::size_t k = std::min({refs_per_type_, all.size(), kRefsPerType});
  if (policy_ == ReferencePolicy::most_recent) {
    return {all.end() - static_cast<std::ptrdiff_t>(k), all.end()};
  }
  Rng rng(derive_seed(seed, {stable_hash(type.str())}));
  std::vector<const Fingerprint*> out;
  for (std::size_t i : rng.sample_without_replacement(all.size(), k)) out.push_back(all[i]);
  return out;
}

IdentificationResult Identifier::identify(const FixedFingerprint& fixed, const Fingerprint& full,
                                          std::uint64_t seed) const {
  const auto start = Clock::now();
  IdentificationResult result;
  result.device_mac = full.device_mac;
  result.matched_types = registry_.predict_all(fixed, exec_);
  const auto classified = Clock::now();
  result.elapsed.classify_ms = elapsed_ms(start, classified);

  std::vector<Candidate> candidates;
  for (const auto& m : result.matched_types) {
    if (m.match) candidates.push_back({m.device_type, {}});
  }
  if (candidates.size() == 1) {
    result.identified = candidates.front().device_type;
  } else if (candidates.size() >= 2) {
    for (auto& c : candidates) c.refs = pick_refs(c.device_type, seed);
    auto d = discriminate(full, candidates, exec_);
    result.identified = d.winner;
    result.dissimilarity = std::move(d.scores);
    result.discrimination_used = true;
    result.elapsed.discriminate_ms = elapsed_ms(classified, Clock::now());
  }
  result.elapsed.total_ms = elapsed_ms(start, Clock::now());
  return result;
}

void VulnerabilityRegistry::set(const DeviceTypeId& type, VulnerabilityEntry entry) {
  const bool restricted = entry.level == IsolationLevel::restricted;
  if (restricted && entry.permitted_destinations.empty()) {
    throw Error(ErrorCode::restricted_without_permitted_ips,
                type.str() + ": restricted entry needs permitted destinations");
  }
  if (!restricted && !entry.permitted_destinations.empty()) {
    throw Error(ErrorCode::invalid_argument,
                type.str() + ": only restricted entries may list destinations");
  }
  entries_[type] = std::move(entry);
}

const VulnerabilityEntry* VulnerabilityRegistry::find(const DeviceTypeId& type) const {
  auto it = entries_.find(type);
  return it == entries_.end() ? nullptr : &it->second;
}

VulnerabilityRegistry VulnerabilityRegistry::from_json_text(const std::string& text) {
  VulnerabilityRegistry reg;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw Error(ErrorCode::corrupt_file, "vulns: expected an object");
    for (const auto& [type, body] : doc.items()) {
      VulnerabilityEntry e;
      auto level = parse_isolation(body.at("isolation").get<std::string>());
      if (!level) throw Error(ErrorCode::corrupt_file, "vulns: bad isolation for " + type);
      e.level = *level;
      if (body.contains("permitted_ip")) {
        e.permitted_destinations = body["permitted_ip"].get<std::vector<std::string>>();
      }
      reg.set(DeviceTypeId(type), std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_file, std::string("vulns: ") + e.what());
  }
  return reg;
}

VulnerabilityRegistry VulnerabilityRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

IsolationAssignment assign_isolation(const IdentificationResult& result,
                                     const VulnerabilityRegistry& vulns) {
  if (result.unknown()) return {IsolationLevel::strict, {}};
  const auto* entry = vulns.find(*result.identified);
  if (!entry) return {IsolationLevel::strict, {}};
  return {entry->level, entry->permitted_destinations};
}

std::vector<Ipv4> system_resolve(const std::string& name) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(name.c_str(), nullptr, &hints, &res) != 0) return {};
  std::vector<Ipv4> out;
  for (auto* p = res; p; p = p->ai_next) {
    const auto* sin = reinterpret_cast<const sockaddr_in*>(p->ai_addr);
    out.emplace_back(ntohl(sin->sin_addr.s_addr));
  }
  freeaddrinfo(res);
  return out;
}

std::vector<Ipv4> resolve_destinations(const std::vector<std::string>& destinations,
                                       const Resolver& resolver) {
  std::vector<Ipv4> out;
  for (const auto& d : destinations) {
    if (auto ip = Ipv4::parse(d)) {
      out.push_back(*ip);
      continue;
    }
    for (const auto& ip : resolver(d)) out.push_back(ip);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

nlohmann::json to_json(const IdentificationResult& result, bool with_timing) {
  using nlohmann::json;
  json matches = json::array();
  for (const auto& m : result.matched_types) {
    matches.push_back({{"device_type", m.device_type.str()}, {"match", m.match},
                       {"score", m.score}});
  }
  json scores = json::array();
  for (const auto& s : result.dissimilarity) {
    scores.push_back({{"device_type", s.device_type.str()}, {"score", s.score},
                      {"comparisons_used", s.comparisons_used}});
  }
  json j = {
      {"mac", result.device_mac.to_string()},
      {"outcome", result.unknown() ? "unknown" : "identified"},
      {"device_type", result.unknown() ? json() : json(result.identified->str())},
      {"matched_types", std::move(matches)},
      {"discrimination_used", result.discrimination_used},
      {"dissimilarity", std::move(scores)},
  };
  if (with_timing) {
    j["elapsed"] = {{"classify_ms", result.elapsed.classify_ms},
                    {"discriminate_ms", result.elapsed.discriminate_ms},
                    {"total_ms", result.elapsed.total_ms}};
  }
  return j;
}

}  // namespace iotguard
