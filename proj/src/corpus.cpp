#include "iotguard/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iotguard/features.hpp"
#include "iotguard/frames.hpp"
#include "iotguard/random.hpp"

namespace iotguard {

namespace {

enum class Kind {
  arp, eapol, llc, dhcp, dns, mdns, ssdp, ntp, http, https,
  tcp_other, udp_other, icmp_echo, igmp, mld, icmpv6_ns,
};
constexpr std::size_t kKindCount = 16;

struct SizeRange {
  std::uint32_t lo, hi;
};

// Frame sizes (bytes) a kind is drawn from.
constexpr SizeRange kSizes[kKindCount] = {
    {42, 60}, {99, 135}, {40, 120}, {342, 600}, {70, 110}, {80, 400}, {150, 420}, {90, 90},
    {54, 700}, {54, 1400}, {54, 600}, {60, 400}, {74, 98}, {46, 60}, {90, 110}, {78, 86},
};

// Octets before the payload; frames never get smaller than this.
constexpr std::uint32_t kHeaderLen[kKindCount] = {
    42, 18, 17, 42, 42, 42, 42, 42, 54, 54, 54, 42, 42, 46, 70, 62,
};

struct SetupPacket {
  Kind kind = Kind::arp;
  std::uint32_t size = 0;
  std::uint16_t sport = 0;
  std::uint16_t dport = 0;
  std::uint8_t slot = 0;  // which remote endpoint
  bool reliable = false;  // lost frames are retransmitted, so never missing
  bool operator==(const SetupPacket&) const = default;
};

using BaseSequence = std::vector<SetupPacket>;

std::uint16_t ephemeral(Rng& rng) {
  return static_cast<std::uint16_t>(rng.bernoulli(0.7) ? rng.uniform_int(49152, 65535)
                                                       : rng.uniform_int(1024, 49151));
}

// A device-type talks a handful of protocols with characteristic sizes.
struct Palette {
  std::vector<Kind> kinds;
  std::array<SizeRange, kKindCount> sizes{};
};

Palette random_palette(Rng& rng) {
  Palette pal;
  const auto picked = rng.sample_without_replacement(kKindCount, 1 + rng.uniform_index(2));
  for (auto k : picked) pal.kinds.push_back(static_cast<Kind>(k));
  for (std::size_t k = 0; k < kKindCount; ++k) {
    const auto r = kSizes[k];
    const std::uint32_t width = std::max<std::uint32_t>(4, (r.hi - r.lo) / 8);
    const auto lo = static_cast<std::uint32_t>(
        rng.uniform_int(r.lo, std::max<std::int64_t>(r.lo, std::int64_t{r.hi} - width)));
    pal.sizes[k] = {lo, std::min(r.hi, lo + width)};
  }
  return pal;
}

SetupPacket random_packet(Kind kind, const Palette& pal, Rng& rng) {
  SetupPacket p;
  p.kind = kind;
  const auto range = pal.sizes[static_cast<std::size_t>(kind)];
  p.size = static_cast<std::uint32_t>(rng.uniform_int(range.lo, range.hi));
  p.slot = static_cast<std::uint8_t>(rng.uniform_index(5));
  switch (kind) {
    case Kind::arp:
      p.size = rng.bernoulli(0.5) ? 42 : 60;
      break;
    case Kind::dhcp: p.sport = 68; p.dport = 67; break;
    case Kind::dns: p.sport = ephemeral(rng); p.dport = 53; break;
    case Kind::mdns: p.sport = 5353; p.dport = 5353; break;
    case Kind::ssdp: p.sport = ephemeral(rng); p.dport = 1900; break;
    case Kind::ntp: p.sport = rng.bernoulli(0.5) ? 123 : ephemeral(rng); p.dport = 123; break;
    case Kind::http:
      p.sport = ephemeral(rng);
      p.dport = 80;
      if (rng.bernoulli(0.4)) p.size = 54;
      break;
    case Kind::https:
      p.sport = ephemeral(rng);
      p.dport = 443;
      if (rng.bernoulli(0.4)) p.size = 54;
      break;
    case Kind::tcp_other:
      p.sport = ephemeral(rng);
      p.dport = static_cast<std::uint16_t>(rng.uniform_int(1024, 49151));
      break;
    case Kind::udp_other:
      p.sport = ephemeral(rng);
      p.dport = static_cast<std::uint16_t>(rng.uniform_int(1024, 49151));
      break;
    default:
      break;
  }
  return p;
}

BaseSequence random_base(const SyntheticCorpusSpec& spec, Rng& rng) {
  const auto len = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(spec.packets_min),
                      static_cast<std::int64_t>(spec.packets_max)));
  const Palette pal = random_palette(rng);
  BaseSequence base;
  // Most WiFi devices open with the EAPOL handshake and a DHCP exchange.
  if (rng.bernoulli(0.7)) {
    base.push_back(random_packet(Kind::eapol, pal, rng));
    base.push_back(random_packet(Kind::eapol, pal, rng));
  }
  if (rng.bernoulli(0.8)) base.push_back(random_packet(Kind::dhcp, pal, rng));
  for (auto& p : base) p.reliable = true;
  // Protocols come in bursts.
  Kind current = pal.kinds[rng.uniform_index(pal.kinds.size())];
  while (base.size() < len) {
    if (rng.bernoulli(0.2)) current = pal.kinds[rng.uniform_index(pal.kinds.size())];
    base.push_back(random_packet(current, pal, rng));
  }
  base.resize(len);
  return base;
}

Ipv4 remote_ip(std::size_t type, std::uint8_t slot) {
  return Ipv4(52, static_cast<std::uint8_t>(20 + slot), static_cast<std::uint8_t>(type / 256),
              static_cast<std::uint8_t>(type % 256));
}

frames::Bytes render(const SetupPacket& p, const Mac& mac, std::size_t type, std::uint8_t host) {
  const Ipv4 self(192, 168, 1, host);
  const Ipv4 gateway(192, 168, 1, 1);
  const Mac gw_mac({0x02, 0x00, 0x00, 0x00, 0x00, 0x01});
  const std::size_t payload = p.size - std::min(p.size, kHeaderLen[static_cast<std::size_t>(p.kind)]);
  const std::array<std::uint8_t, 16> link_local = {
      0xfe, 0x80, 0, 0, 0, 0, 0, 0, mac.octets()[0], mac.octets()[1], mac.octets()[2], 0xff,
      0xfe, mac.octets()[3], mac.octets()[4], mac.octets()[5]};

  using namespace frames;
  switch (p.kind) {
    case Kind::arp: return arp_request(mac, self, gateway, payload);
    case Kind::eapol: return eapol(mac, gw_mac, static_cast<std::uint16_t>(payload));
    case Kind::llc: return llc(mac, Mac({0x01, 0x80, 0xc2, 0, 0, 0}), static_cast<std::uint16_t>(payload));
    case Kind::dhcp:
      return ipv4_udp(mac, kBroadcast, {Ipv4(0), Ipv4(255, 255, 255, 255)}, p.sport, p.dport, payload);
    case Kind::dns:
      return ipv4_udp(mac, gw_mac, {self, gateway}, p.sport, p.dport, payload);
    case Kind::mdns:
      return ipv4_udp(mac, Mac({0x01, 0x00, 0x5e, 0, 0, 0xfb}), {self, Ipv4(224, 0, 0, 251), 255},
                      p.sport, p.dport, payload);
    case Kind::ssdp:
      return ipv4_udp(mac, Mac({0x01, 0x00, 0x5e, 0x7f, 0xff, 0xfa}),
                      {self, Ipv4(239, 255, 255, 250), 4}, p.sport, p.dport, payload);
    case Kind::ntp:
    case Kind::udp_other:
      return ipv4_udp(mac, gw_mac, {self, remote_ip(type, p.slot)}, p.sport, p.dport, payload);
    case Kind::http:
    case Kind::https:
    case Kind::tcp_other:
      return ipv4_tcp(mac, gw_mac, {self, remote_ip(type, p.slot)}, p.sport, p.dport, payload);
    case Kind::icmp_echo:
      return ipv4_icmp_echo(mac, gw_mac, {self, p.slot % 2 ? gateway : remote_ip(type, p.slot)},
                            payload);
    case Kind::igmp: return ipv4_igmp_report(mac, self, Ipv4(224, 0, 0, 251), payload);
    case Kind::mld: return ipv6_mld_report(mac, link_local, payload);
    case Kind::icmpv6_ns: {
      const std::array<std::uint8_t, 16> solicited = {0xff, 0x02, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1,
                                                      0xff, mac.octets()[3], mac.octets()[4],
                                                      mac.octets()[5]};
      return ipv6_icmpv6(mac, Mac({0x33, 0x33, 0xff, mac.octets()[3], mac.octets()[4],
                                   mac.octets()[5]}),
                         link_local, solicited, 135, payload);
    }
  }
  return {};
}

BaseSequence perturb(const BaseSequence& base, const CorpusNoise& noise, Rng& rng) {
  BaseSequence out;
  std::vector<SetupPacket> pending;
  for (const auto& original : base) {
    if (rng.bernoulli(noise.drop_prob) && !original.reliable) continue;
    SetupPacket p = original;
    if (noise.size_jitter_bytes > 0 && rng.bernoulli(noise.size_jitter_prob)) {
      const auto j = static_cast<std::int64_t>(noise.size_jitter_bytes);
      const std::int64_t shifted = static_cast<std::int64_t>(p.size) + rng.uniform_int(-j, j);
      const auto floor = static_cast<std::int64_t>(kHeaderLen[static_cast<std::size_t>(p.kind)]);
      p.size = static_cast<std::uint32_t>(std::clamp<std::int64_t>(shifted, floor, 1514));
    }
    out.push_back(p);
    for (const auto& d : pending) out.push_back(d);
    pending.clear();
    if (rng.bernoulli(noise.duplicate_prob)) pending.push_back(p);
  }
  for (const auto& d : pending) out.push_back(d);
  if (out.empty()) out.push_back(base.front());
  return out;
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, std::string(name) + " must be in [0,1]");
  }
}

}  // namespace

void SyntheticCorpusSpec::validate() const {
  if (n_types < 2) throw Error(ErrorCode::invalid_argument, "n_types must be >= 2");
  if (fingerprints_per_type < 1) {
    throw Error(ErrorCode::invalid_argument, "fingerprints_per_type must be >= 1");
  }
  if (packets_min < 1 || packets_min > packets_max) {
    throw Error(ErrorCode::invalid_argument, "need 1 <= packets_min <= packets_max");
  }
  check_prob(noise.drop_prob, "drop_prob");
  check_prob(noise.duplicate_prob, "duplicate_prob");
  check_prob(noise.size_jitter_prob, "size_jitter_prob");
  for (const auto& [a, b] : duplicated_type_pairs) {
    if (a >= n_types || b >= n_types || a == b) {
      throw Error(ErrorCode::invalid_argument, "duplicated_type_pairs entry out of range");
    }
  }
}

SyntheticCorpusSpec SyntheticCorpusSpec::from_json_text(const std::string& text) {
  SyntheticCorpusSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    spec.n_types = j.value("n_types", spec.n_types);
    spec.fingerprints_per_type = j.value("fingerprints_per_type", spec.fingerprints_per_type);
    spec.packets_min = j.value("packets_min", spec.packets_min);
    spec.packets_max = j.value("packets_max", spec.packets_max);
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      spec.noise.drop_prob = n.value("drop_prob", 0.0);
      spec.noise.duplicate_prob = n.value("duplicate_prob", 0.0);
      spec.noise.size_jitter_prob = n.value("size_jitter_prob", 0.0);
      spec.noise.size_jitter_bytes = n.value("size_jitter_bytes", 0u);
    }
    if (j.contains("duplicated_type_pairs")) {
      spec.duplicated_type_pairs =
          j["duplicated_type_pairs"].get<std::vector<std::pair<std::size_t, std::size_t>>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("corpus spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SyntheticCorpusSpec SyntheticCorpusSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string SyntheticCorpusSpec::to_json_text() const {
  nlohmann::json j = {
      {"n_types", n_types},
      {"fingerprints_per_type", fingerprints_per_type},
      {"packets_min", packets_min},
      {"packets_max", packets_max},
      {"noise",
       {{"drop_prob", noise.drop_prob},
        {"duplicate_prob", noise.duplicate_prob},
        {"size_jitter_prob", noise.size_jitter_prob},
        {"size_jitter_bytes", noise.size_jitter_bytes}}},
      {"duplicated_type_pairs", duplicated_type_pairs},
  };
  return j.dump(2);
}

DeviceTypeId synthetic_type_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth-%02zu", index);
  return DeviceTypeId(buf);
}

std::vector<DeviceTrace> generate_traces(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng base_rng(derive_seed(seed, {0}));
  std::vector<BaseSequence> bases;
  while (bases.size() < spec.n_types) {
    BaseSequence b = random_base(spec, base_rng);
    if (std::find(bases.begin(), bases.end(), b) == bases.end()) bases.push_back(std::move(b));
  }
  for (const auto& [a, b] : spec.duplicated_type_pairs) bases[b] = bases[a];

  std::vector<DeviceTrace> traces;
  traces.reserve(spec.n_types * spec.fingerprints_per_type);
  for (std::size_t t = 0; t < spec.n_types; ++t) {
    const DeviceTypeId label = synthetic_type_id(t);
    for (std::size_t k = 0; k < spec.fingerprints_per_type; ++k) {
      Rng rng(derive_seed(seed, {1, t, k}));
      const Mac mac({0x02, 0x1a, static_cast<std::uint8_t>(t >> 8), static_cast<std::uint8_t>(t),
                     static_cast<std::uint8_t>(k >> 8), static_cast<std::uint8_t>(k)});
      const auto host = static_cast<std::uint8_t>(10 + (t * spec.fingerprints_per_type + k) % 240);

      DeviceTrace trace{mac, label, {}};
      const std::int64_t start_us =
          1'600'000'000LL * 1'000'000 +
          static_cast<std::int64_t>(traces.size()) * 300LL * 1'000'000;
      std::int64_t now = start_us;
      for (const auto& p : perturb(bases[t], spec.noise, rng)) {
        RawFrame f;
        f.ts = {now / 1'000'000, static_cast<std::int32_t>(now % 1'000'000)};
        f.bytes = render(p, mac, t, host);
        trace.frames.push_back(std::move(f));
        now += 100'000 + static_cast<std::int64_t>(rng.uniform_index(20'000));
      }
      traces.push_back(std::move(trace));
    }
  }
  return traces;
}

FingerprintRecord fingerprint_trace(const DeviceTrace& trace, const SetupSessionConfig& cfg) {
  const DeviceSessions sessions = ingest_frames(trace.frames);
  auto it = sessions.sessions.find(trace.mac);
  if (it == sessions.sessions.end()) {
    throw Error(ErrorCode::empty_session, "trace has no decodable frames");
  }
  const auto setup = segment_setup(it->second, cfg);
  Fingerprint fp = build_fingerprint(trace.mac, setup);
  fp.label = trace.label;
  return FingerprintRecord::from(std::move(fp));
}

FingerprintDb generate_corpus(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
  FingerprintDb db;
  for (const auto& trace : generate_traces(spec, seed)) db.push_back(fingerprint_trace(trace));
  return db;
}

}  // namespace iotguard
