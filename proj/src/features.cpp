#include "iotguard/features.hpp"

#include <ostream>

namespace iotguard {

namespace {

constexpr std::uint16_t kPortHttp = 80;
constexpr std::uint16_t kPortHttps = 443;
constexpr std::uint16_t kPortBootpServer = 67;
constexpr std::uint16_t kPortBootpClient = 68;
constexpr std::uint16_t kPortDns = 53;
constexpr std::uint16_t kPortMdns = 5353;
constexpr std::uint16_t kPortSsdp = 1900;
constexpr std::uint16_t kPortNtp = 123;

bool uses_port(const DecodedPacket& pkt, std::uint16_t port) {
  return pkt.src_port == port || pkt.dst_port == port;
}

}  // namespace

std::int32_t DestIpCounterState::counter_for(const IpAddress& ip) {
  auto [it, inserted] = counters_.try_emplace(ip, static_cast<std::int32_t>(counters_.size() + 1));
  return it->second;
}

std::optional<std::int32_t> DestIpCounterState::find(const IpAddress& ip) const {
  auto it = counters_.find(ip);
  if (it == counters_.end()) return std::nullopt;
  return it->second;
}

std::int32_t port_class(std::optional<std::uint16_t> port) {
  if (!port) return 0;
  if (*port <= 1023) return 1;
  if (*port <= 49151) return 2;
  return 3;
}

PacketFeatures extract_features(const DecodedPacket& pkt, DestIpCounterState& state) {
  PacketFeatures f;
  auto set = [&f](Feature which, bool on) { f[which] = on ? 1 : 0; };

  set(Feature::arp, pkt.arp);
  set(Feature::llc, pkt.llc);
  set(Feature::ip, pkt.is_ip());
  set(Feature::icmp, pkt.icmp);
  set(Feature::icmpv6, pkt.icmpv6);
  set(Feature::eapol, pkt.eapol);
  set(Feature::tcp, pkt.transport == Transport::tcp);
  set(Feature::udp, pkt.transport == Transport::udp);

  const bool bootp = pkt.transport == Transport::udp &&
                     (uses_port(pkt, kPortBootpServer) || uses_port(pkt, kPortBootpClient));
  set(Feature::http, uses_port(pkt, kPortHttp));
  set(Feature::https, uses_port(pkt, kPortHttps));
  set(Feature::dhcp, bootp);
  set(Feature::bootp, bootp);
  set(Feature::ssdp, uses_port(pkt, kPortSsdp));
  set(Feature::dns, uses_port(pkt, kPortDns));
  set(Feature::mdns, uses_port(pkt, kPortMdns));
  set(Feature::ntp, uses_port(pkt, kPortNtp));

  set(Feature::ip_opt_padding, pkt.ip_opt_padding);
  set(Feature::ip_opt_router_alert, pkt.ip_opt_router_alert);
  f[Feature::size] = static_cast<std::int32_t>(pkt.frame_size);
  set(Feature::raw_data, pkt.payload_len > 0);
  f[Feature::dest_ip_counter] = pkt.dst_ip ? state.counter_for(*pkt.dst_ip) : 0;
  f[Feature::src_port_class] = port_class(pkt.src_port);
  f[Feature::dst_port_class] = port_class(pkt.dst_port);
  return f;
}

DeviceSessions ingest_frames(const std::vector<RawFrame>& frames) {
  DeviceSessions out;
  std::map<Mac, DestIpCounterState> counters;
  for (const auto& frame : frames) {
    DecodedPacket pkt;
    try {
      pkt = decode_frame(frame);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::malformed_frame) throw;
      ++out.malformed;
      continue;
    }
    auto& state = counters[pkt.src_mac];
    out.sessions[pkt.src_mac].push_back({frame.ts, extract_features(pkt, state)});
  }
  return out;
}

void write_features_csv(std::ostream& out, const DeviceSessions& sessions) {
  out << "mac,packet_index";
  for (std::size_t i = 0; i < kFeatureCount; ++i) out << ',' << feature_name(i);
  out << '\n';
  for (const auto& [mac, packets] : sessions.sessions) {
    const std::string mac_text = mac.to_string();
    for (std::size_t i = 0; i < packets.size(); ++i) {
      out << mac_text << ',' << i;
      for (auto v : packets[i].features.values) out << ',' << v;
      out << '\n';
    }
  }
}

}  // namespace iotguard
