#pragma once

#include <cstdint>
#include <vector>

#include "iotguard/types.hpp"

namespace iotguard::frames {

// Ethernet frame synthesis for test captures and the synthetic corpus.
// `payload` is the number of zero octets after the last header.

using Bytes = std::vector<std::uint8_t>;

inline constexpr Mac kBroadcast{{0xff, 0xff, 0xff, 0xff, 0xff, 0xff}};

Bytes arp_request(const Mac& src, Ipv4 sender, Ipv4 target, std::size_t trailer = 0);
Bytes eapol(const Mac& src, const Mac& dst, std::uint16_t body_len);
Bytes llc(const Mac& src, const Mac& dst, std::uint16_t payload);

struct Ipv4Header {
  Ipv4 src;
  Ipv4 dst;
  std::uint8_t ttl = 64;
  std::vector<std::uint8_t> options;  // padded to a multiple of 4 with EOL
};

Bytes ipv4_udp(const Mac& src, const Mac& dst, const Ipv4Header& ip, std::uint16_t sport,
               std::uint16_t dport, std::size_t payload);
Bytes ipv4_tcp(const Mac& src, const Mac& dst, const Ipv4Header& ip, std::uint16_t sport,
               std::uint16_t dport, std::size_t payload);
Bytes ipv4_icmp_echo(const Mac& src, const Mac& dst, const Ipv4Header& ip, std::size_t payload);
// IGMPv2 membership report carrying a router-alert option.
Bytes ipv4_igmp_report(const Mac& src, Ipv4 ip_src, Ipv4 group, std::size_t payload);

// MLDv2 report: hop-by-hop header with router alert and PadN, then ICMPv6.
Bytes ipv6_mld_report(const Mac& src, const std::array<std::uint8_t, 16>& ip_src,
                      std::size_t payload);
Bytes ipv6_icmpv6(const Mac& src, const Mac& dst, const std::array<std::uint8_t, 16>& ip_src,
                  const std::array<std::uint8_t, 16>& ip_dst, std::uint8_t type,
                  std::size_t payload);

}  // namespace iotguard::frames
