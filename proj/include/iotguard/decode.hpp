#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "iotguard/packet.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

enum class Transport { none, tcp, udp };

// Protocol stack summary of one frame. Payload bytes are never examined,
// only counted.
struct DecodedPacket {
  Mac src_mac;
  Mac dst_mac;

  bool llc = false;
  bool arp = false;
  bool ipv4 = false;
  bool ipv6 = false;
  bool icmp = false;
  bool icmpv6 = false;
  bool eapol = false;
  Transport transport = Transport::none;
  std::optional<std::uint16_t> src_port;
  std::optional<std::uint16_t> dst_port;

  bool ip_opt_padding = false;
  bool ip_opt_router_alert = false;

  std::size_t frame_size = 0;
  // Octets left after the highest header that was parsed.
  std::size_t payload_len = 0;
  std::optional<IpAddress> dst_ip;

  bool is_ip() const { return ipv4 || ipv6; }
};

// Throws Error{malformed_frame} when any parsed header is truncated.
DecodedPacket decode_frame(const RawFrame& frame);
DecodedPacket decode_ethernet(std::span<const std::uint8_t> bytes);

}  // namespace iotguard
