#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace iotguard {

enum class LinkType : std::uint32_t { ethernet = 1 };

struct Timestamp {
  std::int64_t sec = 0;
  std::int32_t usec = 0;

  double seconds() const { return static_cast<double>(sec) + usec * 1e-6; }
  auto operator<=>(const Timestamp&) const = default;
};

struct RawFrame {
  Timestamp ts;
  LinkType link_type = LinkType::ethernet;
  std::vector<std::uint8_t> bytes;

  bool operator==(const RawFrame&) const = default;
};

// Per-packet features in table order. Everything is an integer; the
// protocol and option flags are 0/1.
enum class Feature : std::size_t {
  arp,
  llc,
  ip,
  icmp,
  icmpv6,
  eapol,
  tcp,
  udp,
  http,
  https,
  dhcp,
  bootp,
  ssdp,
  dns,
  mdns,
  ntp,
  ip_opt_padding,
  ip_opt_router_alert,
  size,
  raw_data,
  dest_ip_counter,
  src_port_class,
  dst_port_class,
};

inline constexpr std::size_t kFeatureCount = 23;

std::string_view feature_name(Feature f);
std::string_view feature_name(std::size_t index);

struct PacketFeatures {
  std::array<std::int32_t, kFeatureCount> values{};

  std::int32_t operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  std::int32_t& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

  bool operator==(const PacketFeatures&) const = default;
  auto operator<=>(const PacketFeatures&) const = default;
};

}  // namespace iotguard
