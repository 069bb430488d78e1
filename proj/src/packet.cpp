#include "iotguard/packet.hpp"

namespace iotguard {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "arp",  "llc",  "ip",   "icmp", "icmpv6",         "eapol",
    "tcp",  "udp",  "http", "https", "dhcp",          "bootp",
    "ssdp", "dns",  "mdns", "ntp",  "ip_opt_padding", "ip_opt_router_alert",
    "size", "raw_data", "dest_ip_counter", "src_port_class", "dst_port_class",
};

}  // namespace

std::string_view feature_name(Feature f) { return kNames[static_cast<std::size_t>(f)]; }
std::string_view feature_name(std::size_t index) { return kNames.at(index); }

}  // namespace iotguard
