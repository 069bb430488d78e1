#include "iotguard/frames.hpp"

namespace iotguard::frames {

namespace {

void put16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

void put32(Bytes& b, std::uint32_t v) {
  put16(b, static_cast<std::uint16_t>(v >> 16));
  put16(b, static_cast<std::uint16_t>(v));
}

void put_mac(Bytes& b, const Mac& m) { b.insert(b.end(), m.octets().begin(), m.octets().end()); }

Bytes ethernet(const Mac& src, const Mac& dst, std::uint16_t type) {
  Bytes b;
  b.reserve(128);
  put_mac(b, dst);
  put_mac(b, src);
  put16(b, type);
  return b;
}

Mac multicast_mac_v4(Ipv4 group) {
  const auto v = group.value();
  return Mac({0x01, 0x00, 0x5e, static_cast<std::uint8_t>((v >> 16) & 0x7f),
              static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)});
}

// Appends an IPv4 header whose total length covers `l4_len` more octets.
void ipv4_header(Bytes& b, const Ipv4Header& ip, std::uint8_t proto, std::size_t l4_len) {
  std::vector<std::uint8_t> opts = ip.options;
  while (opts.size() % 4 != 0) opts.push_back(0);
  const std::size_t hlen = 20 + opts.size();
  const std::size_t start = b.size();
  b.push_back(static_cast<std::uint8_t>(0x40 | (hlen / 4)));
  b.push_back(0);
  put16(b, static_cast<std::uint16_t>(hlen + l4_len));
  put16(b, 0x1234);
  put16(b, 0x4000);
  b.push_back(ip.ttl);
  b.push_back(proto);
  put16(b, 0);
  put32(b, ip.src.value());
  put32(b, ip.dst.value());
  b.insert(b.end(), opts.begin(), opts.end());

  std::uint32_t sum = 0;
  for (std::size_t i = start; i < start + hlen; i += 2) sum += (b[i] << 8) | b[i + 1];
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  const auto csum = static_cast<std::uint16_t>(~sum);
  b[start + 10] = static_cast<std::uint8_t>(csum >> 8);
  b[start + 11] = static_cast<std::uint8_t>(csum);
}

void zeros(Bytes& b, std::size_t n) { b.insert(b.end(), n, 0); }

}  // namespace

Bytes arp_request(const Mac& src, Ipv4 sender, Ipv4 target, std::size_t trailer) {
  Bytes b = ethernet(src, kBroadcast, 0x0806);
  put16(b, 1);
  put16(b, 0x0800);
  b.push_back(6);
  b.push_back(4);
  put16(b, 1);
  put_mac(b, src);
  put32(b, sender.value());
  zeros(b, 6);
  put32(b, target.value());
  zeros(b, trailer);
  return b;
}

Bytes eapol(const Mac& src, const Mac& dst, std::uint16_t body_len) {
  Bytes b = ethernet(src, dst, 0x888E);
  b.push_back(2);  // 802.1X-2004
  b.push_back(3);  // EAPOL-Key
  put16(b, body_len);
  zeros(b, body_len);
  return b;
}

Bytes llc(const Mac& src, const Mac& dst, std::uint16_t payload) {
  Bytes b = ethernet(src, dst, static_cast<std::uint16_t>(3 + payload));
  b.push_back(0x42);
  b.push_back(0x42);
  b.push_back(0x03);
  zeros(b, payload);
  return b;
}

Bytes ipv4_udp(const Mac& src, const Mac& dst, const Ipv4Header& ip, std::uint16_t sport,
               std::uint16_t dport, std::size_t payload) {
  Bytes b = ethernet(src, dst, 0x0800);
  ipv4_header(b, ip, 17, 8 + payload);
  put16(b, sport);
  put16(b, dport);
  put16(b, static_cast<std::uint16_t>(8 + payload));
  put16(b, 0);
  zeros(b, payload);
  return b;
}

Bytes ipv4_tcp(const Mac& src, const Mac& dst, const Ipv4Header& ip, std::uint16_t sport,
               std::uint16_t dport, std::size_t payload) {
  Bytes b = ethernet(src, dst, 0x0800);
  ipv4_header(b, ip, 6, 20 + payload);
  put16(b, sport);
  put16(b, dport);
  put32(b, 1);
  put32(b, 0);
  b.push_back(0x50);
  b.push_back(payload == 0 ? 0x02 : 0x18);  // SYN, or PSH|ACK with data
  put16(b, 65535);
  put16(b, 0);
  put16(b, 0);
  zeros(b, payload);
  return b;
}

Bytes ipv4_icmp_echo(const Mac& src, const Mac& dst, const Ipv4Header& ip, std::size_t payload) {
  Bytes b = ethernet(src, dst, 0x0800);
  ipv4_header(b, ip, 1, 8 + payload);
  b.push_back(8);
  b.push_back(0);
  put16(b, 0);
  put16(b, 1);
  put16(b, 1);
  zeros(b, payload);
  return b;
}

Bytes ipv4_igmp_report(const Mac& src, Ipv4 ip_src, Ipv4 group, std::size_t payload) {
  Bytes b = ethernet(src, multicast_mac_v4(group), 0x0800);
  Ipv4Header ip{ip_src, group, 1, {148, 4, 0, 0}};
  ipv4_header(b, ip, 2, 8 + payload);
  b.push_back(0x16);
  b.push_back(0);
  put16(b, 0);
  put32(b, group.value());
  zeros(b, payload);
  return b;
}

Bytes ipv6_icmpv6(const Mac& src, const Mac& dst, const std::array<std::uint8_t, 16>& ip_src,
                  const std::array<std::uint8_t, 16>& ip_dst, std::uint8_t type,
                  std::size_t payload) {
  Bytes b = ethernet(src, dst, 0x86DD);
  put32(b, 0x60000000);
  put16(b, static_cast<std::uint16_t>(8 + payload));
  b.push_back(58);
  b.push_back(255);
  b.insert(b.end(), ip_src.begin(), ip_src.end());
  b.insert(b.end(), ip_dst.begin(), ip_dst.end());
  b.push_back(type);
  b.push_back(0);
  put16(b, 0);
  put32(b, 0);
  zeros(b, payload);
  return b;
}

Bytes ipv6_mld_report(const Mac& src, const std::array<std::uint8_t, 16>& ip_src,
                      std::size_t payload) {
  const std::array<std::uint8_t, 16> all_mld_routers = {0xff, 0x02, 0, 0, 0, 0, 0, 0,
                                                        0,    0,    0, 0, 0, 0, 0, 0x16};
  Bytes b = ethernet(src, Mac({0x33, 0x33, 0, 0, 0, 0x16}), 0x86DD);
  put32(b, 0x60000000);
  put16(b, static_cast<std::uint16_t>(8 + 8 + payload));
  b.push_back(0);  // hop-by-hop
  b.push_back(1);
  b.insert(b.end(), ip_src.begin(), ip_src.end());
  b.insert(b.end(), all_mld_routers.begin(), all_mld_routers.end());
  // Hop-by-hop: next=ICMPv6, len=0, router alert (MLD), PadN(0).
  const std::uint8_t hbh[8] = {58, 0, 5, 2, 0, 0, 1, 0};
  b.insert(b.end(), hbh, hbh + 8);
  b.push_back(143);
  b.push_back(0);
  put16(b, 0);
  put32(b, 0);
  zeros(b, payload);
  return b;
}

}  // namespace iotguard::frames
