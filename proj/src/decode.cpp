#include "iotguard/decode.hpp"

#include <algorithm>
#include <string>

namespace iotguard {

namespace {

constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
constexpr std::uint16_t kEthertypeArp = 0x0806;
constexpr std::uint16_t kEthertypeVlan = 0x8100;
constexpr std::uint16_t kEthertypeQinQ = 0x88A8;
constexpr std::uint16_t kEthertypeIpv6 = 0x86DD;
constexpr std::uint16_t kEthertypeEapol = 0x888E;
constexpr std::uint16_t kMaxLlcLength = 1500;

constexpr std::uint8_t kProtoIcmp = 1;
constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;
constexpr std::uint8_t kProtoIcmpv6 = 58;

constexpr std::uint8_t kIpv4OptEol = 0;
constexpr std::uint8_t kIpv4OptNop = 1;
constexpr std::uint8_t kIpv4OptRouterAlert = 148;

constexpr std::uint8_t kIpv6HopByHop = 0;
constexpr std::uint8_t kIpv6Routing = 43;
constexpr std::uint8_t kIpv6Fragment = 44;
constexpr std::uint8_t kIpv6NoNext = 59;
constexpr std::uint8_t kIpv6DestOpts = 60;
constexpr std::uint8_t kIpv6OptPad1 = 0;
constexpr std::uint8_t kIpv6OptPadN = 1;
constexpr std::uint8_t kIpv6OptRouterAlert = 5;

[[noreturn]] void malformed(const char* what) {
  throw Error(ErrorCode::malformed_frame, std::string("malformed frame: ") + what);
}

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

Mac mac_at(std::span<const std::uint8_t> b, std::size_t at) {
  std::array<std::uint8_t, 6> o{};
  std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(at), 6, o.begin());
  return Mac(o);
}

// `seg` spans the transport header and everything up to the end of the
// network-layer payload.
void decode_transport(std::uint8_t proto, std::span<const std::uint8_t> seg, DecodedPacket& out) {
  switch (proto) {
    case kProtoTcp: {
      if (seg.size() < 20) malformed("tcp header");
      const std::size_t hdr = static_cast<std::size_t>(seg[12] >> 4) * 4;
      if (hdr < 20 || hdr > seg.size()) malformed("tcp data offset");
      out.transport = Transport::tcp;
      out.src_port = be16(seg, 0);
      out.dst_port = be16(seg, 2);
      out.payload_len = seg.size() - hdr;
      return;
    }
    case kProtoUdp: {
      if (seg.size() < 8) malformed("udp header");
      const std::size_t len = be16(seg, 4);
      if (len < 8) malformed("udp length");
      out.transport = Transport::udp;
      out.src_port = be16(seg, 0);
      out.dst_port = be16(seg, 2);
      out.payload_len = std::min(len, seg.size()) - 8;
      return;
    }
    case kProtoIcmp:
    case kProtoIcmpv6: {
      if (seg.size() < 4) malformed("icmp header");
      (proto == kProtoIcmp ? out.icmp : out.icmpv6) = true;
      out.payload_len = seg.size() - std::min<std::size_t>(8, seg.size());
      return;
    }
    default:
      out.payload_len = seg.size();
      return;
  }
}

void decode_ipv4(std::span<const std::uint8_t> b, DecodedPacket& out) {
  if (b.size() < 20) malformed("ipv4 header");
  if ((b[0] >> 4) != 4) malformed("ipv4 version");
  const std::size_t ihl = static_cast<std::size_t>(b[0] & 0x0f) * 4;
  if (ihl < 20 || ihl > b.size()) malformed("ipv4 ihl");
  const std::size_t total = be16(b, 2);
  if (total < ihl) malformed("ipv4 total length");
  const std::size_t end = std::min(total, b.size());

  out.ipv4 = true;
  out.dst_ip = IpAddress(Ipv4(static_cast<std::uint32_t>(b[16]) << 24 |
                              static_cast<std::uint32_t>(b[17]) << 16 |
                              static_cast<std::uint32_t>(b[18]) << 8 | b[19]));

  for (std::size_t i = 20; i < ihl;) {
    const std::uint8_t type = b[i];
    if (type == kIpv4OptEol) {
      out.ip_opt_padding = true;
      break;
    }
    if (type == kIpv4OptNop) {
      out.ip_opt_padding = true;
      ++i;
      continue;
    }
    if (i + 1 >= ihl) malformed("ipv4 option length");
    const std::size_t len = b[i + 1];
    if (len < 2 || i + len > ihl) malformed("ipv4 option length");
    if (type == kIpv4OptRouterAlert) out.ip_opt_router_alert = true;
    i += len;
  }

  const std::uint16_t frag = be16(b, 6);
  const auto payload = b.subspan(ihl, end - ihl);
  if ((frag & 0x1fff) != 0) {
    out.payload_len = payload.size();
    return;
  }
  decode_transport(b[9], payload, out);
}

void scan_ipv6_options(std::span<const std::uint8_t> opts, DecodedPacket& out) {
  for (std::size_t i = 0; i < opts.size();) {
    const std::uint8_t type = opts[i];
    if (type == kIpv6OptPad1) {
      out.ip_opt_padding = true;
      ++i;
      continue;
    }
    if (i + 1 >= opts.size()) malformed("ipv6 option length");
    const std::size_t len = opts[i + 1];
    if (i + 2 + len > opts.size()) malformed("ipv6 option length");
    if (type == kIpv6OptPadN) out.ip_opt_padding = true;
    if (type == kIpv6OptRouterAlert) out.ip_opt_router_alert = true;
    i += 2 + len;
  }
}

void decode_ipv6(std::span<const std::uint8_t> b, DecodedPacket& out) {
  if (b.size() < 40) malformed("ipv6 header");
  if ((b[0] >> 4) != 6) malformed("ipv6 version");
  const std::size_t end = std::min<std::size_t>(40 + be16(b, 4), b.size());

  out.ipv6 = true;
  std::array<std::uint8_t, 16> dst{};
  std::copy_n(b.begin() + 24, 16, dst.begin());
  out.dst_ip = IpAddress::from_v6(dst);

  std::uint8_t next = b[6];
  std::size_t off = 40;
  for (;;) {
    if (next == kIpv6HopByHop || next == kIpv6DestOpts || next == kIpv6Routing) {
      if (off + 2 > end) malformed("ipv6 extension header");
      const std::size_t len = (static_cast<std::size_t>(b[off + 1]) + 1) * 8;
      if (off + len > end) malformed("ipv6 extension header");
      if (next != kIpv6Routing) scan_ipv6_options(b.subspan(off + 2, len - 2), out);
      next = b[off];
      off += len;
    } else if (next == kIpv6Fragment) {
      if (off + 8 > end) malformed("ipv6 fragment header");
      const bool first = (be16(b, off + 2) & 0xfff8) == 0;
      next = b[off];
      off += 8;
      if (!first) {
        out.payload_len = end - off;
        return;
      }
    } else if (next == kIpv6NoNext) {
      out.payload_len = end - off;
      return;
    } else {
      break;
    }
  }
  decode_transport(next, b.subspan(off, end - off), out);
}

}  // namespace

DecodedPacket decode_ethernet(std::span<const std::uint8_t> b) {
  if (b.size() < 14) malformed("ethernet header");
  DecodedPacket out;
  out.frame_size = b.size();
  out.dst_mac = mac_at(b, 0);
  out.src_mac = mac_at(b, 6);

  std::size_t off = 12;
  std::uint16_t type = be16(b, off);
  off += 2;
  while (type == kEthertypeVlan || type == kEthertypeQinQ) {
    if (off + 4 > b.size()) malformed("vlan tag");
    type = be16(b, off + 2);
    off += 4;
  }
  const auto rest = b.subspan(off);

  if (type <= kMaxLlcLength) {
    // 802.3 length field: the frame carries an LLC header.
    const std::size_t len = std::min<std::size_t>(type, rest.size());
    if (len < 3) malformed("llc header");
    out.llc = true;
    out.payload_len = len - 3;
    return out;
  }
  switch (type) {
    case kEthertypeArp:
      if (rest.size() < 28) malformed("arp body");
      out.arp = true;
      return out;
    case kEthertypeEapol: {
      if (rest.size() < 4) malformed("eapol header");
      out.eapol = true;
      out.payload_len = std::min<std::size_t>(be16(rest, 2), rest.size() - 4);
      return out;
    }
    case kEthertypeIpv4:
      decode_ipv4(rest, out);
      return out;
    case kEthertypeIpv6:
      decode_ipv6(rest, out);
      return out;
    default:
      out.payload_len = rest.size();
      return out;
  }
}

DecodedPacket decode_frame(const RawFrame& frame) {
  if (frame.link_type != LinkType::ethernet) {
    throw Error(ErrorCode::unsupported_link_type, "only ethernet frames are supported");
  }
  return decode_ethernet(frame.bytes);
}

}  // namespace iotguard
