#include "iotguard/pcap.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace iotguard {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicMicroSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::uint32_t kMagicNanoSwapped = 0x4d3cb2a1;
constexpr std::uint32_t kMaxRecord = 262144;
constexpr std::size_t kGlobalHeaderLen = 24;
constexpr std::size_t kRecordHeaderLen = 16;

[[noreturn]] void corrupt(const char* what) {
  throw Error(ErrorCode::corrupt_header, std::string("pcap: ") + what);
}

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

}  // namespace

PcapReader::PcapReader(std::istream& in) : in_(in) {
  unsigned char hdr[kGlobalHeaderLen];
  in_.read(reinterpret_cast<char*>(hdr), kGlobalHeaderLen);
  if (static_cast<std::size_t>(in_.gcount()) != kGlobalHeaderLen) corrupt("short global header");

  switch (le32(hdr)) {
    case kMagicMicro: order_ = ByteOrder::little; break;
    case kMagicMicroSwapped: order_ = ByteOrder::big; break;
    case kMagicNano: order_ = ByteOrder::little; nanosecond_ = true; break;
    case kMagicNanoSwapped: order_ = ByteOrder::big; nanosecond_ = true; break;
    default: corrupt("bad magic");
  }
  const auto major = order_ == ByteOrder::little ? hdr[4] | hdr[5] << 8 : hdr[4] << 8 | hdr[5];
  if (major != 2) corrupt("unsupported version");
  snaplen_ = read_u32(hdr + 16);
  const std::uint32_t link = read_u32(hdr + 20);
  if ((link & 0xffff) != static_cast<std::uint32_t>(LinkType::ethernet)) {
    throw Error(ErrorCode::unsupported_link_type,
                "pcap: unsupported link type " + std::to_string(link & 0xffff));
  }
}

std::uint32_t PcapReader::read_u32(const unsigned char* p) const {
  const std::uint32_t v = le32(p);
  if (order_ == ByteOrder::little) return v;
  return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

std::optional<RawFrame> PcapReader::next() {
  unsigned char rec[kRecordHeaderLen];
  in_.read(reinterpret_cast<char*>(rec), kRecordHeaderLen);
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return std::nullopt;
  if (got != kRecordHeaderLen) corrupt("truncated record header");

  const std::uint32_t incl = read_u32(rec + 8);
  if (incl > std::max(snaplen_, kMaxRecord)) corrupt("record length exceeds snaplen");

  RawFrame frame;
  frame.ts.sec = read_u32(rec);
  const std::uint32_t frac = read_u32(rec + 4);
  frame.ts.usec = static_cast<std::int32_t>(nanosecond_ ? frac / 1000 : frac);
  frame.bytes.resize(incl);
  in_.read(reinterpret_cast<char*>(frame.bytes.data()), incl);
  if (static_cast<std::uint32_t>(in_.gcount()) != incl) corrupt("truncated record data");
  return frame;
}

PcapWriter::PcapWriter(std::ostream& out, ByteOrder order, std::uint32_t snaplen)
    : out_(out), order_(order) {
  put_u32(kMagicMicro);
  put_u16(2);
  put_u16(4);
  put_u32(0);
  put_u32(0);
  put_u32(snaplen);
  put_u32(static_cast<std::uint32_t>(LinkType::ethernet));
}

void PcapWriter::put_u16(std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  if (order_ == ByteOrder::little) {
    out_.write(b, 2);
  } else {
    const char r[2] = {b[1], b[0]};
    out_.write(r, 2);
  }
}

void PcapWriter::put_u32(std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) {
    const int shift = order_ == ByteOrder::little ? 8 * i : 8 * (3 - i);
    b[i] = static_cast<char>((v >> shift) & 0xff);
  }
  out_.write(b, 4);
}

void PcapWriter::write(const RawFrame& frame) {
  put_u32(static_cast<std::uint32_t>(frame.ts.sec));
  put_u32(static_cast<std::uint32_t>(frame.ts.usec));
  put_u32(static_cast<std::uint32_t>(frame.bytes.size()));
  put_u32(static_cast<std::uint32_t>(frame.bytes.size()));
  out_.write(reinterpret_cast<const char*>(frame.bytes.data()),
             static_cast<std::streamsize>(frame.bytes.size()));
}

PcapContents read_pcap(std::istream& in) {
  PcapReader reader(in);
  PcapContents out;
  while (auto frame = reader.next()) {
    if (frame->bytes.size() < 14) {
      ++out.too_short;
      continue;
    }
    std::array<std::uint8_t, 6> src{};
    std::copy_n(frame->bytes.begin() + 6, 6, src.begin());
    out.frames.push_back({Mac(src), std::move(*frame)});
  }
  return out;
}

PcapContents read_pcap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return read_pcap(in);
}

void write_pcap(const std::filesystem::path& path, const std::vector<RawFrame>& frames,
                ByteOrder order) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  PcapWriter writer(out, order);
  for (const auto& f : frames) writer.write(f);
}

}  // namespace iotguard
