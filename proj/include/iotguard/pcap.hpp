#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <vector>

#include "iotguard/packet.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

enum class ByteOrder { little, big };

// Classic libpcap file reader. Accepts microsecond and nanosecond magic in
// either byte order; only LINKTYPE_ETHERNET is supported.
class PcapReader {
 public:
  explicit PcapReader(std::istream& in);

  std::optional<RawFrame> next();

  ByteOrder byte_order() const { return order_; }
  std::uint32_t snaplen() const { return snaplen_; }

 private:
  std::uint32_t read_u32(const unsigned char* p) const;

  std::istream& in_;
  ByteOrder order_ = ByteOrder::little;
  bool nanosecond_ = false;
  std::uint32_t snaplen_ = 0;
};

class PcapWriter {
 public:
  PcapWriter(std::ostream& out, ByteOrder order = ByteOrder::little,
             std::uint32_t snaplen = 65535);
  void write(const RawFrame& frame);

 private:
  void put_u16(std::uint16_t v);
  void put_u32(std::uint32_t v);

  std::ostream& out_;
  ByteOrder order_;
};

struct CapturedFrame {
  Mac source;
  RawFrame frame;
};

struct PcapContents {
  std::vector<CapturedFrame> frames;
  // Records too short to carry an ethernet source address.
  std::size_t too_short = 0;
};

PcapContents read_pcap(const std::filesystem::path& path);
PcapContents read_pcap(std::istream& in);
void write_pcap(const std::filesystem::path& path, const std::vector<RawFrame>& frames,
                ByteOrder order = ByteOrder::little);

}  // namespace iotguard
