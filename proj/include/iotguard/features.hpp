#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "iotguard/decode.hpp"
#include "iotguard/packet.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

// Maps destination addresses to 1, 2, 3, ... in first-seen order. One
// instance per device session.
class DestIpCounterState {
 public:
  std::int32_t counter_for(const IpAddress& ip);
  std::optional<std::int32_t> find(const IpAddress& ip) const;
  std::size_t size() const { return counters_.size(); }

 private:
  std::map<IpAddress, std::int32_t> counters_;
};

// 0 = no port, 1 = well-known, 2 = registered, 3 = dynamic.
std::int32_t port_class(std::optional<std::uint16_t> port);

PacketFeatures extract_features(const DecodedPacket& pkt, DestIpCounterState& state);

struct TimedFeatures {
  Timestamp ts;
  PacketFeatures features;
};

// Decoded traffic grouped by source MAC, in capture order.
struct DeviceSessions {
  std::map<Mac, std::vector<TimedFeatures>> sessions;
  std::size_t malformed = 0;
};

// Frames that fail to decode are counted and skipped.
DeviceSessions ingest_frames(const std::vector<RawFrame>& frames);

// CSV: mac,packet_index,<23 feature columns>.
void write_features_csv(std::ostream& out, const DeviceSessions& sessions);

}  // namespace iotguard
