#include "iotguard/types.hpp"

#include <arpa/inet.h>

#include <cctype>
#include <cstdio>

namespace iotguard {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_frame: return "MalformedFrame";
    case ErrorCode::unsupported_link_type: return "UnsupportedLinkType";
    case ErrorCode::corrupt_header: return "CorruptHeader";
    case ErrorCode::empty_session: return "EmptySession";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::schema_mismatch: return "SchemaMismatch";
    case ErrorCode::corrupt_file: return "CorruptFile";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::empty_registry: return "EmptyRegistry";
    case ErrorCode::duplicate_type: return "DuplicateType";
    case ErrorCode::version_mismatch: return "VersionMismatch";
    case ErrorCode::both_empty: return "BothEmpty";
    case ErrorCode::no_references: return "NoReferences";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::restricted_without_permitted_ips: return "RestrictedWithoutPermittedIps";
    case ErrorCode::capacity_exceeded: return "CapacityExceeded";
    case ErrorCode::insufficient_fingerprints: return "InsufficientFingerprints";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::optional<Mac> Mac::parse(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  const char sep = text[2];
  if (sep != ':' && sep != '-') return std::nullopt;
  std::array<std::uint8_t, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t at = i * 3;
    if (i > 0 && text[at - 1] != sep) return std::nullopt;
    const int hi = hex_value(text[at]);
    const int lo = hex_value(text[at + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return Mac(out);
}

std::string Mac::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02X-%02X-%02X-%02X-%02X-%02X", octets_[0], octets_[1],
                octets_[2], octets_[3], octets_[4], octets_[5]);
  return buf;
}

std::uint64_t Mac::as_u64() const {
  std::uint64_t v = 0;
  for (auto o : octets_) v = (v << 8) | o;
  return v;
}

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
  std::uint32_t value = 0;
  int parts = 0;
  std::size_t i = 0;
  while (parts < 4) {
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) {
      return std::nullopt;
    }
    unsigned octet = 0;
    int digits = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      octet = octet * 10 + static_cast<unsigned>(text[i] - '0');
      if (++digits > 3 || octet > 255) return std::nullopt;
      ++i;
    }
    value = (value << 8) | octet;
    ++parts;
    if (parts < 4) {
      if (i >= text.size() || text[i] != '.') return std::nullopt;
      ++i;
    }
  }
  if (i != text.size()) return std::nullopt;
  return Ipv4(value);
}

std::string Ipv4::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (value_ >> 24) & 0xff, (value_ >> 16) & 0xff,
                (value_ >> 8) & 0xff, value_ & 0xff);
  return buf;
}

IpAddress::IpAddress(Ipv4 v4) {
  bytes_[10] = 0xff;
  bytes_[11] = 0xff;
  bytes_[12] = static_cast<std::uint8_t>(v4.value() >> 24);
  bytes_[13] = static_cast<std::uint8_t>(v4.value() >> 16);
  bytes_[14] = static_cast<std::uint8_t>(v4.value() >> 8);
  bytes_[15] = static_cast<std::uint8_t>(v4.value());
}

IpAddress IpAddress::from_v6(const std::array<std::uint8_t, 16>& bytes) {
  IpAddress ip;
  ip.bytes_ = bytes;
  return ip;
}

bool IpAddress::is_v4() const {
  for (int i = 0; i < 10; ++i) {
    if (bytes_[i] != 0) return false;
  }
  return bytes_[10] == 0xff && bytes_[11] == 0xff;
}

std::string IpAddress::to_string() const {
  if (is_v4()) {
    return Ipv4(bytes_[12], bytes_[13], bytes_[14], bytes_[15]).to_string();
  }
  char buf[INET6_ADDRSTRLEN];
  inet_ntop(AF_INET6, bytes_.data(), buf, sizeof buf);
  return buf;
}

DeviceTypeId::DeviceTypeId(std::string id) : id_(std::move(id)) {
  if (id_.empty()) {
    throw Error(ErrorCode::invalid_argument, "device type id must not be empty");
  }
  for (char c : id_) {
    const auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u >= 0x7f || c == ',' || c == '"' || c == '\\') {
      throw Error(ErrorCode::invalid_argument, "device type id has invalid character: " + id_);
    }
  }
}

}  // namespace iotguard
