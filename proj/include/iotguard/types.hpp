#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iotguard {

enum class ErrorCode {
  malformed_frame,
  unsupported_link_type,
  corrupt_header,
  empty_session,
  empty_input,
  schema_mismatch,
  corrupt_file,
  insufficient_data,
  dimension_mismatch,
  empty_registry,
  duplicate_type,
  version_mismatch,
  both_empty,
  no_references,
  invalid_argument,
  restricted_without_permitted_ips,
  capacity_exceeded,
  insufficient_fingerprints,
  io_error,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// 48-bit link-layer address.
class Mac {
 public:
  constexpr Mac() = default;
  constexpr explicit Mac(std::array<std::uint8_t, 6> octets) : octets_(octets) {}

  // Accepts "aa:bb:cc:dd:ee:ff" or "AA-BB-CC-DD-EE-FF".
  static std::optional<Mac> parse(std::string_view text);

  // Dash-separated upper case, the form used in enforcement rules.
  std::string to_string() const;

  const std::array<std::uint8_t, 6>& octets() const { return octets_; }
  std::uint64_t as_u64() const;

  auto operator<=>(const Mac&) const = default;

 private:
  std::array<std::uint8_t, 6> octets_{};
};

class Ipv4 {
 public:
  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t host_order) : value_(host_order) {}
  constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) |
               (std::uint32_t{c} << 8) | d) {}

  static std::optional<Ipv4> parse(std::string_view text);
  std::string to_string() const;
  constexpr std::uint32_t value() const { return value_; }

  auto operator<=>(const Ipv4&) const = default;

 private:
  std::uint32_t value_ = 0;
};

// Either family; IPv4 is stored v4-mapped so the two never collide.
class IpAddress {
 public:
  IpAddress() = default;
  explicit IpAddress(Ipv4 v4);
  static IpAddress from_v6(const std::array<std::uint8_t, 16>& bytes);

  bool is_v4() const;
  std::string to_string() const;
  const std::array<std::uint8_t, 16>& bytes() const { return bytes_; }

  auto operator<=>(const IpAddress&) const = default;

 private:
  std::array<std::uint8_t, 16> bytes_{};
};

// make + model + software version. Restricted to characters that need no
// escaping in the CSV and JSON files.
class DeviceTypeId {
 public:
  DeviceTypeId() = default;
  explicit DeviceTypeId(std::string id);

  const std::string& str() const { return id_; }
  auto operator<=>(const DeviceTypeId&) const = default;

 private:
  std::string id_;
};

}  // namespace iotguard

template <>
struct std::hash<iotguard::Mac> {
  std::size_t operator()(const iotguard::Mac& mac) const noexcept {
    return std::hash<std::uint64_t>{}(mac.as_u64());
  }
};

template <>
struct std::hash<iotguard::Ipv4> {
  std::size_t operator()(const iotguard::Ipv4& ip) const noexcept {
    return std::hash<std::uint32_t>{}(ip.value());
  }
};
