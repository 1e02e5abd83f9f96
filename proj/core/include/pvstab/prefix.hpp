#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pvstab {

enum class AddressFamily : std::uint8_t { V4 = 4, V6 = 6 };

/// An IPv4 or IPv6 address. IPv4 addresses occupy the first four bytes.
class IpAddress {
 public:
  IpAddress() = default;

  /// Returns std::nullopt when `text` is not a literal v4/v6 address.
  static std::optional<IpAddress> parse(std::string_view text);

  AddressFamily family() const { return family_; }
  const std::array<std::uint8_t, 16>& bytes() const { return bytes_; }
  int max_bits() const { return family_ == AddressFamily::V4 ? 32 : 128; }
  std::string to_string() const;

  friend auto operator<=>(const IpAddress&, const IpAddress&) = default;

 private:
  AddressFamily family_ = AddressFamily::V4;
  std::array<std::uint8_t, 16> bytes_{};
};

/// A destination network. Host bits below the mask are always zero.
class Prefix {
 public:
  Prefix() = default;

  /// Parses "a.b.c.d/len" or "x::/len". Throws std::invalid_argument with a
  /// reason on a bad address, an out-of-range length, or non-zero host bits.
  static Prefix parse(std::string_view text);
  static std::optional<Prefix> try_parse(std::string_view text, std::string* why = nullptr);

  const IpAddress& address() const { return address_; }
  AddressFamily family() const { return address_.family(); }
  int mask_len() const { return mask_len_; }
  std::string to_string() const;

  friend auto operator<=>(const Prefix&, const Prefix&) = default;

 private:
  IpAddress address_;
  std::uint8_t mask_len_ = 0;
};

}  // namespace pvstab
