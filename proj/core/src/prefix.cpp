#include "pvstab/prefix.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <cstring>
#include <stdexcept>

namespace pvstab {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  if (text.empty() || text.size() >= INET6_ADDRSTRLEN) return std::nullopt;
  char buf[INET6_ADDRSTRLEN] = {};
  std::memcpy(buf, text.data(), text.size());

  IpAddress out;
  if (text.find(':') != std::string_view::npos) {
    if (inet_pton(AF_INET6, buf, out.bytes_.data()) != 1) return std::nullopt;
    out.family_ = AddressFamily::V6;
  } else {
    if (inet_pton(AF_INET, buf, out.bytes_.data()) != 1) return std::nullopt;
    out.family_ = AddressFamily::V4;
  }
  return out;
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  const int af = family_ == AddressFamily::V4 ? AF_INET : AF_INET6;
  inet_ntop(af, bytes_.data(), buf, sizeof buf);
  return buf;
}

std::optional<Prefix> Prefix::try_parse(std::string_view text, std::string* why) {
  auto fail = [why](const char* reason) -> std::optional<Prefix> {
    if (why) *why = reason;
    return std::nullopt;
  };

  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return fail("missing '/len'");

  auto addr = IpAddress::parse(text.substr(0, slash));
  if (!addr) return fail("bad address");

  const auto len_text = text.substr(slash + 1);
  int len = -1;
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc{} || ptr != len_text.data() + len_text.size() || len_text.empty()) {
    return fail("bad mask length");
  }
  if (len < 0 || len > addr->max_bits()) return fail("mask length out of range");

  const auto& bytes = addr->bytes();
  for (int bit = len; bit < addr->max_bits(); ++bit) {
    if (bytes[bit / 8] & (0x80u >> (bit % 8))) return fail("host bits set below mask");
  }

  Prefix p;
  p.address_ = *addr;
  p.mask_len_ = static_cast<std::uint8_t>(len);
  return p;
}

Prefix Prefix::parse(std::string_view text) {
  std::string why;
  auto p = try_parse(text, &why);
  if (!p) throw std::invalid_argument("prefix '" + std::string(text) + "': " + why);
  return *p;
}

std::string Prefix::to_string() const {
  return address_.to_string() + "/" + std::to_string(mask_len_);
}

}  // namespace pvstab
