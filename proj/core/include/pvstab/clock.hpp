#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace pvstab {

using Tick = std::int64_t;

/// Buckets timestamps into MRAI-sized ticks counted from `t0`.
class TickClock {
 public:
  explicit TickClock(double t0, std::uint32_t mrai_secs = 30) : t0_(t0), mrai_(mrai_secs) {
    if (mrai_secs == 0) throw std::invalid_argument("mrai_secs must be >= 1");
  }

  double t0() const { return t0_; }
  std::uint32_t mrai_secs() const { return mrai_; }

  /// floor((ts - t0) / mrai); nullopt for timestamps before t0.
  std::optional<Tick> tick_of(double ts) const {
    if (!(ts >= t0_)) return std::nullopt;
    return static_cast<Tick>(std::floor((ts - t0_) / mrai_));
  }

  double tick_start(Tick k) const { return t0_ + static_cast<double>(k) * mrai_; }

 private:
  double t0_;
  std::uint32_t mrai_;
};

}  // namespace pvstab
