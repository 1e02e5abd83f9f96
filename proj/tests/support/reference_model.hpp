#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvstab/clock.hpp"
#include "pvstab/metrics.hpp"
#include "pvstab/route.hpp"

namespace pvstab::testkit {

/// Everything the reference model knows after one tick. Recomputed by
/// walking every table every tick, with its own selection and counters.
struct ReferenceTick {
  Tick tick = 0;
  std::map<std::pair<std::string, Prefix>, Phi> adj_phi;  // after purge
  std::map<Prefix, Phi> loc_phi;
  std::map<Prefix, std::string> loc_peer;
  std::map<Prefix, std::string> lane_peer;

  double rt_mu = 0;
  double rt_sigma2 = 0;
  double lane_mu = 0;
  double lane_sigma2 = 0;

  std::size_t stable_n = 0;
  double stable_mu = 0;
  double stable_sigma2 = 0;
  double stable_max = 0;
  std::size_t sel_n = 0;
  double sel_mu = 0;
  double sel_sigma2 = 0;
  double sel_max = 0;

  std::size_t added = 0;
  std::size_t deleted = 0;
  std::size_t changed = 0;
  std::size_t unchanged = 0;

  std::map<int, std::uint64_t> stretch;
  std::uint64_t lacking = 0;
};

/// Records must be sorted by timestamp; t0 is the first record.
std::vector<ReferenceTick> reference_run(std::span<const UpdateRecord> records,
                                         std::uint32_t mrai_secs,
                                         std::optional<Tick> end_tick = std::nullopt,
                                         int stretch_lo = -16, int stretch_hi = 16);

/// Preference order of the default decision chain, written independently:
/// true when `a` beats `b`.
bool reference_prefers(const AsPath& pa, const AttributeSet& aa, std::uint32_t oa,
                       const AsPath& pb, const AttributeSet& ab, std::uint32_t ob);

/// Population mean and variance by the textbook two-pass formula.
std::pair<double, double> mean_variance(const std::vector<double>& v);

}  // namespace pvstab::testkit
