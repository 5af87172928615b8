#pragma once

// Shared helpers for building small hand-made campaigns in tests.

#include <cstdint>
#include <string>
#include <vector>

#include "phaseid/model.hpp"
#include "phaseid/simfeeder.hpp"

namespace testsupport {

inline std::vector<std::int64_t> make_timestamps(std::size_t t_count, int resolution_minutes = 15,
                                                 std::int64_t start = phaseid::kCampaignEpoch) {
  std::vector<std::int64_t> ts(t_count);
  for (std::size_t k = 0; k < t_count; ++k)
    ts[k] = start + static_cast<std::int64_t>(k) * resolution_minutes * 60;
  return ts;
}

inline phaseid::ChannelMatrix full_channel(phaseid::Matrix m) {
  const std::size_t n = m.cols();
  return {std::move(m), std::vector<std::uint8_t>(n, 1)};
}

/// Campaign skeleton with ids c1..cN and uniform timestamps; caller fills
/// the matrices it needs.
inline phaseid::MeasurementCampaign skeleton(std::size_t t_count, std::size_t n_customers,
                                             int resolution_minutes = 15) {
  phaseid::MeasurementCampaign c;
  c.resolution_minutes = resolution_minutes;
  c.timestamps = make_timestamps(t_count, resolution_minutes);
  for (std::size_t i = 0; i < n_customers; ++i) c.customer_ids.push_back("c" + std::to_string(i + 1));
  return c;
}

/// Integer-valued loads with per-customer rectangular events at distinct
/// times, plus the exact per-phase transformer sum (lossless). Integer watts
/// keep every sum and subtraction exact in double arithmetic.
inline phaseid::MeasurementCampaign exact_power_campaign(
    std::size_t t_count, const std::vector<phaseid::Phase>& phases) {
  const std::size_t n = phases.size();
  phaseid::MeasurementCampaign c = skeleton(t_count, n);
  phaseid::Matrix h(t_count, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto col = h.col(i);
    for (std::size_t t = 0; t < t_count; ++t) col[t] = 100.0 + 10.0 * static_cast<double>(i);
    // Two events per customer at customer-specific times.
    const std::size_t e1 = 2 + 7 * i;
    const std::size_t e2 = 5 + 7 * i;
    for (std::size_t t = e1; t < std::min(e1 + 2, t_count); ++t) col[t] += 1000.0 + 50.0 * static_cast<double>(i);
    for (std::size_t t = e2; t < std::min(e2 + 3, t_count); ++t) col[t] += 700.0 + 30.0 * static_cast<double>(i);
  }
  phaseid::Matrix p(t_count, 3);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = h.col(i);
    auto dst = p.col(phaseid::phase_index(phases[i]));
    for (std::size_t t = 0; t < t_count; ++t) dst[t] += src[t];
  }
  c.power = full_channel(std::move(h));
  c.transformer_power = std::move(p);
  for (std::size_t i = 0; i < n; ++i) c.truth[c.customer_ids[i]] = phases[i];
  return c;
}

inline phaseid::FeederSpec quick_preset(char name, int days, int resolution = 15) {
  phaseid::FeederSpec f = phaseid::preset_feeder(name);
  f.days = days;
  f.resolution_minutes = resolution;
  return f;
}

}  // namespace testsupport
