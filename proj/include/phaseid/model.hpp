#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseid/matrix.hpp"
#include "phaseid/phase.hpp"
#include "phaseid/rng.hpp"

namespace phaseid {

/// A T x N channel where individual columns (customers) may be missing.
/// Missing columns are NaN-filled and flagged absent in `present`.
struct ChannelMatrix {
  Matrix values;
  std::vector<std::uint8_t> present;

  std::size_t present_count() const {
    return static_cast<std::size_t>(std::count(present.begin(), present.end(), 1));
  }
};

/// Which algorithm decided a customer's phase.
enum class MethodTag {
  mlv_transfo,
  mlv_customer,
  kmeans,
  mlp,
  bagging,
  boosting,
};

inline std::string method_tag_name(MethodTag m) {
  switch (m) {
    case MethodTag::mlv_transfo: return "mlv-transfo";
    case MethodTag::mlv_customer: return "mlv-customer";
    case MethodTag::kmeans: return "kmeans";
    case MethodTag::mlp: return "mlp";
    case MethodTag::bagging: return "bagging";
    case MethodTag::boosting: return "boosting";
  }
  return "?";
}

inline std::optional<MethodTag> method_tag_from_string(std::string_view s) {
  if (s == "mlv-transfo") return MethodTag::mlv_transfo;
  if (s == "mlv-customer") return MethodTag::mlv_customer;
  if (s == "kmeans") return MethodTag::kmeans;
  if (s == "mlp") return MethodTag::mlp;
  if (s == "bagging") return MethodTag::bagging;
  if (s == "boosting") return MethodTag::boosting;
  return std::nullopt;
}

enum class AssignFlag : std::uint8_t {
  ok,
  /// Input series had zero variance; the prediction is a deterministic
  /// fallback, not a correlation result.
  undefined_correlation,
  /// No usable data for this customer; counts as incorrect in accuracy.
  unassigned,
};

struct PhaseAssignment {
  std::string customer_id;
  Phase predicted = Phase::a;
  double score = 0.0;
  MethodTag method = MethodTag::mlv_transfo;
  AssignFlag flag = AssignFlag::ok;
};

/// A measurement campaign: per-customer voltage (U) and power (H) series,
/// per-phase transformer series (P and the voltage references), and
/// optional ground-truth labels. All present matrices share the same T.
struct MeasurementCampaign {
  std::vector<std::int64_t> timestamps;  // epoch seconds, strictly increasing, uniform
  int resolution_minutes = 15;
  std::vector<std::string> customer_ids;

  std::optional<ChannelMatrix> voltage;        // U, T x N
  std::optional<ChannelMatrix> power;          // H, T x N
  std::optional<Matrix> transformer_voltage;   // T x 3, columns a,b,c
  std::optional<Matrix> transformer_power;     // P, T x 3
  std::optional<Matrix> reference_voltage;     // T x 3, a three-phase reference customer

  std::map<std::string, Phase> truth;  // empty when labels unknown

  std::size_t n_samples() const { return timestamps.size(); }
  std::size_t n_customers() const { return customer_ids.size(); }

  bool has_voltage(std::size_t i) const { return voltage && voltage->present[i] != 0; }
  bool has_power(std::size_t i) const { return power && power->present[i] != 0; }

  std::size_t samples_per_day() const {
    return static_cast<std::size_t>(24 * 60 / resolution_minutes);
  }

  std::optional<std::size_t> customer_index(std::string_view id) const {
    for (std::size_t i = 0; i < customer_ids.size(); ++i)
      if (customer_ids[i] == id) return i;
    return std::nullopt;
  }
};

namespace detail {

inline void check_channel(const MeasurementCampaign& c, const ChannelMatrix& ch,
                          const char* name, std::vector<std::string>& out) {
  if (ch.values.rows() != c.n_samples())
    out.push_back(std::string("T mismatch: ") + name + " " + std::to_string(ch.values.rows()) +
                  " vs timestamps " + std::to_string(c.n_samples()));
  if (ch.values.cols() != c.n_customers())
    out.push_back(std::string(name) + " column count " + std::to_string(ch.values.cols()) +
                  " != customer count " + std::to_string(c.n_customers()));
  if (ch.present.size() != c.n_customers())
    out.push_back(std::string(name) + " presence mask size mismatch");
  // Present columns must be fully populated; absent columns are tolerated
  // whatever their fill (they are never read).
  const std::size_t ncols = std::min(ch.values.cols(), ch.present.size());
  for (std::size_t i = 0; i < ncols; ++i) {
    if (!ch.present[i]) continue;
    auto col = ch.values.col(i);
    for (std::size_t t = 0; t < col.size(); ++t) {
      if (!std::isfinite(col[t])) {
        out.push_back(std::string(name) + " column " + std::to_string(i) +
                      " has non-finite value at row " + std::to_string(t));
        break;
      }
    }
  }
}

inline void check_phase_matrix(const MeasurementCampaign& c, const Matrix& m, const char* name,
                               std::vector<std::string>& out) {
  if (m.rows() != c.n_samples())
    out.push_back(std::string("T mismatch: ") + name + " " + std::to_string(m.rows()) +
                  " vs timestamps " + std::to_string(c.n_samples()));
  if (m.cols() != 3) out.push_back(std::string(name) + " must have 3 columns (a,b,c)");
}

}  // namespace detail

/// Checks every structural invariant; returns human-readable violations.
/// An empty list means the campaign is consistent.
inline std::vector<std::string> validate_campaign(const MeasurementCampaign& c) {
  std::vector<std::string> out;
  if (c.resolution_minutes <= 0) out.push_back("resolution must be positive");
  const std::int64_t step = static_cast<std::int64_t>(c.resolution_minutes) * 60;
  for (std::size_t k = 1; k < c.timestamps.size(); ++k) {
    if (c.timestamps[k] <= c.timestamps[k - 1]) {
      out.push_back("timestamps not strictly increasing at index " + std::to_string(k));
      break;
    }
    if (c.timestamps[k] - c.timestamps[k - 1] != step) {
      out.push_back("non-uniform step at index " + std::to_string(k));
      break;
    }
  }
  if (c.voltage) detail::check_channel(c, *c.voltage, "voltage", out);
  if (c.power) detail::check_channel(c, *c.power, "power", out);
  if (c.transformer_voltage)
    detail::check_phase_matrix(c, *c.transformer_voltage, "transformer_voltage", out);
  if (c.transformer_power)
    detail::check_phase_matrix(c, *c.transformer_power, "transformer_power", out);
  if (c.reference_voltage)
    detail::check_phase_matrix(c, *c.reference_voltage, "reference_voltage", out);
  for (const auto& [id, ph] : c.truth) {
    (void)ph;
    if (!c.customer_index(id))
      out.push_back("truth labels unknown customer '" + id + "'");
  }
  return out;
}

namespace detail {

inline MeasurementCampaign slice_campaign_rows(const MeasurementCampaign& c, std::size_t start,
                                               std::size_t count) {
  MeasurementCampaign out;
  out.resolution_minutes = c.resolution_minutes;
  out.customer_ids = c.customer_ids;
  out.truth = c.truth;
  out.timestamps.assign(c.timestamps.begin() + static_cast<std::ptrdiff_t>(start),
                        c.timestamps.begin() + static_cast<std::ptrdiff_t>(start + count));
  if (c.voltage) out.voltage = ChannelMatrix{c.voltage->values.slice_rows(start, count), c.voltage->present};
  if (c.power) out.power = ChannelMatrix{c.power->values.slice_rows(start, count), c.power->present};
  if (c.transformer_voltage) out.transformer_voltage = c.transformer_voltage->slice_rows(start, count);
  if (c.transformer_power) out.transformer_power = c.transformer_power->slice_rows(start, count);
  if (c.reference_voltage) out.reference_voltage = c.reference_voltage->slice_rows(start, count);
  return out;
}

}  // namespace detail

/// Restricts the campaign to `days` whole days beginning at sample `start`.
/// All present matrices are sliced to the same rows; IDs and labels are kept.
inline MeasurementCampaign window(const MeasurementCampaign& c, std::size_t start,
                                  std::size_t days) {
  const std::size_t count = days * c.samples_per_day();
  if (start >= c.n_samples() || start + count > c.n_samples())
    throw std::out_of_range("window: requested range [" + std::to_string(start) + ", " +
                            std::to_string(start + count) + ") exceeds T=" +
                            std::to_string(c.n_samples()));
  return detail::slice_campaign_rows(c, start, count);
}

/// Keeps voltage data for a seeded uniform subset of ceil(keep_fraction * N)
/// customers and marks the rest absent. Power data is untouched. The retained
/// set is a prefix of one seeded permutation, so sets are nested across
/// fractions for a fixed seed.
inline MeasurementCampaign drop_voltage_columns(const MeasurementCampaign& c, double keep_fraction,
                                                std::uint64_t seed) {
  if (!c.voltage) throw std::invalid_argument("drop_voltage_columns: campaign has no voltage data");
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0))
    throw std::invalid_argument("drop_voltage_columns: keep_fraction outside [0,1]");
  const std::size_t n = c.n_customers();
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil(keep_fraction * static_cast<double>(n)) + 0.5);
  if (keep >= n) return c;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng::Stream stream(rng::mix(seed, rng::hash_string("drop_voltage_columns")));
  stream.shuffle(order);

  std::vector<std::uint8_t> retain(n, 0);
  for (std::size_t k = 0; k < keep; ++k) retain[order[k]] = 1;

  MeasurementCampaign out = c;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    if (retain[i]) continue;
    out.voltage->present[i] = 0;
    auto col = out.voltage->values.col(i);
    std::fill(col.begin(), col.end(), nan);
  }
  return out;
}

}  // namespace phaseid
