#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "phaseid/model.hpp"
#include "phaseid/rng.hpp"

namespace phaseid {

/// IEC smart-meter accuracy class. The class bounds the maximal measurement
/// error as a fraction of the nominal value (plain classes) or of the actual
/// reading with a floor at 20% of nominal (s-classes).
struct MeterClass {
  std::string name;
  double delta_class = 0.0;  // maximal error as a fraction, e.g. 0.005 for class 0.5
  bool s_type = false;
};

inline MeterClass meter_class_from_name(std::string_view name) {
  if (name == "0.1") return {"0.1", 0.001, false};
  if (name == "0.2") return {"0.2", 0.002, false};
  if (name == "0.5") return {"0.5", 0.005, false};
  if (name == "1.0") return {"1.0", 0.010, false};
  if (name == "0.2s") return {"0.2s", 0.002, true};
  if (name == "0.5s") return {"0.5s", 0.005, true};
  throw std::invalid_argument("unknown meter class '" + std::string(name) +
                              "' (valid: 0.1, 0.2, 0.5, 1.0, 0.2s, 0.5s)");
}

/// Nominal values and seeding for noise injection. Measurements stay in
/// physical units; p_base only matters in per-unit pipelines and defaults
/// to 1 so the s-class formula reduces to watts.
struct NoiseContext {
  double u_n = 230.0;      // nominal voltage, volts
  double p_n = 14000.0;    // nominal meter power rating, watts
  double p_base = 1.0;     // per-unit normalization base
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;

  /// Transformer meters default to the same class and rating as customer
  /// meters; these override that when set.
  std::optional<MeterClass> transformer_class;
  std::optional<double> transformer_p_n;
};

/// Sigma of voltage error: the class's maximal error (delta * U_n) mapped
/// to 3 sigma of the Gaussian.
inline double sigma_voltage(const MeterClass& mc, const NoiseContext& ctx) {
  return mc.delta_class * ctx.u_n / 3.0;
}

namespace detail {

inline double sigma_power_with(const MeterClass& mc, double reading, double p_n, double p_base) {
  if (!mc.s_type) return mc.delta_class * p_n / 3.0;
  const double loading = std::abs(reading);
  // s-classes scale with the actual loading, floored at 20% of nominal.
  // The proportional branch is extended above 100% of nominal as well.
  const double basis = loading > 0.2 * p_n ? loading : 0.2 * p_n;
  return mc.delta_class * basis / (3.0 * p_base);
}

}  // namespace detail

/// Sigma of power error for one reading.
inline double sigma_power(const MeterClass& mc, double reading, const NoiseContext& ctx) {
  if (!std::isfinite(reading)) throw std::invalid_argument("sigma_power: reading not finite");
  return detail::sigma_power_with(mc, reading, ctx.p_n, ctx.p_base);
}

namespace detail {

// Channel tags keep the per-cell noise streams of the different quantities
// disjoint even when they share a meter id.
inline constexpr std::uint64_t kChanCustomerVoltage = 1;
inline constexpr std::uint64_t kChanCustomerPower = 2;
inline constexpr std::uint64_t kChanTransformerVoltage = 3;
inline constexpr std::uint64_t kChanTransformerPower = 4;
inline constexpr std::uint64_t kChanReferenceVoltage = 5;

inline std::uint64_t cell_key(std::uint64_t seed, std::uint64_t run, std::uint64_t channel,
                              std::uint64_t meter, std::int64_t timestamp) {
  std::uint64_t k = rng::mix(seed, run);
  k = rng::mix(k, channel);
  k = rng::mix(k, meter);
  k = rng::mix(k, static_cast<std::uint64_t>(timestamp));
  return k;
}

}  // namespace detail

/// Standard normal draw for one measurement cell. Keyed by
/// (seed, run_index, channel, meter, timestamp) so the value is invariant
/// to matrix traversal order, windowing, and column dropping.
inline double cell_noise_unit(const NoiseContext& ctx, std::uint64_t channel, std::uint64_t meter,
                              std::int64_t timestamp) {
  return rng::keyed_normal(detail::cell_key(ctx.seed, ctx.run_index, channel, meter, timestamp));
}

/// Adds zero-mean Gaussian measurement error to every present cell of U, H
/// and P (and the voltage references). Truth labels are untouched. Sigma-zero
/// cells are left bit-identical.
inline MeasurementCampaign inject_noise(const MeasurementCampaign& c, const MeterClass& mc,
                                        const NoiseContext& ctx) {
  MeasurementCampaign out = c;
  const MeterClass& tmc = ctx.transformer_class ? *ctx.transformer_class : mc;
  const double t_p_n = ctx.transformer_p_n ? *ctx.transformer_p_n : ctx.p_n;

  const double sv = sigma_voltage(mc, ctx);
  const double stv = sigma_voltage(tmc, ctx);

  if (out.voltage) {
    for (std::size_t i = 0; i < out.n_customers(); ++i) {
      if (!out.voltage->present[i]) continue;
      if (sv == 0.0) break;
      const std::uint64_t meter = rng::hash_string(out.customer_ids[i]);
      auto col = out.voltage->values.col(i);
      for (std::size_t t = 0; t < col.size(); ++t)
        col[t] += sv * cell_noise_unit(ctx, detail::kChanCustomerVoltage, meter, out.timestamps[t]);
    }
  }
  if (out.power) {
    for (std::size_t i = 0; i < out.n_customers(); ++i) {
      if (!out.power->present[i]) continue;
      const std::uint64_t meter = rng::hash_string(out.customer_ids[i]);
      auto col = out.power->values.col(i);
      for (std::size_t t = 0; t < col.size(); ++t) {
        const double sp = detail::sigma_power_with(mc, col[t], ctx.p_n, ctx.p_base);
        if (sp == 0.0) continue;
        col[t] += sp * cell_noise_unit(ctx, detail::kChanCustomerPower, meter, out.timestamps[t]);
      }
    }
  }
  if (out.transformer_voltage && stv != 0.0) {
    for (std::size_t j = 0; j < 3; ++j) {
      const std::uint64_t meter = rng::hash_string(phase_name(phase_at(j)));
      auto col = out.transformer_voltage->col(j);
      for (std::size_t t = 0; t < col.size(); ++t)
        col[t] +=
            stv * cell_noise_unit(ctx, detail::kChanTransformerVoltage, meter, out.timestamps[t]);
    }
  }
  if (out.transformer_power) {
    for (std::size_t j = 0; j < 3; ++j) {
      const std::uint64_t meter = rng::hash_string(phase_name(phase_at(j)));
      auto col = out.transformer_power->col(j);
      for (std::size_t t = 0; t < col.size(); ++t) {
        const double sp = detail::sigma_power_with(tmc, col[t], t_p_n, ctx.p_base);
        if (sp == 0.0) continue;
        col[t] += sp * cell_noise_unit(ctx, detail::kChanTransformerPower, meter, out.timestamps[t]);
      }
    }
  }
  if (out.reference_voltage && sv != 0.0) {
    for (std::size_t j = 0; j < 3; ++j) {
      const std::uint64_t meter = rng::hash_string(phase_name(phase_at(j)));
      auto col = out.reference_voltage->col(j);
      for (std::size_t t = 0; t < col.size(); ++t)
        col[t] +=
            sv * cell_noise_unit(ctx, detail::kChanReferenceVoltage, meter, out.timestamps[t]);
    }
  }
  return out;
}

}  // namespace phaseid
