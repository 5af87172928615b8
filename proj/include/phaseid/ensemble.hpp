#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseid/identify.hpp"
#include "phaseid/model.hpp"

namespace phaseid {

/// Settings shared by the two ensemble combiners. The boosting threshold is
/// expressed as a coefficient on the length of the voltage series, so it
/// rescales automatically when the voltage window is shortened.
struct EnsembleConfig {
  double threshold_coefficient = 0.2;
  std::size_t salient_m = 0;  // 0 = derive from the power series length
  ReferenceKind reference = ReferenceKind::transformer;
};

namespace detail {

inline bool voltage_path_available(const MeasurementCampaign& c, ReferenceKind ref) {
  if (!c.voltage || c.voltage->present_count() == 0) return false;
  if (ref == ReferenceKind::transformer) return c.transformer_voltage.has_value();
  return c.reference_voltage.has_value();
}

inline bool power_path_available(const MeasurementCampaign& c) {
  return c.power && c.transformer_power;
}

inline void mark_unassigned(std::vector<PhaseAssignment>& out, const std::vector<std::string>& ids) {
  for (const auto& id : ids)
    out.push_back({id, Phase::a, 0.0, MethodTag::mlp, AssignFlag::unassigned});
}

}  // namespace detail

/// Bagging ensemble: voltage-identified where voltage data exists, and the
/// power-based method over the full transformer power for everyone else.
/// Each assignment's method tag records which path decided it. The
/// two-campaign overload allows voltage and power series of different
/// lengths (separately windowed views of one campaign).
inline std::vector<PhaseAssignment> bagging_assign(const MeasurementCampaign& volt_c,
                                                   const MeasurementCampaign& pow_c,
                                                   const EnsembleConfig& cfg = {}) {
  if (volt_c.customer_ids != pow_c.customer_ids)
    throw std::invalid_argument("bagging_assign: views must describe the same customers");

  std::vector<PhaseAssignment> out;
  std::set<std::string> decided;
  if (detail::voltage_path_available(volt_c, cfg.reference)) {
    auto [assigned, undefined_ids] = detail::mlv_core(volt_c, cfg.reference);
    (void)undefined_ids;  // undefined-correlation customers fall to the power path
    for (auto& a : assigned) decided.insert(a.customer_id);
    out = std::move(assigned);
  }
  std::vector<std::string> rest;
  for (const auto& id : volt_c.customer_ids)
    if (!decided.count(id)) rest.push_back(id);

  if (!rest.empty()) {
    if (detail::power_path_available(pow_c)) {
      auto fallback = mlp_assign(pow_c, cfg.salient_m, rest);
      out.insert(out.end(), fallback.begin(), fallback.end());
    } else {
      detail::mark_unassigned(out, rest);
    }
  }
  detail::sort_by_id(out);
  return out;
}

inline std::vector<PhaseAssignment> bagging_assign(const MeasurementCampaign& c,
                                                   const EnsembleConfig& cfg = {}) {
  return bagging_assign(c, c, cfg);
}

/// Boosting ensemble: customers whose best voltage correlation clears
/// coefficient * T are assigned by voltage; their power profiles are then
/// subtracted from the assigned phases' transformer series, and the
/// power-based method runs on that residual for everyone else.
inline std::vector<PhaseAssignment> boosting_assign(const MeasurementCampaign& volt_c,
                                                    const MeasurementCampaign& pow_c,
                                                    const EnsembleConfig& cfg = {}) {
  if (volt_c.customer_ids != pow_c.customer_ids)
    throw std::invalid_argument("boosting_assign: views must describe the same customers");
  if (!pow_c.transformer_power)
    throw std::invalid_argument("boosting_assign: transformer power required");

  const double threshold =
      cfg.threshold_coefficient * static_cast<double>(volt_c.n_samples());

  std::vector<PhaseAssignment> out;
  std::set<std::string> decided;
  if (detail::voltage_path_available(volt_c, cfg.reference)) {
    const Matrix& refs = detail::reference_matrix(volt_c, cfg.reference);
    const MethodTag tag = cfg.reference == ReferenceKind::transformer ? MethodTag::mlv_transfo
                                                                      : MethodTag::mlv_customer;
    for (std::size_t i = 0; i < volt_c.n_customers(); ++i) {
      if (!volt_c.has_voltage(i)) continue;
      const CorrelationScore ps = pearson_scores(volt_c.voltage->values.col(i), refs);
      if (ps.undefined) continue;  // never confident enough
      const std::size_t j = detail::argmax_phase(ps.score);
      if (ps.score[j] > threshold) {
        out.push_back({volt_c.customer_ids[i], phase_at(j), ps.score[j], tag, AssignFlag::ok});
        decided.insert(volt_c.customer_ids[i]);
      }
    }
  }

  // Subtract confidently-identified demand from the assigned phases.
  Matrix residual = *pow_c.transformer_power;
  for (const auto& a : out) {
    const std::size_t i = *pow_c.customer_index(a.customer_id);
    if (!pow_c.has_power(i)) continue;  // nothing to subtract for this customer
    auto h = pow_c.power->values.col(i);
    auto rc = residual.col(phase_index(a.predicted));
    for (std::size_t t = 0; t < rc.size(); ++t) rc[t] -= h[t];
  }

  std::vector<std::string> rest;
  for (const auto& id : pow_c.customer_ids)
    if (!decided.count(id)) rest.push_back(id);
  if (!rest.empty()) {
    if (pow_c.power) {
      auto fallback = mlp_assign(pow_c, cfg.salient_m, rest, residual);
      out.insert(out.end(), fallback.begin(), fallback.end());
    } else {
      detail::mark_unassigned(out, rest);
    }
  }
  detail::sort_by_id(out);
  return out;
}

inline std::vector<PhaseAssignment> boosting_assign(const MeasurementCampaign& c,
                                                    const EnsembleConfig& cfg = {}) {
  return boosting_assign(c, c, cfg);
}

}  // namespace phaseid
