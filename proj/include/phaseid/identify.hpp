#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseid/matrix.hpp"
#include "phaseid/model.hpp"
#include "phaseid/rng.hpp"

namespace phaseid {

/// Voltage/power series are correlated with references using the
/// unnormalized standardized-product sum: s = sum_t z_x(t) * z_y(t) with
/// z the deviation over the population standard deviation. This equals
/// T * rho with rho the textbook Pearson coefficient; the unnormalized
/// form is the one the ensemble threshold (coefficient * T) applies to.
struct CorrelationScore {
  std::array<double, 3> score{0.0, 0.0, 0.0};
  bool undefined = false;  // zero-variance input; scores are meaningless
};

inline double score_as_rho(double score, std::size_t t_count) {
  return score / static_cast<double>(t_count);
}

namespace detail {

inline double mean_of(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m += v;
  return m / static_cast<double>(x.size());
}

inline double population_std(std::span<const double> x, double mean) {
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

/// Unnormalized correlation of two equal-length series; nullopt when either
/// side has zero variance.
inline std::optional<double> standardized_product_sum(std::span<const double> x,
                                                      std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  const double sx = population_std(x, mx);
  const double sy = population_std(y, my);
  if (sx == 0.0 || sy == 0.0) return std::nullopt;
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) s += ((x[t] - mx) / sx) * ((y[t] - my) / sy);
  return s;
}

inline std::size_t argmax_phase(const std::array<double, 3>& s) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < 3; ++j)
    if (s[j] > s[best]) best = j;  // ties keep the lower phase (a < b < c)
  return best;
}

inline void sort_by_id(std::vector<PhaseAssignment>& v) {
  std::sort(v.begin(), v.end(),
            [](const PhaseAssignment& a, const PhaseAssignment& b) {
              return a.customer_id < b.customer_id;
            });
}

}  // namespace detail

/// Correlation of one customer series against the three per-phase reference
/// series. Flags undefined when the customer or any reference has zero
/// variance.
inline CorrelationScore pearson_scores(std::span<const double> series, const Matrix& refs) {
  if (series.size() < 2) throw std::invalid_argument("pearson_scores: need at least 2 samples");
  if (refs.rows() != series.size() || refs.cols() != 3)
    throw std::invalid_argument("pearson_scores: reference must be T x 3");
  CorrelationScore out;
  for (std::size_t j = 0; j < 3; ++j) {
    auto s = detail::standardized_product_sum(series, refs.col(j));
    if (!s) {
      out.undefined = true;
      out.score = {0.0, 0.0, 0.0};
      return out;
    }
    out.score[j] = *s;
  }
  return out;
}

/// How many salient components to keep when the caller does not pin m.
inline std::size_t default_salient_m(std::size_t t_count) {
  const std::size_t scaled =
      static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(t_count - 1)));
  return std::max<std::size_t>(10, scaled);
}

/// The m largest power variations of one customer and the matching
/// transformer variations per phase.
struct SalientSet {
  std::vector<std::size_t> indices;  // positions in the first-difference series, ascending
  std::vector<double> sh;
  std::array<std::vector<double>, 3> sp;
};

/// Extracts the m largest-magnitude first differences of `h` and the
/// transformer-phase differences at the same positions. Ties are broken
/// toward earlier indices.
inline SalientSet salient_components(std::span<const double> h, const Matrix& p, std::size_t m) {
  if (h.size() < 2) throw std::invalid_argument("salient_components: need at least 2 samples");
  if (m < 1) throw std::invalid_argument("salient_components: m must be >= 1");
  if (p.rows() != h.size() || p.cols() != 3)
    throw std::invalid_argument("salient_components: transformer matrix must be T x 3");

  const std::size_t nd = h.size() - 1;
  std::vector<double> dh(nd);
  for (std::size_t t = 0; t < nd; ++t) dh[t] = h[t + 1] - h[t];

  const std::size_t k = std::min(m, nd);
  std::vector<std::size_t> idx(nd);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ma = std::abs(dh[a]);
                      const double mb = std::abs(dh[b]);
                      if (ma != mb) return ma > mb;
                      return a < b;
                    });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  SalientSet out;
  out.indices = std::move(idx);
  out.sh.reserve(k);
  for (std::size_t q : out.indices) out.sh.push_back(dh[q]);
  for (std::size_t j = 0; j < 3; ++j) {
    out.sp[j].reserve(k);
    for (std::size_t q : out.indices) out.sp[j].push_back(p(q + 1, j) - p(q, j));
  }
  return out;
}

/// Mean absolute value; orders customers in the power-based greedy pass.
inline double mav(std::span<const double> h) {
  if (h.empty()) throw std::invalid_argument("mav: empty series");
  double s = 0.0;
  for (double v : h) s += std::abs(v);
  return s / static_cast<double>(h.size());
}

/// Greedy power-based identification: customers in descending-MAV order are
/// correlated (salient components only) against the per-phase transformer
/// residual, assigned to the best phase, and their full profile subtracted
/// from that phase's residual before the next customer.
///
/// `subset` restricts which customers are assigned (the ensembles use this);
/// `initial_residual` replaces the transformer power as the starting
/// residual. Customers without power data are flagged unassigned.
inline std::vector<PhaseAssignment> mlp_assign(
    const MeasurementCampaign& c, std::size_t m = 0,
    const std::optional<std::vector<std::string>>& subset = std::nullopt,
    const std::optional<Matrix>& initial_residual = std::nullopt) {
  if (!c.power || !c.transformer_power)
    throw std::invalid_argument("mlp_assign: power and transformer power data required");
  if (c.n_samples() < 2) throw std::invalid_argument("mlp_assign: need at least 2 samples");

  std::vector<std::size_t> wanted;
  if (subset) {
    for (const auto& id : *subset) {
      auto i = c.customer_index(id);
      if (!i) throw std::invalid_argument("mlp_assign: unknown customer '" + id + "'");
      wanted.push_back(*i);
    }
  } else {
    wanted.resize(c.n_customers());
    std::iota(wanted.begin(), wanted.end(), 0);
  }

  std::vector<PhaseAssignment> out;
  std::vector<std::size_t> processable;
  for (std::size_t i : wanted) {
    if (c.has_power(i)) {
      processable.push_back(i);
    } else {
      out.push_back({c.customer_ids[i], Phase::a, 0.0, MethodTag::mlp, AssignFlag::unassigned});
    }
  }

  std::vector<double> mavs(c.n_customers(), 0.0);
  for (std::size_t i : processable) mavs[i] = mav(c.power->values.col(i));
  std::sort(processable.begin(), processable.end(), [&](std::size_t a, std::size_t b) {
    if (mavs[a] != mavs[b]) return mavs[a] > mavs[b];
    return c.customer_ids[a] < c.customer_ids[b];
  });

  Matrix residual = initial_residual ? *initial_residual : *c.transformer_power;
  if (residual.rows() != c.n_samples() || residual.cols() != 3)
    throw std::invalid_argument("mlp_assign: residual must be T x 3");

  const std::size_t m_eff = m == 0 ? default_salient_m(c.n_samples()) : m;
  for (std::size_t i : processable) {
    auto h = c.power->values.col(i);
    const SalientSet sal = salient_components(h, residual, m_eff);
    const double k = static_cast<double>(sal.indices.size());

    std::array<double, 3> scores{};
    bool any_defined = false;
    for (std::size_t j = 0; j < 3; ++j) {
      auto s = detail::standardized_product_sum(sal.sh, sal.sp[j]);
      if (s) {
        scores[j] = *s;
        any_defined = true;
      } else {
        // A phase that is flat at the salient instants never wins; a flat
        // customer makes all three undefined and falls through below.
        scores[j] = -(k + 1.0);
      }
    }

    if (!any_defined) {
      out.push_back(
          {c.customer_ids[i], Phase::a, -k, MethodTag::mlp, AssignFlag::undefined_correlation});
      continue;
    }
    const std::size_t j = detail::argmax_phase(scores);
    out.push_back({c.customer_ids[i], phase_at(j), scores[j], MethodTag::mlp, AssignFlag::ok});

    auto rc = residual.col(j);
    for (std::size_t t = 0; t < rc.size(); ++t) rc[t] -= h[t];
  }
  detail::sort_by_id(out);
  return out;
}

/// Which series to correlate voltage against.
enum class ReferenceKind { transformer, customer };

namespace detail {

inline const Matrix& reference_matrix(const MeasurementCampaign& c, ReferenceKind ref) {
  if (ref == ReferenceKind::transformer) {
    if (!c.transformer_voltage)
      throw std::invalid_argument("mlv_assign: transformer voltage reference missing");
    return *c.transformer_voltage;
  }
  if (!c.reference_voltage)
    throw std::invalid_argument("mlv_assign: three-phase reference customer missing");
  return *c.reference_voltage;
}

/// Pearson pass over all voltage-bearing customers; undefined ones are
/// returned separately for the caller to handle.
inline std::pair<std::vector<PhaseAssignment>, std::vector<std::string>> mlv_core(
    const MeasurementCampaign& c, ReferenceKind ref) {
  const Matrix& refs = reference_matrix(c, ref);
  const MethodTag tag =
      ref == ReferenceKind::transformer ? MethodTag::mlv_transfo : MethodTag::mlv_customer;
  std::vector<PhaseAssignment> out;
  std::vector<std::string> undefined_ids;
  for (std::size_t i = 0; i < c.n_customers(); ++i) {
    if (!c.has_voltage(i)) continue;
    const CorrelationScore ps = pearson_scores(c.voltage->values.col(i), refs);
    if (ps.undefined) {
      undefined_ids.push_back(c.customer_ids[i]);
      continue;
    }
    const std::size_t j = argmax_phase(ps.score);
    out.push_back({c.customer_ids[i], phase_at(j), ps.score[j], tag, AssignFlag::ok});
  }
  return {std::move(out), std::move(undefined_ids)};
}

}  // namespace detail

/// Voltage Pearson identification. Every voltage-bearing customer goes to
/// the phase whose reference correlates highest; customers without voltage
/// data are omitted. Zero-variance customers fall back to the power-based
/// method when power data exists, otherwise to phase a with score -T.
inline std::vector<PhaseAssignment> mlv_assign(const MeasurementCampaign& c, ReferenceKind ref) {
  if (!c.voltage || c.voltage->present_count() == 0) {
    detail::reference_matrix(c, ref);  // still a precondition error if the reference is absent
    return {};
  }
  auto [out, undefined_ids] = detail::mlv_core(c, ref);
  if (!undefined_ids.empty()) {
    std::vector<std::string> power_capable;
    const double t_count = static_cast<double>(c.n_samples());
    for (const auto& id : undefined_ids) {
      const auto i = *c.customer_index(id);
      if (c.power && c.transformer_power && c.has_power(i)) {
        power_capable.push_back(id);
      } else {
        out.push_back({id, Phase::a, -t_count,
                       ref == ReferenceKind::transformer ? MethodTag::mlv_transfo
                                                         : MethodTag::mlv_customer,
                       AssignFlag::undefined_correlation});
      }
    }
    if (!power_capable.empty()) {
      auto fallback = mlp_assign(c, 0, power_capable);
      out.insert(out.end(), fallback.begin(), fallback.end());
    }
  }
  detail::sort_by_id(out);
  return out;
}

struct KmeansOptions {
  double eps = 1e-6;  // stop when the objective improves by no more than this
  int max_iter = 300;
  int restarts = 10;
  std::uint64_t seed = 0;
};

struct ClusteringResult {
  std::vector<std::string> customer_ids;  // clustered (voltage-bearing) customers
  std::vector<int> cluster;               // per entry of customer_ids
  std::array<std::vector<double>, 3> centers;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_history;  // objective after each assignment pass
};

enum class ClusterMapMode { by_reference, best_permutation, unmapped };

struct ClusterPhaseMap {
  std::array<Phase, 3> phase_of_cluster{Phase::a, Phase::b, Phase::c};
  ClusterMapMode mode = ClusterMapMode::unmapped;
};

namespace detail {

inline constexpr std::array<std::array<std::size_t, 3>, 6> kPermutations{{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

struct KmeansRun {
  std::vector<int> cluster;
  std::array<std::vector<double>, 3> centers;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_history;
};

inline double sq_distance(std::span<const double> x, const std::vector<double>& c) {
  double d = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double diff = x[t] - c[t];
    d += diff * diff;
  }
  return d;
}

inline KmeansRun kmeans_single(const std::vector<std::span<const double>>& points,
                               const KmeansOptions& opts, std::uint64_t run_seed) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  rng::Stream stream(run_seed);

  // Initial centers: three distinct random member profiles.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  stream.shuffle(order);
  KmeansRun run;
  for (std::size_t k = 0; k < 3; ++k)
    run.centers[k].assign(points[order[k]].begin(), points[order[k]].end());

  std::vector<int> assign(n, -1);
  std::vector<int> prev(n, -1);
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = sq_distance(points[i], run.centers[0]);
      int best_k = 0;
      for (int k = 1; k < 3; ++k) {
        const double d = sq_distance(points[i], run.centers[k]);
        if (d < best) {
          best = d;
          best_k = k;
        }
      }
      assign[i] = best_k;
      obj += best;
    }
    run.objective_history.push_back(obj);
    run.objective = obj;
    run.iterations = iter;
    if (assign == prev) break;  // fixed point: reassignment changes nothing
    if (opts.eps > 0.0 && prev_obj - obj <= opts.eps) {
      prev = assign;
      break;
    }
    prev = assign;
    prev_obj = obj;

    std::array<std::vector<double>, 3> sums;
    std::array<std::size_t, 3> counts{0, 0, 0};
    for (auto& s : sums) s.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[static_cast<std::size_t>(assign[i])]++;
      auto& s = sums[static_cast<std::size_t>(assign[i])];
      for (std::size_t t = 0; t < dim; ++t) s[t] += points[i][t];
    }
    for (std::size_t k = 0; k < 3; ++k) {
      if (counts[k] == 0) {
        // Re-seed an empty cluster with the member farthest from its center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_distance(points[i], run.centers[static_cast<std::size_t>(assign[i])]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        run.centers[k].assign(points[far].begin(), points[far].end());
        continue;
      }
      for (std::size_t t = 0; t < dim; ++t)
        run.centers[k][t] = sums[k][t] / static_cast<double>(counts[k]);
    }
  }
  run.cluster = prev;
  return run;
}

}  // namespace detail

/// Maps clusters to phases. With transformer references present, the
/// bijection maximizing the summed center-to-reference correlation is used;
/// otherwise, with ground truth available (benchmark mode), the
/// accuracy-maximizing bijection; otherwise clusters keep identity labels.
inline ClusterPhaseMap map_clusters(const ClusteringResult& clusters,
                                    const MeasurementCampaign& c) {
  ClusterPhaseMap out;
  if (c.transformer_voltage) {
    std::array<std::array<double, 3>, 3> score{};
    const double t_count = static_cast<double>(c.n_samples());
    for (std::size_t k = 0; k < 3; ++k) {
      const CorrelationScore ps = pearson_scores(
          std::span<const double>(clusters.centers[k]), *c.transformer_voltage);
      score[k] = ps.undefined ? std::array<double, 3>{-(t_count + 1.0), -(t_count + 1.0),
                                                      -(t_count + 1.0)}
                              : ps.score;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& perm : detail::kPermutations) {
      const double total = score[0][perm[0]] + score[1][perm[1]] + score[2][perm[2]];
      if (total > best) {
        best = total;
        for (std::size_t k = 0; k < 3; ++k) out.phase_of_cluster[k] = phase_at(perm[k]);
      }
    }
    out.mode = ClusterMapMode::by_reference;
    return out;
  }
  if (!c.truth.empty()) {
    std::size_t best = 0;
    bool first = true;
    for (const auto& perm : detail::kPermutations) {
      std::size_t correct = 0;
      for (std::size_t i = 0; i < clusters.customer_ids.size(); ++i) {
        auto it = c.truth.find(clusters.customer_ids[i]);
        if (it == c.truth.end()) continue;
        if (phase_at(perm[static_cast<std::size_t>(clusters.cluster[i])]) == it->second) ++correct;
      }
      if (first || correct > best) {
        best = correct;
        first = false;
        for (std::size_t k = 0; k < 3; ++k) out.phase_of_cluster[k] = phase_at(perm[k]);
      }
    }
    out.mode = ClusterMapMode::best_permutation;
    return out;
  }
  out.mode = ClusterMapMode::unmapped;
  return out;
}

/// K-means over voltage time series (k = 3, one cluster per phase): Lloyd
/// iterations with seeded restarts, keeping the best-objective run. The
/// customer's score is the negated Euclidean distance to its center.
inline std::pair<ClusteringResult, std::vector<PhaseAssignment>> kmeans_assign(
    const MeasurementCampaign& c, const KmeansOptions& opts = {}) {
  std::vector<std::span<const double>> points;
  std::vector<std::string> ids;
  if (c.voltage) {
    for (std::size_t i = 0; i < c.n_customers(); ++i) {
      if (!c.has_voltage(i)) continue;
      points.push_back(c.voltage->values.col(i));
      ids.push_back(c.customer_ids[i]);
    }
  }
  if (points.size() < 3)
    throw std::invalid_argument("kmeans_assign: need at least 3 customers with voltage data");
  if (opts.restarts < 1) throw std::invalid_argument("kmeans_assign: restarts must be >= 1");

  detail::KmeansRun best;
  for (int r = 0; r < opts.restarts; ++r) {
    detail::KmeansRun run =
        detail::kmeans_single(points, opts, rng::mix(opts.seed, static_cast<std::uint64_t>(r)));
    if (r == 0 || run.objective < best.objective) best = std::move(run);
  }

  ClusteringResult result;
  result.customer_ids = ids;
  result.cluster = best.cluster;
  result.centers = best.centers;
  result.objective = best.objective;
  result.iterations = best.iterations;
  result.objective_history = best.objective_history;

  const ClusterPhaseMap mapping = map_clusters(result, c);
  std::vector<PhaseAssignment> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(result.cluster[i]);
    const double dist = std::sqrt(detail::sq_distance(points[i], result.centers[k]));
    out.push_back({ids[i], mapping.phase_of_cluster[k], -dist, MethodTag::kmeans, AssignFlag::ok});
  }
  detail::sort_by_id(out);
  return {std::move(result), std::move(out)};
}

}  // namespace phaseid
