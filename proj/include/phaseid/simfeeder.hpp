#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseid/matrix.hpp"
#include "phaseid/model.hpp"
#include "phaseid/rng.hpp"
#include "phaseid/timeutil.hpp"

namespace phaseid {

/// One cable section of the radial feeder tree. Nodes are integer ids;
/// node 0 is always the LV side of the distribution transformer.
struct BranchSection {
  int from = 0;
  int to = 0;
  double length_m = 0.0;
  double impedance_ohm = 0.0;
};

struct CustomerSpec {
  std::string id;
  int node = 0;
  Phase phase = Phase::a;
};

/// Knobs of the synthetic data generator. Defaults are tuned so that the
/// identification methods see the correlation structure they rely on:
/// per-phase upstream fluctuation separates the phase references, and
/// sparse heavy-tailed appliance events give power profiles salient steps.
struct SimOptions {
  double nominal_voltage = 230.0;
  double loss_factor = 0.02;

  double fluct_sigma_common = 1.0;  // V, upstream fluctuation shared by all phases
  double fluct_sigma_phase = 0.4;   // V, additional per-phase fluctuation
  double fluct_ar = 0.97;           // AR(1) coefficient per sample

  double base_noise_frac = 0.15;    // multiplicative wobble on the daily shape
  double events_per_day = 2.0;      // mean appliance events per customer-day
  double event_magnitude_w = 900.0; // Pareto scale of event size
  double event_magnitude_cap_w = 4000.0;
  double event_alpha = 2.2;         // Pareto tail exponent
  int event_max_steps = 6;          // max event duration in samples
};

/// Synthetic radial LV feeder. Aggregate features (user count, main path
/// length, average path impedance, yearly energy) describe the feeder;
/// `sections`/`customers` hold the realized topology once built.
struct FeederSpec {
  std::string name = "custom";
  int n_customers = 0;
  double yearly_energy_per_user_kwh = 0.0;
  double main_path_length_m = 0.0;
  double avg_path_impedance_ohm = 0.0;
  int resolution_minutes = 15;
  int days = 20;
  bool include_reference_customer = true;

  std::vector<BranchSection> sections;
  std::vector<CustomerSpec> customers;
  int reference_node = -1;  // node of the three-phase reference customer, -1 = none
  SimOptions sim;

  bool realized() const { return !sections.empty(); }
};

struct FeederPreset {
  char name;
  int users;
  double yearly_energy_kwh;
  double main_path_m;
  double avg_path_ohm;
};

/// The six representative feeders used as simulator presets.
inline constexpr std::array<FeederPreset, 6> kFeederPresets{{
    {'A', 22, 1852.0, 878.0, 0.206},
    {'B', 125, 1894.0, 245.0, 0.117},
    {'C', 11, 1802.0, 102.0, 0.0598},
    {'D', 20, 4173.0, 138.0, 0.196},
    {'E', 45, 2066.0, 173.0, 0.106},
    {'F', 74, 1905.0, 149.0, 0.0914},
}};

inline FeederSpec preset_feeder(char name) {
  for (const auto& p : kFeederPresets) {
    if (p.name == name) {
      FeederSpec f;
      f.name = std::string(1, name);
      f.n_customers = p.users;
      f.yearly_energy_per_user_kwh = p.yearly_energy_kwh;
      f.main_path_length_m = p.main_path_m;
      f.avg_path_impedance_ohm = p.avg_path_ohm;
      return f;
    }
  }
  throw std::invalid_argument(std::string("unknown feeder preset '") + name + "' (valid: A..F)");
}

namespace detail {

/// Topology indexed for traversal: dense node ids in order from the root.
struct FeederIndex {
  std::vector<int> node_ids;                  // dense index -> original id
  std::vector<std::size_t> parent;            // dense; root's parent = root
  std::vector<double> impedance_to_parent;    // dense; 0 for root
  std::vector<std::size_t> order;             // root-first traversal order
  std::vector<std::size_t> customer_node;     // per customer, dense node index
};

inline FeederIndex index_feeder(const FeederSpec& f) {
  std::map<int, std::size_t> dense;
  dense[0] = 0;
  FeederIndex ix;
  ix.node_ids.push_back(0);
  // First pass: register every node id mentioned.
  for (const auto& s : f.sections) {
    if (dense.emplace(s.to, ix.node_ids.size()).second) ix.node_ids.push_back(s.to);
  }
  for (const auto& s : f.sections) {
    if (!dense.count(s.from))
      throw std::invalid_argument("feeder: section from-node " + std::to_string(s.from) +
                                  " is not the transformer and has no incoming section");
  }
  const std::size_t m = ix.node_ids.size();
  ix.parent.assign(m, 0);
  ix.impedance_to_parent.assign(m, 0.0);
  std::vector<int> indeg(m, 0);
  for (const auto& s : f.sections) {
    if (s.impedance_ohm <= 0.0 || s.length_m <= 0.0)
      throw std::invalid_argument("feeder: section impedance and length must be positive");
    if (s.to == 0) throw std::invalid_argument("feeder: transformer node cannot be a child");
    const std::size_t child = dense.at(s.to);
    ix.parent[child] = dense.at(s.from);
    ix.impedance_to_parent[child] = s.impedance_ohm;
    indeg[child]++;
  }
  for (std::size_t n = 1; n < m; ++n) {
    if (indeg[n] != 1)
      throw std::invalid_argument("feeder: node " + std::to_string(ix.node_ids[n]) +
                                  " must have exactly one incoming section");
  }
  // Root-first order by BFS; also detects disconnected parts / cycles.
  std::vector<std::vector<std::size_t>> children(m);
  for (std::size_t n = 1; n < m; ++n) children[ix.parent[n]].push_back(n);
  ix.order.reserve(m);
  ix.order.push_back(0);
  for (std::size_t q = 0; q < ix.order.size(); ++q)
    for (std::size_t ch : children[ix.order[q]]) ix.order.push_back(ch);
  if (ix.order.size() != m) throw std::invalid_argument("feeder: topology is not a tree rooted at 0");

  ix.customer_node.reserve(f.customers.size());
  for (const auto& cu : f.customers) {
    auto it = dense.find(cu.node);
    if (it == dense.end())
      throw std::invalid_argument("feeder: customer '" + cu.id + "' attached to unknown node " +
                                  std::to_string(cu.node));
    ix.customer_node.push_back(it->second);
  }
  return ix;
}

inline double path_impedance(const FeederIndex& ix, std::size_t node) {
  double z = 0.0;
  while (node != 0) {
    z += ix.impedance_to_parent[node];
    node = ix.parent[node];
  }
  return z;
}

}  // namespace detail

/// Realizes a feeder description into a concrete topology. Presets become a
/// trunk with customers spread along it so that the main-path length and the
/// mean customer path impedance match the requested aggregates; phases are
/// assigned round-robin and then shuffled (counts differ by at most one).
/// A spec that already carries a topology is validated and its aggregates
/// recomputed from the sections.
inline FeederSpec build_feeder(const FeederSpec& spec, std::uint64_t seed) {
  FeederSpec f = spec;
  if (f.n_customers <= 0 && f.customers.empty())
    throw std::invalid_argument("build_feeder: feeder has no customers");
  if (f.resolution_minutes <= 0 || (24 * 60) % f.resolution_minutes != 0)
    throw std::invalid_argument("build_feeder: resolution must divide 24h");

  if (!f.realized()) {
    if (f.main_path_length_m <= 0.0 || f.avg_path_impedance_ohm <= 0.0)
      throw std::invalid_argument("build_feeder: aggregates must be positive");
    const std::size_t n = static_cast<std::size_t>(f.n_customers);
    rng::Stream stream(rng::mix(seed, rng::hash_string("build_feeder")));

    // Stratified positions along the trunk, jittered but strictly increasing.
    std::vector<double> pos(n);
    for (std::size_t i = 0; i < n; ++i)
      pos[i] = (static_cast<double>(i) + 0.3 + 0.4 * stream.next_unit()) / static_cast<double>(n);
    const double mean_pos = std::accumulate(pos.begin(), pos.end(), 0.0) / static_cast<double>(n);
    const double trunk_ohm = f.avg_path_impedance_ohm / mean_pos;

    // Phases round-robin, then shuffled.
    std::vector<Phase> phases(n);
    for (std::size_t i = 0; i < n; ++i) phases[i] = phase_at(i % 3);
    stream.shuffle(phases);

    f.sections.clear();
    f.customers.clear();
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = pos[i] - prev;
      f.sections.push_back({static_cast<int>(i), static_cast<int>(i + 1),
                            dx * f.main_path_length_m, dx * trunk_ohm});
      char buf[16];
      std::snprintf(buf, sizeof(buf), "c%03zu", i + 1);
      f.customers.push_back({buf, static_cast<int>(i + 1), phases[i]});
      prev = pos[i];
    }
    // Close the trunk out to the full main-path length.
    f.sections.push_back({static_cast<int>(n), static_cast<int>(n + 1),
                          (1.0 - prev) * f.main_path_length_m, (1.0 - prev) * trunk_ohm});
    f.reference_node = f.include_reference_customer ? static_cast<int>(n / 2 + 1) : -1;
  }

  const auto ix = detail::index_feeder(f);
  if (!f.customers.empty() && f.n_customers != static_cast<int>(f.customers.size()))
    f.n_customers = static_cast<int>(f.customers.size());
  for (std::size_t i = 0; i < f.customers.size(); ++i)
    for (std::size_t k = i + 1; k < f.customers.size(); ++k)
      if (f.customers[i].id == f.customers[k].id)
        throw std::invalid_argument("build_feeder: duplicate customer id '" + f.customers[i].id + "'");

  // Recompute aggregates from the realized topology.
  std::vector<double> depth(ix.node_ids.size(), 0.0);
  std::map<std::pair<int, int>, double> section_len;
  for (const auto& s : f.sections) section_len[{s.from, s.to}] = s.length_m;
  for (std::size_t q = 1; q < ix.order.size(); ++q) {
    const std::size_t node = ix.order[q];
    const std::size_t par = ix.parent[node];
    depth[node] = depth[par] + section_len[{ix.node_ids[par], ix.node_ids[node]}];
  }
  f.main_path_length_m = *std::max_element(depth.begin(), depth.end());
  double z_sum = 0.0;
  for (std::size_t i = 0; i < f.customers.size(); ++i)
    z_sum += detail::path_impedance(ix, ix.customer_node[i]);
  f.avg_path_impedance_ohm = z_sum / static_cast<double>(f.customers.size());
  return f;
}

namespace detail {

inline int poisson_draw(rng::Stream& s, double lambda) {
  const double limit = std::exp(-lambda);
  double p = 1.0;
  int k = -1;
  do {
    ++k;
    p *= 1.0 - s.next_unit();
  } while (p > limit);
  return k;
}

}  // namespace detail

/// Per-customer load profiles: a daily base shape with multiplicative
/// wobble plus sparse rectangular appliance events with heavy-tailed
/// magnitudes. Each profile is scaled so its annualized mean energy equals
/// the feeder's yearly energy per user. All values are non-negative watts.
inline Matrix synth_loads(const FeederSpec& f, std::uint64_t seed) {
  if (!f.realized()) throw std::invalid_argument("synth_loads: feeder not realized");
  const std::size_t samples_per_day = static_cast<std::size_t>(24 * 60 / f.resolution_minutes);
  const std::size_t t_count = samples_per_day * static_cast<std::size_t>(f.days);
  const std::size_t n = f.customers.size();
  Matrix h(t_count, n);
  if (t_count == 0) return h;

  const double target_mean_w = f.yearly_energy_per_user_kwh * 1000.0 / 8766.0;
  const double ar = 0.9;
  const double ar_innov = std::sqrt(1.0 - ar * ar);

  for (std::size_t i = 0; i < n; ++i) {
    rng::Stream stream(rng::mix(rng::mix(seed, rng::hash_string("synth_loads")), i));
    const double a1 = 0.3 + 0.3 * stream.next_unit();
    const double a2 = 0.1 + 0.2 * stream.next_unit();
    const double ph1 = stream.next_unit();
    const double ph2 = stream.next_unit();

    auto col = h.col(i);
    double wobble = stream.next_normal();
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (std::size_t t = 0; t < t_count; ++t) {
      const double day_frac =
          static_cast<double>(t % samples_per_day) / static_cast<double>(samples_per_day);
      double base = 1.0 + a1 * std::sin(two_pi * (day_frac - ph1)) +
                    a2 * std::sin(2.0 * two_pi * (day_frac - ph2));
      if (base < 0.2) base = 0.2;
      const double factor = std::max(0.0, 1.0 + f.sim.base_noise_frac * wobble);
      col[t] = base * factor;
      wobble = ar * wobble + ar_innov * stream.next_normal();
    }

    // Scale the continuous part to the target mean, reserving room for events.
    double mean_base = 0.0;
    for (double v : col) mean_base += v;
    mean_base /= static_cast<double>(t_count);

    double event_sum = 0.0;
    for (std::size_t d = 0; d < static_cast<std::size_t>(f.days); ++d) {
      const int n_events = detail::poisson_draw(stream, f.sim.events_per_day);
      for (int e = 0; e < n_events; ++e) {
        const std::size_t start =
            d * samples_per_day + static_cast<std::size_t>(stream.next_below(samples_per_day));
        const std::size_t dur = 1 + static_cast<std::size_t>(stream.next_below(
                                        static_cast<std::uint64_t>(f.sim.event_max_steps)));
        const double u = std::max(stream.next_unit(), 1e-12);
        const double mag = std::min(f.sim.event_magnitude_cap_w,
                                    f.sim.event_magnitude_w * std::pow(u, -1.0 / f.sim.event_alpha));
        for (std::size_t t = start; t < std::min(start + dur, t_count); ++t) {
          col[t] += mag;
          event_sum += mag;
        }
      }
    }
    const double event_mean = event_sum / static_cast<double>(t_count);

    // Final exact rescale to the target mean.
    const double mean_now = mean_base + event_mean;
    if (mean_now > 0.0 && target_mean_w > 0.0) {
      const double scale = target_mean_w / mean_now;
      for (double& v : col) v *= scale;
    }
  }
  return h;
}

/// Per-phase transformer supply by conservation: the sum of the phase's
/// customer loads scaled by (1 + loss_factor).
inline Matrix transformer_power(const FeederSpec& f, const Matrix& h) {
  if (h.cols() != f.customers.size())
    throw std::invalid_argument("transformer_power: column count does not match customers");
  Matrix p(h.rows(), 3);
  for (std::size_t i = 0; i < h.cols(); ++i) {
    const std::size_t j = phase_index(f.customers[i].phase);
    auto src = h.col(i);
    auto dst = p.col(j);
    for (std::size_t t = 0; t < src.size(); ++t) dst[t] += src[t];
  }
  if (f.sim.loss_factor != 0.0) {
    const double g = 1.0 + f.sim.loss_factor;
    for (std::size_t j = 0; j < 3; ++j)
      for (double& v : p.col(j)) v *= g;
  }
  return p;
}

/// Linearized voltage-drop model. The transformer per-phase voltage is the
/// nominal plus a seeded slow AR(1) fluctuation (a common component shared
/// by the phases and a smaller per-phase one). Each customer sees its
/// phase's reference minus the drops over its path, where every section
/// carries the aggregate downstream same-phase current at power/U_n.
/// Returns (customer voltages T x N, transformer voltages T x 3).
inline std::pair<Matrix, Matrix> simulate_voltages(const FeederSpec& f, const Matrix& h,
                                                   std::uint64_t seed) {
  if (!f.realized()) throw std::invalid_argument("simulate_voltages: feeder not realized");
  if (h.cols() != f.customers.size())
    throw std::invalid_argument("simulate_voltages: column count does not match customers");
  const auto ix = detail::index_feeder(f);
  const std::size_t t_count = h.rows();
  const std::size_t n = f.customers.size();
  const std::size_t m = ix.node_ids.size();
  const double u_n = f.sim.nominal_voltage;

  Matrix u_ref(t_count, 3);
  {
    rng::Stream common(rng::mix(seed, rng::hash_string("fluct_common")));
    std::array<rng::Stream, 3> per_phase{
        rng::Stream(rng::mix(seed, rng::hash_string("fluct_a"))),
        rng::Stream(rng::mix(seed, rng::hash_string("fluct_b"))),
        rng::Stream(rng::mix(seed, rng::hash_string("fluct_c")))};
    const double ar = f.sim.fluct_ar;
    const double innov = std::sqrt(std::max(0.0, 1.0 - ar * ar));
    double c_state = common.next_normal();
    std::array<double, 3> p_state{per_phase[0].next_normal(), per_phase[1].next_normal(),
                                  per_phase[2].next_normal()};
    for (std::size_t t = 0; t < t_count; ++t) {
      for (std::size_t j = 0; j < 3; ++j)
        u_ref(t, j) = u_n + f.sim.fluct_sigma_common * c_state + f.sim.fluct_sigma_phase * p_state[j];
      c_state = ar * c_state + innov * common.next_normal();
      for (std::size_t j = 0; j < 3; ++j)
        p_state[j] = ar * p_state[j] + innov * per_phase[j].next_normal();
    }
  }

  Matrix u(t_count, n);
  std::vector<std::array<double, 3>> subtree(m);
  std::vector<std::array<double, 3>> drop(m);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (auto& a : subtree) a = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      subtree[ix.customer_node[i]][phase_index(f.customers[i].phase)] += h(t, i) / u_n;
    // Aggregate currents child-to-parent, then accumulate drops root-down.
    for (std::size_t q = m; q-- > 1;) {
      const std::size_t node = ix.order[q];
      for (std::size_t j = 0; j < 3; ++j) subtree[ix.parent[node]][j] += subtree[node][j];
    }
    drop[0] = {0.0, 0.0, 0.0};
    for (std::size_t q = 1; q < m; ++q) {
      const std::size_t node = ix.order[q];
      for (std::size_t j = 0; j < 3; ++j)
        drop[node][j] = drop[ix.parent[node]][j] + ix.impedance_to_parent[node] * subtree[node][j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = phase_index(f.customers[i].phase);
      u(t, i) = u_ref(t, j) - drop[ix.customer_node[i]][j];
    }
  }
  return {std::move(u), std::move(u_ref)};
}

inline constexpr std::int64_t kCampaignEpoch = 1609718400;  // 2021-01-04T00:00:00

/// Assembles a full ground-truth-labeled campaign from a feeder spec,
/// realizing the topology first when needed.
inline MeasurementCampaign generate_campaign(const FeederSpec& spec, std::uint64_t seed) {
  FeederSpec f = spec.realized() ? spec : build_feeder(spec, rng::mix(seed, rng::hash_string("feeder")));

  const Matrix h = synth_loads(f, rng::mix(seed, rng::hash_string("loads")));
  const Matrix p = transformer_power(f, h);
  auto [u, u_ref] = simulate_voltages(f, h, rng::mix(seed, rng::hash_string("voltages")));

  MeasurementCampaign c;
  c.resolution_minutes = f.resolution_minutes;
  const std::size_t t_count = h.rows();
  c.timestamps.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t)
    c.timestamps[t] = kCampaignEpoch + static_cast<std::int64_t>(t) * f.resolution_minutes * 60;

  c.customer_ids.reserve(f.customers.size());
  for (const auto& cu : f.customers) {
    c.customer_ids.push_back(cu.id);
    c.truth[cu.id] = cu.phase;
  }
  c.voltage = ChannelMatrix{std::move(u), std::vector<std::uint8_t>(f.customers.size(), 1)};
  c.power = ChannelMatrix{h, std::vector<std::uint8_t>(f.customers.size(), 1)};
  c.transformer_power = p;
  c.transformer_voltage = u_ref;

  if (f.include_reference_customer && f.reference_node >= 0) {
    // The reference customer is a passive three-phase connection: its
    // voltage is the per-phase node voltage at its point of connection.
    const auto ix = detail::index_feeder(f);
    std::size_t ref_dense = 0;
    for (std::size_t k = 0; k < ix.node_ids.size(); ++k)
      if (ix.node_ids[k] == f.reference_node) ref_dense = k;
    std::vector<std::size_t> path;  // reference node up to (excluding) the root
    for (std::size_t nn = ref_dense; nn != 0; nn = ix.parent[nn]) path.push_back(nn);

    Matrix ref_u(t_count, 3);
    std::vector<std::array<double, 3>> subtree(ix.node_ids.size());
    for (std::size_t t = 0; t < t_count; ++t) {
      for (auto& a : subtree) a = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < f.customers.size(); ++i)
        subtree[ix.customer_node[i]][phase_index(f.customers[i].phase)] +=
            h(t, i) / f.sim.nominal_voltage;
      for (std::size_t q = ix.node_ids.size(); q-- > 1;) {
        const std::size_t node = ix.order[q];
        for (std::size_t j = 0; j < 3; ++j) subtree[ix.parent[node]][j] += subtree[node][j];
      }
      std::array<double, 3> d{0.0, 0.0, 0.0};
      for (std::size_t node : path)
        for (std::size_t j = 0; j < 3; ++j)
          d[j] += ix.impedance_to_parent[node] * subtree[node][j];
      for (std::size_t j = 0; j < 3; ++j) ref_u(t, j) = (*c.transformer_voltage)(t, j) - d[j];
    }
    c.reference_voltage = std::move(ref_u);
  }
  return c;
}

}  // namespace phaseid
