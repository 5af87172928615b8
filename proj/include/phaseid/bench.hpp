#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "phaseid/ensemble.hpp"
#include "phaseid/identify.hpp"
#include "phaseid/metrology.hpp"
#include "phaseid/model.hpp"
#include "phaseid/simfeeder.hpp"

namespace phaseid {

/// One benchmark experiment: a feeder, a meter class (absent = noiseless),
/// the methods to run, the data-availability knobs, and the Monte Carlo
/// repetition count. One clean campaign is generated per scenario; only the
/// noise draw varies across runs unless redraw_loads_per_run is set.
struct Scenario {
  std::optional<char> preset;        // 'A'..'F'
  std::optional<FeederSpec> custom;  // used when preset is empty
  std::optional<MeterClass> meter_class;  // nullopt = noiseless
  std::vector<MethodTag> methods;

  double voltage_fraction = 1.0;  // fraction of customers with voltage data
  int voltage_days = 0;           // 0 = full campaign length
  int power_days = 0;             // 0 = full campaign length
  int days = 20;                  // generated campaign length
  int runs = 50;
  std::uint64_t seed = 1;

  double nominal_voltage = 230.0;
  double nominal_power = 14000.0;
  double threshold_coefficient = 0.2;
  std::size_t salient_m = 0;
  KmeansOptions kmeans;
  bool redraw_loads_per_run = false;
};

struct MethodStats {
  MethodTag method = MethodTag::mlv_transfo;
  bool applicable = true;
  std::vector<double> per_run;  // accuracy per Monte Carlo run
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation across runs
};

struct BenchReport {
  std::string feeder;
  std::string meter_class;  // "none" when noiseless
  std::string param_name = "-";
  std::string param_value = "-";
  int runs = 0;
  std::uint64_t seed = 0;
  std::vector<MethodStats> methods;
};

/// Fraction of labeled customers whose prediction matches the label.
/// Unassigned or missing predictions count as incorrect.
inline double accuracy(const std::vector<PhaseAssignment>& pred,
                       const std::map<std::string, Phase>& truth) {
  if (truth.empty()) throw std::invalid_argument("accuracy: ground-truth labels required");
  std::size_t correct = 0;
  for (const auto& [id, ph] : truth) {
    for (const auto& a : pred) {
      if (a.customer_id != id) continue;
      if (a.flag != AssignFlag::unassigned && a.predicted == ph) ++correct;
      break;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

namespace detail {

inline FeederSpec scenario_feeder(const Scenario& s) {
  FeederSpec f;
  if (s.preset) {
    f = preset_feeder(*s.preset);
  } else if (s.custom) {
    f = *s.custom;
  } else {
    throw std::invalid_argument("scenario: either a preset or a custom feeder is required");
  }
  f.days = s.days;
  f.sim.nominal_voltage = s.nominal_voltage;
  return f;
}

inline bool method_applicable(MethodTag m, const MeasurementCampaign& volt_view,
                              const MeasurementCampaign& pow_view) {
  switch (m) {
    case MethodTag::mlv_transfo:
      return volt_view.voltage && volt_view.voltage->present_count() >= 1 &&
             volt_view.transformer_voltage.has_value();
    case MethodTag::mlv_customer:
      return volt_view.voltage && volt_view.voltage->present_count() >= 1 &&
             volt_view.reference_voltage.has_value();
    case MethodTag::kmeans:
      return volt_view.voltage && volt_view.voltage->present_count() >= 3;
    case MethodTag::mlp:
      return pow_view.power && pow_view.transformer_power.has_value();
    case MethodTag::bagging:
      return (volt_view.voltage && volt_view.voltage->present_count() >= 1 &&
              volt_view.transformer_voltage.has_value()) ||
             (pow_view.power && pow_view.transformer_power.has_value());
    case MethodTag::boosting:
      return pow_view.transformer_power.has_value();
  }
  return false;
}

inline std::vector<PhaseAssignment> run_method(MethodTag m, const Scenario& s,
                                               const MeasurementCampaign& volt_view,
                                               const MeasurementCampaign& pow_view,
                                               std::uint64_t run_index) {
  EnsembleConfig cfg;
  cfg.threshold_coefficient = s.threshold_coefficient;
  cfg.salient_m = s.salient_m;
  switch (m) {
    case MethodTag::mlv_transfo: return mlv_assign(volt_view, ReferenceKind::transformer);
    case MethodTag::mlv_customer: return mlv_assign(volt_view, ReferenceKind::customer);
    case MethodTag::kmeans: {
      KmeansOptions opts = s.kmeans;
      opts.seed = rng::mix(rng::mix(s.seed, rng::hash_string("kmeans")), run_index);
      return kmeans_assign(volt_view, opts).second;
    }
    case MethodTag::mlp: return mlp_assign(pow_view, s.salient_m);
    case MethodTag::bagging: return bagging_assign(volt_view, pow_view, cfg);
    case MethodTag::boosting: return boosting_assign(volt_view, pow_view, cfg);
  }
  throw std::logic_error("run_method: unreachable");
}

struct ScenarioViews {
  MeasurementCampaign volt_view;
  MeasurementCampaign pow_view;
  bool same = false;
};

inline ScenarioViews make_views(const Scenario& s, const MeasurementCampaign& clean) {
  MeasurementCampaign base = clean;
  if (s.voltage_fraction < 1.0)
    base = drop_voltage_columns(base, s.voltage_fraction, rng::mix(s.seed, rng::hash_string("vf")));
  ScenarioViews v;
  v.same = s.voltage_days == s.power_days;
  v.volt_view = s.voltage_days > 0
                    ? window(base, 0, static_cast<std::size_t>(s.voltage_days))
                    : base;
  v.pow_view = v.same ? v.volt_view
                      : (s.power_days > 0 ? window(base, 0, static_cast<std::size_t>(s.power_days))
                                          : base);
  return v;
}

inline BenchReport run_scenario_on(const Scenario& s, const FeederSpec& feeder,
                                   const MeasurementCampaign& clean, int jobs) {
  if (s.runs < 1) throw std::invalid_argument("scenario: runs must be >= 1");
  if (!(s.voltage_fraction >= 0.0 && s.voltage_fraction <= 1.0))
    throw std::invalid_argument("scenario: voltage_fraction outside [0,1]");
  if (clean.truth.empty()) throw std::invalid_argument("scenario: campaign has no ground truth");

  const ScenarioViews views = make_views(s, clean);

  BenchReport report;
  report.feeder = feeder.name;
  report.meter_class = s.meter_class ? s.meter_class->name : "none";
  report.runs = s.runs;
  report.seed = s.seed;
  report.methods.reserve(s.methods.size());
  for (MethodTag m : s.methods) {
    MethodStats st;
    st.method = m;
    st.applicable = method_applicable(m, views.volt_view, views.pow_view);
    if (st.applicable) st.per_run.assign(static_cast<std::size_t>(s.runs), 0.0);
    report.methods.push_back(std::move(st));
  }

  auto run_one = [&](std::uint64_t r, std::vector<double>& row) {
    ScenarioViews local;
    const ScenarioViews* v = &views;
    if (s.redraw_loads_per_run) {
      MeasurementCampaign redrawn = generate_campaign(feeder, rng::mix(s.seed, r + 1));
      local = make_views(s, redrawn);
      v = &local;
    }
    MeasurementCampaign n_volt;
    MeasurementCampaign n_pow;
    const MeasurementCampaign* volt = &v->volt_view;
    const MeasurementCampaign* pow = &v->pow_view;
    if (s.meter_class) {
      NoiseContext ctx;
      ctx.u_n = s.nominal_voltage;
      ctx.p_n = s.nominal_power;
      ctx.seed = s.seed;
      ctx.run_index = r;
      n_volt = inject_noise(v->volt_view, *s.meter_class, ctx);
      volt = &n_volt;
      if (v->same) {
        pow = &n_volt;
      } else {
        n_pow = inject_noise(v->pow_view, *s.meter_class, ctx);
        pow = &n_pow;
      }
    }
    for (std::size_t mi = 0; mi < s.methods.size(); ++mi) {
      if (!report.methods[mi].applicable) continue;
      const auto pred = run_method(s.methods[mi], s, *volt, *pow, r);
      row[mi] = accuracy(pred, clean.truth);
    }
  };

  const int n_jobs = std::max(1, jobs);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(s.runs),
                                        std::vector<double>(s.methods.size(), 0.0));
  if (n_jobs == 1) {
    for (int r = 0; r < s.runs; ++r) run_one(static_cast<std::uint64_t>(r), rows[static_cast<std::size_t>(r)]);
  } else {
    std::vector<std::future<void>> futures;
    for (int w = 0; w < n_jobs; ++w) {
      futures.push_back(std::async(std::launch::async, [&, w] {
        for (int r = w; r < s.runs; r += n_jobs)
          run_one(static_cast<std::uint64_t>(r), rows[static_cast<std::size_t>(r)]);
      }));
    }
    for (auto& f : futures) f.get();
  }

  for (std::size_t mi = 0; mi < s.methods.size(); ++mi) {
    MethodStats& st = report.methods[mi];
    if (!st.applicable) continue;
    for (int r = 0; r < s.runs; ++r) st.per_run[static_cast<std::size_t>(r)] = rows[static_cast<std::size_t>(r)][mi];
    double sum = 0.0;
    for (double a : st.per_run) sum += a;
    st.mean = sum / static_cast<double>(s.runs);
    double ss = 0.0;
    for (double a : st.per_run) ss += (a - st.mean) * (a - st.mean);
    st.stddev = s.runs > 1 ? std::sqrt(ss / static_cast<double>(s.runs - 1)) : 0.0;
  }
  return report;
}

}  // namespace detail

/// Runs one scenario: a shared clean campaign, per-run noise injection, and
/// accuracy per (method, run). Deterministic for a fixed seed regardless of
/// the number of worker threads.
inline BenchReport run_scenario(const Scenario& s, int jobs = 1) {
  const FeederSpec feeder =
      build_feeder(detail::scenario_feeder(s), rng::mix(s.seed, rng::hash_string("feeder")));
  const MeasurementCampaign clean =
      generate_campaign(feeder, rng::mix(s.seed, rng::hash_string("campaign")));
  return detail::run_scenario_on(s, feeder, clean, jobs);
}

enum class SweepParam { voltage_fraction, voltage_days, meter_class };

inline std::optional<SweepParam> sweep_param_from_string(std::string_view s) {
  if (s == "voltage_fraction") return SweepParam::voltage_fraction;
  if (s == "voltage_days") return SweepParam::voltage_days;
  if (s == "class") return SweepParam::meter_class;
  return std::nullopt;
}

inline std::string sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::voltage_fraction: return "voltage_fraction";
    case SweepParam::voltage_days: return "voltage_days";
    case SweepParam::meter_class: return "class";
  }
  return "?";
}

/// Runs the scenario once per value of the swept parameter, sharing one
/// clean campaign so the curves differ only in that parameter.
inline std::vector<BenchReport> sweep(const Scenario& s, SweepParam param,
                                      const std::vector<std::string>& values, int jobs = 1) {
  if (values.empty()) throw std::invalid_argument("sweep: values list is empty");
  const FeederSpec feeder =
      build_feeder(detail::scenario_feeder(s), rng::mix(s.seed, rng::hash_string("feeder")));
  const MeasurementCampaign clean =
      generate_campaign(feeder, rng::mix(s.seed, rng::hash_string("campaign")));

  std::vector<BenchReport> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    Scenario sv = s;
    switch (param) {
      case SweepParam::voltage_fraction: sv.voltage_fraction = std::stod(v); break;
      case SweepParam::voltage_days: sv.voltage_days = std::stoi(v); break;
      case SweepParam::meter_class:
        sv.meter_class = v == "none" ? std::nullopt : std::optional<MeterClass>(meter_class_from_name(v));
        break;
    }
    BenchReport r = detail::run_scenario_on(sv, feeder, clean, jobs);
    r.param_name = sweep_param_name(param);
    r.param_value = v;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace phaseid
