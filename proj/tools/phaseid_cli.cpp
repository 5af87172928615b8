// phaseid command-line tool: synthesize feeder campaigns, run the
// identification methods on campaign bundles, and drive the Monte Carlo
// benchmark scenarios.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phaseid/phaseid.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool log_info_enabled() {
  const char* lvl = std::getenv("PHASEID_LOG");
  if (!lvl) return false;
  const std::string s = lvl;
  return s == "info" || s == "debug";
}

void log_info(const std::string& msg) {
  if (log_info_enabled()) std::cerr << "[phaseid] " << msg << '\n';
}

phaseid::MethodTag parse_method(const std::string& name) {
  auto m = phaseid::method_tag_from_string(name);
  if (!m)
    throw UsageError("unknown method '" + name +
                     "' (valid: mlv-transfo, mlv-customer, kmeans, mlp, bagging, boosting)");
  return *m;
}

std::optional<phaseid::MeterClass> parse_class(const std::string& name) {
  if (name.empty() || name == "none") return std::nullopt;
  try {
    return phaseid::meter_class_from_name(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void print_report_summary(const std::vector<phaseid::BenchReport>& reports) {
  for (const auto& r : reports) {
    for (const auto& m : r.methods) {
      std::printf("%s class=%s param=%s %s: ", r.feeder.c_str(), r.meter_class.c_str(),
                  (r.param_name == "-" ? "-" : (r.param_name + "=" + r.param_value)).c_str(),
                  phaseid::method_tag_name(m.method).c_str());
      if (m.applicable)
        std::printf("mean=%.4f std=%.4f runs=%d\n", m.mean, m.stddev, r.runs);
      else
        std::printf("not applicable\n");
    }
  }
}

struct SimulateArgs {
  std::string preset;
  std::string spec_path;
  std::string out_dir;
  std::string emit_spec;
  int days = 20;
  int resolution = 15;
  std::uint64_t seed = 1;
  bool no_reference = false;
};

int run_simulate(const SimulateArgs& a) {
  if (a.preset.empty() == a.spec_path.empty())
    throw UsageError("simulate: exactly one of --preset and --spec is required");
  phaseid::FeederSpec spec;
  if (!a.preset.empty()) {
    if (a.preset.size() != 1) throw UsageError("unknown preset '" + a.preset + "' (valid: A..F)");
    try {
      spec = phaseid::preset_feeder(a.preset[0]);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    spec.days = a.days;
    spec.resolution_minutes = a.resolution;
    spec.include_reference_customer = !a.no_reference;
  } else {
    spec = phaseid::load_feeder_spec(a.spec_path);
  }
  const phaseid::FeederSpec feeder = phaseid::build_feeder(
      spec, phaseid::rng::mix(a.seed, phaseid::rng::hash_string("feeder")));
  const phaseid::MeasurementCampaign c = phaseid::generate_campaign(
      feeder, phaseid::rng::mix(a.seed, phaseid::rng::hash_string("campaign")));
  phaseid::save_campaign(c, a.out_dir, feeder.sim.nominal_voltage);
  if (!a.emit_spec.empty()) {
    std::ofstream out(a.emit_spec);
    if (!out) throw phaseid::IoError("cannot write " + a.emit_spec);
    out << phaseid::feeder_spec_to_json(feeder).dump(2) << '\n';
  }
  log_info("campaign written to " + a.out_dir);
  std::printf("wrote campaign: %zu customers, %zu samples, %d-min resolution\n", c.n_customers(),
              c.n_samples(), c.resolution_minutes);
  return 0;
}

struct IdentifyArgs {
  std::string campaign_dir;
  std::string method;
  std::string meter_class;
  std::string out_file;
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
  std::size_t salient_m = 0;
  double threshold_coefficient = 0.2;
  int kmeans_restarts = 10;
};

int run_identify(const IdentifyArgs& a) {
  const phaseid::MethodTag method = parse_method(a.method);
  const auto meter_class = parse_class(a.meter_class);

  phaseid::CampaignBundle bundle = phaseid::load_campaign(a.campaign_dir);
  phaseid::MeasurementCampaign c = std::move(bundle.campaign);
  if (meter_class) {
    phaseid::NoiseContext ctx;
    ctx.u_n = bundle.nominal_voltage;
    ctx.p_n = bundle.nominal_power;
    ctx.seed = a.seed;
    ctx.run_index = a.run;
    c = phaseid::inject_noise(c, *meter_class, ctx);
    log_info("injected class " + meter_class->name + " noise");
  }

  phaseid::EnsembleConfig cfg;
  cfg.threshold_coefficient = a.threshold_coefficient;
  cfg.salient_m = a.salient_m;

  std::vector<phaseid::PhaseAssignment> pred;
  switch (method) {
    case phaseid::MethodTag::mlv_transfo:
      pred = phaseid::mlv_assign(c, phaseid::ReferenceKind::transformer);
      break;
    case phaseid::MethodTag::mlv_customer:
      pred = phaseid::mlv_assign(c, phaseid::ReferenceKind::customer);
      break;
    case phaseid::MethodTag::kmeans: {
      phaseid::KmeansOptions opts;
      opts.restarts = a.kmeans_restarts;
      opts.seed = a.seed;
      pred = phaseid::kmeans_assign(c, opts).second;
      break;
    }
    case phaseid::MethodTag::mlp:
      pred = phaseid::mlp_assign(c, a.salient_m);
      break;
    case phaseid::MethodTag::bagging:
      pred = phaseid::bagging_assign(c, cfg);
      break;
    case phaseid::MethodTag::boosting:
      pred = phaseid::boosting_assign(c, cfg);
      break;
  }
  phaseid::save_assignments_csv(pred, a.out_file);
  std::printf("wrote %zu assignments to %s\n", pred.size(), a.out_file.c_str());
  if (!c.truth.empty()) std::printf("accuracy %.4f\n", phaseid::accuracy(pred, c.truth));
  return 0;
}

struct BenchArgs {
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  // sweep only:
  std::string param;
  std::vector<std::string> values;
};

int run_bench(const BenchArgs& a, bool is_sweep) {
  const phaseid::Scenario s = phaseid::load_scenario(a.config_path);
  std::vector<phaseid::BenchReport> reports;
  if (is_sweep) {
    auto param = phaseid::sweep_param_from_string(a.param);
    if (!param)
      throw UsageError("unknown sweep parameter '" + a.param +
                       "' (valid: voltage_fraction, voltage_days, class)");
    if (a.values.empty()) throw UsageError("sweep: --values must not be empty");
    reports = phaseid::sweep(s, *param, a.values, a.jobs);
  } else {
    reports.push_back(phaseid::run_scenario(s, a.jobs));
  }
  namespace fs = std::filesystem;
  fs::create_directories(a.out_dir);
  phaseid::save_report_json(reports, fs::path(a.out_dir) / "report.json");
  phaseid::save_report_csv(reports, a.out_dir);
  print_report_summary(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase identification toolkit for low-voltage feeders"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic campaign bundle");
  sim_cmd->add_option("--preset", sim.preset, "Feeder preset A..F");
  sim_cmd->add_option("--spec", sim.spec_path, "Feeder spec JSON file");
  sim_cmd->add_option("--days", sim.days, "Campaign length in days")->capture_default_str();
  sim_cmd->add_option("--resolution", sim.resolution, "Meter resolution in minutes")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Generation seed")->capture_default_str();
  sim_cmd->add_flag("--no-reference", sim.no_reference, "Omit the three-phase reference customer");
  sim_cmd->add_option("--emit-spec", sim.emit_spec, "Also write the realized feeder spec JSON");
  sim_cmd->add_option("--out", sim.out_dir, "Output bundle directory")->required();

  IdentifyArgs id;
  CLI::App* id_cmd = app.add_subcommand("identify", "Run one method on a campaign bundle");
  id_cmd->add_option("--campaign", id.campaign_dir, "Campaign bundle directory")->required();
  id_cmd->add_option("--method", id.method,
                     "mlv-transfo|mlv-customer|kmeans|mlp|bagging|boosting")
      ->required();
  id_cmd->add_option("--class", id.meter_class, "Meter class noise to inject (default none)");
  id_cmd->add_option("--seed", id.seed, "Noise/clustering seed")->capture_default_str();
  id_cmd->add_option("--run", id.run, "Noise run index")->capture_default_str();
  id_cmd->add_option("--salient-m", id.salient_m, "Salient component count (0 = auto)");
  id_cmd->add_option("--threshold-coefficient", id.threshold_coefficient,
                     "Boosting threshold as a coefficient on T")
      ->capture_default_str();
  id_cmd->add_option("--kmeans-restarts", id.kmeans_restarts, "K-means restarts")
      ->capture_default_str();
  id_cmd->add_option("--out", id.out_file, "Assignments CSV output path")->required();

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark scenario");
  bench_cmd->add_option("--config", bench.config_path, "Scenario config JSON")->required();
  bench_cmd->add_option("--out", bench.out_dir, "Output directory")->required();
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads for Monte Carlo runs")
      ->capture_default_str();

  BenchArgs sw;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a scenario across parameter values");
  sweep_cmd->add_option("--config", sw.config_path, "Scenario config JSON")->required();
  sweep_cmd->add_option("--param", sw.param, "voltage_fraction|voltage_days|class")->required();
  sweep_cmd->add_option("--values", sw.values, "Values to sweep")->required()->delimiter(',');
  sweep_cmd->add_option("--out", sw.out_dir, "Output directory")->required();
  sweep_cmd->add_option("--jobs", sw.jobs, "Worker threads for Monte Carlo runs")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim_cmd) return run_simulate(sim);
    if (*id_cmd) return run_identify(id);
    if (*bench_cmd) return run_bench(bench, false);
    if (*sweep_cmd) return run_bench(sw, true);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const phaseid::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const phaseid::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const phaseid::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
