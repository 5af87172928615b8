#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaseid/bench.hpp"
#include "phaseid/model.hpp"
#include "phaseid/simfeeder.hpp"
#include "phaseid/timeutil.hpp"

namespace phaseid {

/// Malformed file content; carries the location for error messages.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, std::size_t column,
             const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(column) +
                           ": " + what),
        file_(file),
        line_(line),
        column_(column) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

/// Structurally valid files that disagree with each other or with the data
/// model (e.g. differing T across bundle files).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

inline double parse_double(const std::string& field, const std::string& file, std::size_t line,
                           std::size_t column) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(file, line, column, "not a number: '" + field + "'");
  return v;
}

struct WideCsv {
  std::vector<std::int64_t> timestamps;
  std::vector<std::string> ids;
  Matrix values;  // T x ids.size()
};

inline WideCsv read_wide_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string fname = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(fname, 1, 1, "empty file");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "timestamp")
    throw ParseError(fname, 1, 1, "first header column must be 'timestamp'");

  WideCsv out;
  out.ids.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError(fname, lineno, 1,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    auto ts = timeutil::parse_iso(fields[0]);
    if (!ts) throw ParseError(fname, lineno, 1, "bad timestamp '" + fields[0] + "'");
    out.timestamps.push_back(*ts);
    std::vector<double> row(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k)
      row[k - 1] = parse_double(fields[k], fname, lineno, k + 1);
    rows.push_back(std::move(row));
  }
  out.values = Matrix(rows.size(), out.ids.size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < out.ids.size(); ++i) out.values(t, i) = rows[t][i];
  return out;
}

inline void write_wide_csv(const std::filesystem::path& path,
                           const std::vector<std::int64_t>& timestamps,
                           const std::vector<std::string>& ids,
                           const std::vector<std::span<const double>>& cols) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "timestamp";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (std::size_t t = 0; t < timestamps.size(); ++t) {
    out << timeutil::format_iso(timestamps[t]);
    for (const auto& col : cols) out << ',' << format_full(col[t]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

inline const std::array<std::string, 3> kPhaseHeaders{"a", "b", "c"};

}  // namespace io_detail

/// A campaign bundle on disk plus the meta values the noise model needs.
struct CampaignBundle {
  MeasurementCampaign campaign;
  double nominal_voltage = 230.0;
  double nominal_power = 14000.0;
};

/// Writes a campaign as a bundle directory of wide CSV files. Quantities
/// that are absent (or have no present column) produce no file.
inline void save_campaign(const MeasurementCampaign& c, const std::filesystem::path& dir,
                          double nominal_voltage = 230.0, double nominal_power = 14000.0) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  auto write_channel = [&](const ChannelMatrix& ch, const char* file) {
    std::vector<std::string> ids;
    std::vector<std::span<const double>> cols;
    for (std::size_t i = 0; i < c.n_customers(); ++i) {
      if (!ch.present[i]) continue;
      ids.push_back(c.customer_ids[i]);
      cols.push_back(ch.values.col(i));
    }
    if (!ids.empty()) io_detail::write_wide_csv(dir / file, c.timestamps, ids, cols);
  };
  if (c.voltage) write_channel(*c.voltage, "customers_voltage.csv");
  if (c.power) write_channel(*c.power, "customers_power.csv");

  auto write_phases = [&](const Matrix& m, const char* file) {
    std::vector<std::string> ids(io_detail::kPhaseHeaders.begin(), io_detail::kPhaseHeaders.end());
    std::vector<std::span<const double>> cols{m.col(0), m.col(1), m.col(2)};
    io_detail::write_wide_csv(dir / file, c.timestamps, ids, cols);
  };
  if (c.transformer_voltage) write_phases(*c.transformer_voltage, "transformer_voltage.csv");
  if (c.transformer_power) write_phases(*c.transformer_power, "transformer_power.csv");
  if (c.reference_voltage) write_phases(*c.reference_voltage, "reference_voltage.csv");

  if (!c.truth.empty()) {
    std::ofstream out(dir / "labels.csv");
    if (!out) throw IoError("cannot write labels.csv");
    out << "customer_id,phase\n";
    for (const auto& [id, ph] : c.truth) out << id << ',' << phase_char(ph) << '\n';
  }

  nlohmann::json meta;
  meta["resolution_minutes"] = c.resolution_minutes;
  meta["voltage_unit"] = "V";
  meta["power_unit"] = "W";
  meta["nominal_voltage"] = nominal_voltage;
  meta["nominal_power"] = nominal_power;
  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("cannot write meta.json");
  out << meta.dump(2) << '\n';
}

/// Reads a bundle directory back into a campaign. Missing files simply mean
/// the quantity is absent; files that are present must agree on timestamps.
inline CampaignBundle load_campaign(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("campaign bundle not found: " + dir.string());

  CampaignBundle bundle;
  MeasurementCampaign& c = bundle.campaign;

  std::optional<io_detail::WideCsv> volt, pow, tvolt, tpow, refv;
  auto load_if = [&](const char* file) -> std::optional<io_detail::WideCsv> {
    const fs::path p = dir / file;
    if (!fs::exists(p)) return std::nullopt;
    return io_detail::read_wide_csv(p);
  };
  volt = load_if("customers_voltage.csv");
  pow = load_if("customers_power.csv");
  tvolt = load_if("transformer_voltage.csv");
  tpow = load_if("transformer_power.csv");
  refv = load_if("reference_voltage.csv");

  // Timestamps must agree everywhere they appear.
  const std::vector<std::int64_t>* ts = nullptr;
  const char* ts_source = nullptr;
  auto adopt = [&](const std::optional<io_detail::WideCsv>& f, const char* name) {
    if (!f) return;
    if (!ts) {
      ts = &f->timestamps;
      ts_source = name;
    } else if (f->timestamps != *ts) {
      throw ValidationError(std::string("T mismatch: ") + name + " (" +
                            std::to_string(f->timestamps.size()) + " rows) vs " + ts_source +
                            " (" + std::to_string(ts->size()) + " rows)");
    }
  };
  adopt(volt, "customers_voltage.csv");
  adopt(pow, "customers_power.csv");
  adopt(tvolt, "transformer_voltage.csv");
  adopt(tpow, "transformer_power.csv");
  adopt(refv, "reference_voltage.csv");
  if (!ts) throw ValidationError("bundle contains no measurement file");
  c.timestamps = *ts;

  // Customer order: power file first, then voltage-only customers.
  std::vector<std::string> ids;
  std::set<std::string> seen;
  if (pow)
    for (const auto& id : pow->ids)
      if (seen.insert(id).second) ids.push_back(id);
  if (volt)
    for (const auto& id : volt->ids)
      if (seen.insert(id).second) ids.push_back(id);
  c.customer_ids = ids;

  auto to_channel = [&](const io_detail::WideCsv& f) {
    ChannelMatrix ch;
    ch.values = Matrix(c.n_samples(), c.n_customers(), std::numeric_limits<double>::quiet_NaN());
    ch.present.assign(c.n_customers(), 0);
    for (std::size_t k = 0; k < f.ids.size(); ++k) {
      const auto idx = c.customer_index(f.ids[k]);
      auto dst = ch.values.col(*idx);
      auto src = f.values.col(k);
      std::copy(src.begin(), src.end(), dst.begin());
      ch.present[*idx] = 1;
    }
    return ch;
  };
  if (volt) c.voltage = to_channel(*volt);
  if (pow) c.power = to_channel(*pow);

  auto to_phases = [&](const io_detail::WideCsv& f, const char* name) {
    if (f.ids != std::vector<std::string>(io_detail::kPhaseHeaders.begin(),
                                          io_detail::kPhaseHeaders.end()))
      throw ValidationError(std::string(name) + ": columns must be exactly a,b,c");
    return f.values;
  };
  if (tvolt) c.transformer_voltage = to_phases(*tvolt, "transformer_voltage.csv");
  if (tpow) c.transformer_power = to_phases(*tpow, "transformer_power.csv");
  if (refv) c.reference_voltage = to_phases(*refv, "reference_voltage.csv");

  if (fs::exists(dir / "labels.csv")) {
    const std::string fname = (dir / "labels.csv").string();
    std::ifstream in(fname);
    if (!in) throw IoError("cannot open " + fname);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "customer_id,phase") throw ParseError(fname, 1, 1, "expected header customer_id,phase");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      auto fields = io_detail::split_csv_line(line);
      if (fields.size() != 2) throw ParseError(fname, lineno, 1, "expected 2 fields");
      auto ph = phase_from_string(fields[1]);
      if (!ph) throw ParseError(fname, lineno, 2, "unknown phase '" + fields[1] + "'");
      c.truth[fields[0]] = *ph;
    }
  }

  if (fs::exists(dir / "meta.json")) {
    std::ifstream in(dir / "meta.json");
    nlohmann::json meta;
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError((dir / "meta.json").string(), 1, 1, e.what());
    }
    if (meta.contains("resolution_minutes")) c.resolution_minutes = meta["resolution_minutes"].get<int>();
    if (meta.contains("nominal_voltage")) bundle.nominal_voltage = meta["nominal_voltage"].get<double>();
    if (meta.contains("nominal_power")) bundle.nominal_power = meta["nominal_power"].get<double>();
  } else if (c.timestamps.size() >= 2) {
    c.resolution_minutes = static_cast<int>((c.timestamps[1] - c.timestamps[0]) / 60);
  }

  const auto violations = validate_campaign(c);
  if (!violations.empty()) {
    std::string msg = "campaign bundle fails validation:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ValidationError(msg);
  }
  return bundle;
}

/// One row per assignment: customer_id,phase,score,method. Unassigned
/// customers get phase "-".
inline void save_assignments_csv(const std::vector<PhaseAssignment>& assignments,
                                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "customer_id,phase,score,method\n";
  for (const auto& a : assignments) {
    out << a.customer_id << ','
        << (a.flag == AssignFlag::unassigned ? std::string("-") : phase_name(a.predicted)) << ','
        << io_detail::format_full(a.score) << ',' << method_tag_name(a.method) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace io_detail {

inline double round4(double v) { return std::round(v * 1e4) / 1e4; }

inline std::string param_field(const BenchReport& r) {
  if (r.param_name == "-") return "-";
  return r.param_name + "=" + r.param_value;
}

}  // namespace io_detail

/// JSON report: accuracies rounded to 4 decimals, keys sorted, stable bytes.
inline void save_report_json(const std::vector<BenchReport>& reports,
                             const std::filesystem::path& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json jr;
    jr["feeder"] = r.feeder;
    jr["class"] = r.meter_class;
    jr["param"] = {{"name", r.param_name}, {"value", r.param_value}};
    jr["runs"] = r.runs;
    jr["seed"] = r.seed;
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& m : r.methods) {
      nlohmann::json jm;
      jm["method"] = method_tag_name(m.method);
      jm["applicable"] = m.applicable;
      if (m.applicable) {
        jm["mean"] = io_detail::round4(m.mean);
        jm["std"] = io_detail::round4(m.stddev);
        nlohmann::json per = nlohmann::json::array();
        for (double a : m.per_run) per.push_back(io_detail::round4(a));
        jm["per_run"] = per;
      }
      methods.push_back(jm);
    }
    jr["methods"] = methods;
    arr.push_back(jr);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << arr.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

/// Long-format CSV (one row per run) plus a summary of means, both directly
/// plottable. Not-applicable methods appear only in the summary, with NA.
inline void save_report_csv(const std::vector<BenchReport>& reports,
                            const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  std::ofstream runs(dir / "runs.csv");
  if (!runs) throw IoError("cannot write runs.csv");
  runs << "feeder,class,method,param,run,accuracy\n";
  for (const auto& r : reports) {
    const std::string param = io_detail::param_field(r);
    for (const auto& m : r.methods) {
      if (!m.applicable) continue;
      for (std::size_t k = 0; k < m.per_run.size(); ++k)
        runs << r.feeder << ',' << r.meter_class << ',' << method_tag_name(m.method) << ','
             << param << ',' << k << ',' << io_detail::format_fixed4(m.per_run[k]) << '\n';
    }
  }
  if (!runs) throw IoError("write failed for runs.csv");

  std::ofstream sum(dir / "summary.csv");
  if (!sum) throw IoError("cannot write summary.csv");
  sum << "feeder,class,method,param,runs,mean,std\n";
  for (const auto& r : reports) {
    const std::string param = io_detail::param_field(r);
    for (const auto& m : r.methods) {
      if (m.applicable)
        sum << r.feeder << ',' << r.meter_class << ',' << method_tag_name(m.method) << ',' << param
            << ',' << r.runs << ',' << io_detail::format_fixed4(m.mean) << ','
            << io_detail::format_fixed4(m.stddev) << '\n';
      else
        sum << r.feeder << ',' << r.meter_class << ',' << method_tag_name(m.method) << ',' << param
            << ",0,NA,NA\n";
    }
  }
  if (!sum) throw IoError("write failed for summary.csv");
}

enum class ReportFormat { json, csv };

/// Spec-level entry point: json writes one file, csv writes runs.csv and
/// summary.csv under `path` as a directory.
inline void save_report(const std::vector<BenchReport>& reports, ReportFormat format,
                        const std::filesystem::path& path) {
  if (format == ReportFormat::json)
    save_report_json(reports, path);
  else
    save_report_csv(reports, path);
}

namespace io_detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

}  // namespace io_detail

inline SimOptions sim_options_from_json(const nlohmann::json& j) {
  io_detail::reject_unknown_keys(
      j,
      {"nominal_voltage", "loss_factor", "fluct_sigma_common", "fluct_sigma_phase", "fluct_ar",
       "base_noise_frac", "events_per_day", "event_magnitude_w", "event_magnitude_cap_w",
       "event_alpha", "event_max_steps"},
      "sim options");
  SimOptions o;
  if (j.contains("nominal_voltage")) o.nominal_voltage = j["nominal_voltage"].get<double>();
  if (j.contains("loss_factor")) o.loss_factor = j["loss_factor"].get<double>();
  if (j.contains("fluct_sigma_common")) o.fluct_sigma_common = j["fluct_sigma_common"].get<double>();
  if (j.contains("fluct_sigma_phase")) o.fluct_sigma_phase = j["fluct_sigma_phase"].get<double>();
  if (j.contains("fluct_ar")) o.fluct_ar = j["fluct_ar"].get<double>();
  if (j.contains("base_noise_frac")) o.base_noise_frac = j["base_noise_frac"].get<double>();
  if (j.contains("events_per_day")) o.events_per_day = j["events_per_day"].get<double>();
  if (j.contains("event_magnitude_w")) o.event_magnitude_w = j["event_magnitude_w"].get<double>();
  if (j.contains("event_magnitude_cap_w"))
    o.event_magnitude_cap_w = j["event_magnitude_cap_w"].get<double>();
  if (j.contains("event_alpha")) o.event_alpha = j["event_alpha"].get<double>();
  if (j.contains("event_max_steps")) o.event_max_steps = j["event_max_steps"].get<int>();
  return o;
}

inline FeederSpec feeder_spec_from_json(const nlohmann::json& j) {
  io_detail::reject_unknown_keys(
      j,
      {"name", "n_customers", "yearly_energy_per_user_kwh", "main_path_length_m",
       "avg_path_impedance_ohm", "resolution_minutes", "days", "include_reference_customer",
       "reference_node", "sections", "customers", "sim"},
      "feeder spec");
  FeederSpec f;
  if (j.contains("name")) f.name = j["name"].get<std::string>();
  if (j.contains("n_customers")) f.n_customers = j["n_customers"].get<int>();
  if (j.contains("yearly_energy_per_user_kwh"))
    f.yearly_energy_per_user_kwh = j["yearly_energy_per_user_kwh"].get<double>();
  if (j.contains("main_path_length_m")) f.main_path_length_m = j["main_path_length_m"].get<double>();
  if (j.contains("avg_path_impedance_ohm"))
    f.avg_path_impedance_ohm = j["avg_path_impedance_ohm"].get<double>();
  if (j.contains("resolution_minutes")) f.resolution_minutes = j["resolution_minutes"].get<int>();
  if (j.contains("days")) f.days = j["days"].get<int>();
  if (j.contains("include_reference_customer"))
    f.include_reference_customer = j["include_reference_customer"].get<bool>();
  if (j.contains("reference_node")) f.reference_node = j["reference_node"].get<int>();
  if (j.contains("sim")) f.sim = sim_options_from_json(j["sim"]);
  if (j.contains("sections")) {
    for (const auto& js : j["sections"]) {
      io_detail::reject_unknown_keys(js, {"from", "to", "length_m", "impedance_ohm"}, "section");
      f.sections.push_back({js["from"].get<int>(), js["to"].get<int>(),
                            js["length_m"].get<double>(), js["impedance_ohm"].get<double>()});
    }
  }
  if (j.contains("customers")) {
    for (const auto& jc : j["customers"]) {
      io_detail::reject_unknown_keys(jc, {"id", "node", "phase"}, "customer");
      auto ph = phase_from_string(jc["phase"].get<std::string>());
      if (!ph) throw ValidationError("customer '" + jc["id"].get<std::string>() + "': bad phase");
      f.customers.push_back({jc["id"].get<std::string>(), jc["node"].get<int>(), *ph});
    }
  }
  return f;
}

inline nlohmann::json feeder_spec_to_json(const FeederSpec& f) {
  nlohmann::json j;
  j["name"] = f.name;
  j["n_customers"] = f.n_customers;
  j["yearly_energy_per_user_kwh"] = f.yearly_energy_per_user_kwh;
  j["main_path_length_m"] = f.main_path_length_m;
  j["avg_path_impedance_ohm"] = f.avg_path_impedance_ohm;
  j["resolution_minutes"] = f.resolution_minutes;
  j["days"] = f.days;
  j["include_reference_customer"] = f.include_reference_customer;
  j["reference_node"] = f.reference_node;
  nlohmann::json sim;
  sim["nominal_voltage"] = f.sim.nominal_voltage;
  sim["loss_factor"] = f.sim.loss_factor;
  sim["fluct_sigma_common"] = f.sim.fluct_sigma_common;
  sim["fluct_sigma_phase"] = f.sim.fluct_sigma_phase;
  sim["fluct_ar"] = f.sim.fluct_ar;
  sim["base_noise_frac"] = f.sim.base_noise_frac;
  sim["events_per_day"] = f.sim.events_per_day;
  sim["event_magnitude_w"] = f.sim.event_magnitude_w;
  sim["event_magnitude_cap_w"] = f.sim.event_magnitude_cap_w;
  sim["event_alpha"] = f.sim.event_alpha;
  sim["event_max_steps"] = f.sim.event_max_steps;
  j["sim"] = sim;
  if (!f.sections.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : f.sections)
      arr.push_back({{"from", s.from}, {"to", s.to}, {"length_m", s.length_m},
                     {"impedance_ohm", s.impedance_ohm}});
    j["sections"] = arr;
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& cu : f.customers)
      cs.push_back({{"id", cu.id}, {"node", cu.node}, {"phase", phase_name(cu.phase)}});
    j["customers"] = cs;
  }
  return j;
}

/// Scenario config: mirrors the Scenario type one-to-one; unknown keys are
/// rejected so typos fail fast.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  io_detail::reject_unknown_keys(
      j,
      {"feeder", "class", "methods", "voltage_fraction", "voltage_days", "power_days", "days",
       "runs", "seed", "nominal_voltage", "nominal_power", "threshold_coefficient", "salient_m",
       "kmeans", "redraw_loads_per_run"},
      "scenario config");
  Scenario s;
  if (!j.contains("feeder")) throw ValidationError("scenario config: 'feeder' is required");
  if (j["feeder"].is_string()) {
    const std::string name = j["feeder"].get<std::string>();
    if (name.size() != 1) throw ValidationError("scenario config: feeder preset must be A..F");
    s.preset = name[0];
  } else {
    s.custom = feeder_spec_from_json(j["feeder"]);
  }
  if (j.contains("class")) {
    const std::string name = j["class"].get<std::string>();
    if (name != "none") s.meter_class = meter_class_from_name(name);
  }
  if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty())
    throw ValidationError("scenario config: 'methods' must be a non-empty array");
  for (const auto& jm : j["methods"]) {
    auto m = method_tag_from_string(jm.get<std::string>());
    if (!m) throw ValidationError("scenario config: unknown method '" + jm.get<std::string>() + "'");
    s.methods.push_back(*m);
  }
  if (j.contains("voltage_fraction")) s.voltage_fraction = j["voltage_fraction"].get<double>();
  if (j.contains("voltage_days")) s.voltage_days = j["voltage_days"].get<int>();
  if (j.contains("power_days")) s.power_days = j["power_days"].get<int>();
  if (j.contains("days")) s.days = j["days"].get<int>();
  if (j.contains("runs")) s.runs = j["runs"].get<int>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("nominal_voltage")) s.nominal_voltage = j["nominal_voltage"].get<double>();
  if (j.contains("nominal_power")) s.nominal_power = j["nominal_power"].get<double>();
  if (j.contains("threshold_coefficient"))
    s.threshold_coefficient = j["threshold_coefficient"].get<double>();
  if (j.contains("salient_m")) s.salient_m = j["salient_m"].get<std::size_t>();
  if (j.contains("kmeans")) {
    const auto& jk = j["kmeans"];
    io_detail::reject_unknown_keys(jk, {"eps", "max_iter", "restarts"}, "kmeans options");
    if (jk.contains("eps")) s.kmeans.eps = jk["eps"].get<double>();
    if (jk.contains("max_iter")) s.kmeans.max_iter = jk["max_iter"].get<int>();
    if (jk.contains("restarts")) s.kmeans.restarts = jk["restarts"].get<int>();
  }
  if (j.contains("redraw_loads_per_run"))
    s.redraw_loads_per_run = j["redraw_loads_per_run"].get<bool>();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, 1, e.what());
  }
  return scenario_from_json(j);
}

inline FeederSpec load_feeder_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, 1, e.what());
  }
  return feeder_spec_from_json(j);
}

}  // namespace phaseid
