#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "acoofdm/channel.hpp"
#include "acoofdm/constellation.hpp"
#include "acoofdm/ee_alloc.hpp"
#include "acoofdm/error.hpp"
#include "acoofdm/rates.hpp"
#include "acoofdm/rng.hpp"
#include "acoofdm/se_alloc.hpp"
#include "acoofdm/types.hpp"

namespace acoofdm {

enum class SweepVariable { electrical, optical, rate_floor };
enum class ObjectiveKind { se, ee };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::electrical: return "P";
    case SweepVariable::optical: return "P_o";
    default: return "r";
  }
}

inline const char* to_string(ObjectiveKind o) { return o == ObjectiveKind::se ? "SE" : "EE"; }

struct ExperimentConfig {
  SystemParams system;
  std::vector<Geometry> leds;
  DiffuseParams diffuse;
  std::optional<Constellation> modulation;
  QuadratureSpec quad;
  SweepVariable sweep_variable = SweepVariable::electrical;
  std::vector<double> grid;
  ObjectiveKind objective = ObjectiveKind::se;
  std::vector<std::string> models;
  std::string output_path = "results.csv";
  std::uint64_t seed = 0;
  double lower_bound_display_offset = 0.0;
  int threads = 1;
};

struct SweepRecord {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string model;
  std::string objective;
  double value = std::numeric_limits<double>::quiet_NaN();
  double sum_power = std::numeric_limits<double>::quiet_NaN();
  int active_subcarriers = -1;
  double dual = std::numeric_limits<double>::quiet_NaN();
  int iterations = -1;
  std::string status = "ok";
  double wall_time = 0.0;  ///< seconds; diagnostic only, never emitted
  double se_value = std::numeric_limits<double>::quiet_NaN();
  double ee_value = std::numeric_limits<double>::quiet_NaN();
  double display_offset = 0.0;  ///< bits/s added per subcarrier rate before emission
};

namespace detail {

inline const std::vector<std::string>& canonical_models() {
  static const std::vector<std::string> order{"gaussian", "finite", "lower"};
  return order;
}

}  // namespace detail

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.system);
  validate(cfg.quad);
  validate(cfg.diffuse);
  if (cfg.leds.empty()) fail(errc::invalid_geometry, "at least one LED is required");
  if (cfg.grid.empty()) fail(errc::out_of_domain, "sweep grid is empty");
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    if (!(std::isfinite(cfg.grid[i]) && cfg.grid[i] >= 0.0))
      fail(errc::out_of_domain, "sweep grid values must be finite and nonnegative");
    if (i > 0 && !(cfg.grid[i] > cfg.grid[i - 1]))
      fail(errc::out_of_domain, "sweep grid must be strictly increasing");
  }
  if (cfg.models.empty()) fail(errc::out_of_domain, "at least one rate model is required");
  bool needs_constellation = false;
  for (const auto& m : cfg.models) {
    bool known = false;
    for (const auto& c : detail::canonical_models()) known = known || m == c;
    if (!known) fail(errc::out_of_domain, "unknown rate model: " + m);
    needs_constellation = needs_constellation || m != "gaussian";
  }
  if (needs_constellation && !cfg.modulation)
    fail(errc::out_of_domain, "finite and lower models need a modulation section");
  if (cfg.sweep_variable == SweepVariable::rate_floor && cfg.objective == ObjectiveKind::se)
    fail(errc::out_of_domain, "rate floor sweeps apply to the EE objective only");
  if (!(cfg.lower_bound_display_offset >= 0.0))
    fail(errc::out_of_domain, "display offset must be nonnegative");
  if (cfg.threads < 1) fail(errc::out_of_domain, "thread count must be positive");
  if (cfg.output_path.empty()) fail(errc::io_error, "output path is empty");
}

namespace detail {

struct SweepJob {
  std::string model;
  double value = 0.0;
  std::size_t index = 0;
};

inline RateModel make_model(const std::string& name, const ExperimentConfig& cfg,
                            std::uint64_t quad_seed) {
  if (name == "gaussian") return GaussianModel{};
  if (name == "finite") {
    QuadratureSpec q = cfg.quad;
    q.seed = quad_seed;
    return FiniteAlphabetModel{*cfg.modulation, q};
  }
  return LowerBoundModel{*cfg.modulation};
}

inline SweepRecord run_job(const SweepJob& job, const ExperimentConfig& cfg,
                           const ChannelState& ch) {
  SweepRecord rec;
  rec.sweep_var = to_string(cfg.sweep_variable);
  rec.sweep_value = job.value;
  rec.model = job.model;
  rec.objective = to_string(cfg.objective);
  rec.display_offset = job.model == "lower" ? cfg.lower_bound_display_offset : 0.0;

  SystemParams sys = cfg.system;
  switch (cfg.sweep_variable) {
    case SweepVariable::electrical: sys.electrical_budget = job.value; break;
    case SweepVariable::optical: sys.optical_budget = job.value; break;
    case SweepVariable::rate_floor: sys.rate_floor = job.value; break;
  }

  auto start = std::chrono::steady_clock::now();
  try {
    RateModel model = make_model(job.model, cfg, derive_seed(cfg.seed, job.index));
    AllocationResult res = cfg.objective == ObjectiveKind::se ? se_maximize(ch, sys, model)
                                                              : ee_maximize(ch, sys, model);
    double total = total_rate(res.alloc, ch, model, sys) +
                   rec.display_offset * static_cast<double>(sys.data_subcarriers());
    rec.se_value = total / (2.0 * static_cast<double>(sys.n) * sys.bandwidth);
    rec.ee_value = total / (2.0 * res.alloc.total() + sys.circuit_power);
    rec.value = cfg.objective == ObjectiveKind::se ? rec.se_value : rec.ee_value;
    rec.sum_power = res.alloc.total();
    rec.active_subcarriers = res.alloc.active_count();
    rec.dual = res.dual;
    rec.iterations = res.iterations;
    rec.status = "ok";
  } catch (const error& e) {
    rec.status = to_string(e.code());
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace detail

/// Solves every (model, grid point) job and returns records in canonical
/// order: models as gaussian < finite < lower, grid ascending. Per-point
/// solver errors land in the row's status; the sweep continues.
inline std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  ChannelState ch = subcarrier_gains(cfg.leds, cfg.diffuse, cfg.system);

  std::vector<detail::SweepJob> jobs;
  for (const auto& name : detail::canonical_models()) {
    bool wanted = false;
    for (const auto& m : cfg.models) wanted = wanted || m == name;
    if (!wanted) continue;
    for (double v : cfg.grid) jobs.push_back({name, v, jobs.size()});
  }

  std::vector<SweepRecord> out(jobs.size());
  const int workers = std::min<int>(cfg.threads, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (const auto& job : jobs) out[job.index] = detail::run_job(job, cfg, ch);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();)
      out[i] = detail::run_job(jobs[i], cfg, ch);
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
  return out;
}

namespace detail {

inline std::string csv_number(double x) {
  if (!std::isfinite(x)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string csv_count(int x) { return x < 0 ? std::string{} : std::to_string(x); }

}  // namespace detail

/// Writes records as CSV with the fixed header; numeric fields of error rows
/// stay empty. A display_offset column is appended when any record carries a
/// nonzero offset.
inline void emit_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  bool offset_column = false;
  for (const auto& r : records) offset_column = offset_column || r.display_offset != 0.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot open " + path);
  out << "sweep_var,sweep_value,model,objective,value,sum_power,active_subcarriers,dual,"
         "iterations,status";
  if (offset_column) out << ",display_offset";
  out << '\n';
  for (const auto& r : records) {
    out << r.sweep_var << ',' << detail::csv_number(r.sweep_value) << ',' << r.model << ','
        << r.objective << ',' << detail::csv_number(r.value) << ','
        << detail::csv_number(r.sum_power) << ',' << detail::csv_count(r.active_subcarriers) << ','
        << detail::csv_number(r.dual) << ',' << detail::csv_count(r.iterations) << ','
        << r.status;
    if (offset_column) out << ',' << detail::csv_number(r.display_offset);
    out << '\n';
  }
  if (!out) fail(errc::io_error, "write failed for " + path);
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) fail(errc::out_of_domain, "trailing characters in " + where);
    return v;
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    fail(errc::out_of_domain, "expected a number for " + where + ", got '" + text + "'");
  }
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace detail

/// Parses the flat INI config format documented in the README. Unknown keys
/// are rejected so typos surface instead of silently using defaults.
inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open config " + path);

  ExperimentConfig cfg;
  cfg.diffuse.efficiency = 0.0;
  int qam_order = 0;
  std::vector<std::array<double, 5>> led_specs;  // x y z irradiance incidence
  Geometry shared;                               // receiver and optics common to all LEDs
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') fail(errc::out_of_domain, "malformed section at " + where);
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(errc::out_of_domain, "expected key = value at " + where);
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    auto num = [&] { return detail::parse_number(value, section + "." + key); };

    if (section == "system") {
      if (key == "subcarriers")
        cfg.system.n = static_cast<int>(num());
      else if (key == "bandwidth")
        cfg.system.bandwidth = num();
      else if (key == "noise_psd")
        cfg.system.noise_psd = num();
      else if (key == "electrical_budget")
        cfg.system.electrical_budget = num();
      else if (key == "optical_budget")
        cfg.system.optical_budget = num();
      else if (key == "circuit_power")
        cfg.system.circuit_power = num();
      else if (key == "rate_floor")
        cfg.system.rate_floor = num();
      else
        fail(errc::out_of_domain, "unknown key " + section + "." + key + " at " + where);
    } else if (section == "channel") {
      if (key == "led") {
        auto parts = detail::split_ws(value);
        if (parts.size() != 5)
          fail(errc::out_of_domain, "led needs 'x y z irradiance incidence' at " + where);
        std::array<double, 5> spec{};
        for (std::size_t i = 0; i < 5; ++i) spec[i] = detail::parse_number(parts[i], "channel.led");
        led_specs.push_back(spec);
      } else if (key == "receiver") {
        auto parts = detail::split_ws(value);
        if (parts.size() != 3) fail(errc::out_of_domain, "receiver needs 'x y z' at " + where);
        for (std::size_t i = 0; i < 3; ++i)
          shared.receiver_position[i] = detail::parse_number(parts[i], "channel.receiver");
      } else if (key == "half_power_angle") {
        shared.half_power_angle = num();
      } else if (key == "detector_area") {
        shared.detector_area = num();
      } else if (key == "fov") {
        shared.fov = num();
      } else if (key == "filter_gain") {
        shared.filter_gain = num();
      } else if (key == "concentrator_gain") {
        shared.concentrator_gain = num();
      } else if (key == "diffuse_efficiency") {
        cfg.diffuse.efficiency = num();
      } else if (key == "diffuse_decay") {
        cfg.diffuse.decay_time = num();
      } else if (key == "diffuse_delay") {
        cfg.diffuse.extra_delay = num();
      } else {
        fail(errc::out_of_domain, "unknown key " + section + "." + key + " at " + where);
      }
    } else if (section == "modulation") {
      if (key == "type") {
        if (value != "qam") fail(errc::unsupported_order, "unknown modulation type " + value);
      } else if (key == "order") {
        qam_order = static_cast<int>(num());
      } else {
        fail(errc::out_of_domain, "unknown key " + section + "." + key + " at " + where);
      }
    } else if (section == "quadrature") {
      if (key == "method") {
        if (value == "gauss-hermite")
          cfg.quad.method = QuadratureSpec::Method::gauss_hermite;
        else if (value == "monte-carlo")
          cfg.quad.method = QuadratureSpec::Method::monte_carlo;
        else
          fail(errc::out_of_domain, "unknown quadrature method " + value);
      } else if (key == "nodes") {
        cfg.quad.nodes_per_dim = static_cast<int>(num());
      } else if (key == "samples") {
        cfg.quad.sample_count = static_cast<std::size_t>(num());
      } else {
        fail(errc::out_of_domain, "unknown key " + section + "." + key + " at " + where);
      }
    } else if (section == "sweep") {
      if (key == "variable") {
        if (value == "P")
          cfg.sweep_variable = SweepVariable::electrical;
        else if (value == "P_o")
          cfg.sweep_variable = SweepVariable::optical;
        else if (value == "r")
          cfg.sweep_variable = SweepVariable::rate_floor;
        else
          fail(errc::out_of_domain, "unknown sweep variable " + value);
      } else if (key == "grid") {
        cfg.grid.clear();
        for (const auto& tok : detail::split_ws(value))
          cfg.grid.push_back(detail::parse_number(tok, "sweep.grid"));
      } else if (key == "objective") {
        if (value == "SE")
          cfg.objective = ObjectiveKind::se;
        else if (value == "EE")
          cfg.objective = ObjectiveKind::ee;
        else
          fail(errc::out_of_domain, "unknown objective " + value);
      } else if (key == "models") {
        cfg.models = detail::split_ws(value);
      } else {
        fail(errc::out_of_domain, "unknown key " + section + "." + key + " at " + where);
      }
    } else if (section == "output") {
      if (key == "path")
        cfg.output_path = value;
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(num());
      else if (key == "lower_bound_display_offset")
        cfg.lower_bound_display_offset = num();
      else if (key == "threads")
        cfg.threads = static_cast<int>(num());
      else
        fail(errc::out_of_domain, "unknown key " + section + "." + key + " at " + where);
    } else {
      fail(errc::out_of_domain, "unknown section [" + section + "] at " + where);
    }
  }

  for (const auto& spec : led_specs) {
    Geometry g = shared;
    g.led_position = {spec[0], spec[1], spec[2]};
    g.irradiance_angle = spec[3];
    g.incidence_angle = spec[4];
    cfg.leds.push_back(g);
  }
  if (qam_order > 0) cfg.modulation = Constellation::qam(qam_order);
  validate(cfg);
  return cfg;
}

}  // namespace acoofdm
