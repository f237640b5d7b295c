#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acoofdm/acoofdm.hpp"

namespace {

int run_sweep_command(const std::string& config_path, const std::optional<std::string>& out,
                      const std::optional<std::uint64_t>& seed) {
  acoofdm::ExperimentConfig cfg = acoofdm::parse_config(config_path);
  if (out) cfg.output_path = *out;
  if (seed) cfg.seed = *seed;

  std::vector<acoofdm::SweepRecord> records = acoofdm::run_sweep(cfg);
  acoofdm::emit_csv(records, cfg.output_path);

  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.status == "ok") continue;
    ++failed;
    std::fprintf(stderr, "point %s=%.12g model=%s failed: %s\n", r.sweep_var.c_str(),
                 r.sweep_value, r.model.c_str(), r.status.c_str());
  }
  std::fprintf(stderr, "wrote %zu records to %s (%zu failed)\n", records.size(),
               cfg.output_path.c_str(), failed);
  return failed == 0 ? 0 : 2;
}

struct Check {
  const char* name;
  double measured;
  bool pass;
};

void print_check(const Check& c) {
  std::printf("%-18s %13.6g  %s\n", c.name, c.measured, c.pass ? "PASS" : "FAIL");
}

int validate_waveform_command(const std::string& config_path,
                              const std::optional<std::uint64_t>& seed, std::size_t frames,
                              const std::optional<std::string>& dump_path) {
  acoofdm::ExperimentConfig cfg = acoofdm::parse_config(config_path);
  if (seed) cfg.seed = *seed;

  const int n = cfg.system.n;
  const std::size_t half = static_cast<std::size_t>(n) / 2;
  double total = std::isfinite(cfg.system.electrical_budget) ? cfg.system.electrical_budget
                                                             : static_cast<double>(half);
  // Fixed nonuniform ramp spanning the budget; identities must hold for any allocation.
  acoofdm::PowerAllocation alloc;
  alloc.powers.resize(half);
  double ramp = 0.0;
  for (std::size_t i = 0; i < half; ++i) ramp += 1.0 + static_cast<double>(i) / half;
  for (std::size_t i = 0; i < half; ++i)
    alloc.powers[i] = total * (1.0 + static_cast<double>(i) / half) / ramp;

  std::vector<Check> checks;
  auto gaussian = acoofdm::waveform_report(n, alloc, std::nullopt, frames, cfg.seed);
  checks.push_back({"antisymmetry", gaussian.max_antisymmetry, gaussian.max_antisymmetry <= 1e-9});
  checks.push_back(
      {"half-amplitude", gaussian.max_half_amplitude, gaussian.max_half_amplitude <= 1e-9});
  double mean_err =
      std::abs(gaussian.mean_optical - gaussian.predicted_optical) / gaussian.predicted_optical;
  checks.push_back({"optical-mean", mean_err, mean_err <= 0.02});
  checks.push_back({"power-halving", gaussian.electrical_ratio,
                    std::abs(gaussian.electrical_ratio - 0.5) <= 0.005});
  checks.push_back(
      {"parseval", gaussian.parseval_ratio, std::abs(gaussian.parseval_ratio - 1.0) <= 0.01});

  if (cfg.modulation) {
    auto mod = acoofdm::waveform_report(n, alloc, cfg.modulation, frames,
                                        acoofdm::derive_seed(cfg.seed, 1));
    checks.push_back(
        {"mod-antisymmetry", mod.max_antisymmetry, mod.max_antisymmetry <= 1e-9});
    checks.push_back(
        {"mod-half-amplitude", mod.max_half_amplitude, mod.max_half_amplitude <= 1e-9});
    checks.push_back({"optical-bound", mod.mean_optical / mod.optical_bound,
                      mod.mean_optical <= mod.optical_bound});
  }

  if (dump_path) {
    acoofdm::FrameSynthesizer synth(n);
    std::vector<acoofdm::cplx> symbols(half, acoofdm::cplx{1.0, 0.0});
    if (cfg.modulation)
      for (std::size_t i = 0; i < half; ++i)
        symbols[i] = cfg.modulation->points()[i % cfg.modulation->points().size()];
    acoofdm::dump_frame(synth.frame(symbols, alloc), *dump_path);
    std::fprintf(stderr, "dumped one frame to %s\n", dump_path->c_str());
  }

  bool all_pass = true;
  for (const auto& c : checks) {
    print_check(c);
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACO-OFDM achievable-rate and power-allocation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::size_t frames = 100000;
  std::optional<std::string> dump_path;

  auto* run = app.add_subcommand("run", "solve the configured sweep and write CSV");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_path, "override the configured output path");
  run->add_option("--seed", seed, "override the configured seed");

  auto* wave = app.add_subcommand("validate-waveform",
                                  "Monte Carlo checks of the ACO-OFDM signal identities");
  wave->add_option("--config", config_path, "experiment config file")->required();
  wave->add_option("--seed", seed, "override the configured seed");
  wave->add_option("--frames", frames, "number of random frames");
  wave->add_option("--dump", dump_path, "write one synthesized frame to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_sweep_command(config_path, out_path, seed);
    return validate_waveform_command(config_path, seed, frames, dump_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
