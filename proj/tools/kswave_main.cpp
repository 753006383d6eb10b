// kswave: command-line front end for wave profiles, stability runs and sweeps.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kswave/config.hpp"
#include "kswave/energy.hpp"
#include "kswave/error.hpp"
#include "kswave/harness.hpp"
#include "kswave/wave_profile.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 2;
constexpr int kBlowUp = 3;
constexpr int kConfigError = 4;

struct Common {
  std::string config;
  std::string out;
  std::size_t workers = 1;
  bool strict = false;
};

kswave::ExperimentConfig load(const Common& c) {
  kswave::ExperimentConfig cfg = c.config.empty() ? kswave::ExperimentConfig{} : kswave::ExperimentConfig::load(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  cfg.validate();
  for (const auto& a : cfg.advisories()) {
    std::cerr << "advisory: " << a << '\n';
    if (c.strict) throw kswave::ConfigError("advisory raised under --strict");
  }
  return cfg;
}

void print_suites(const std::vector<kswave::SuiteResult>& suites) {
  for (const auto& s : suites)
    std::printf("%-26s %s  %s\n", s.name.c_str(), s.passed ? "PASS" : "FAIL", s.detail.c_str());
}

int cmd_wave(const Common& c) {
  const auto cfg = load(c);
  const auto grid = kswave::ZGrid::with_spacing(cfg.L_z, cfg.profile_dz);
  const auto prof = cfg.wave.eps == 0.0 ? kswave::explicit_wave_eps0(cfg.wave.s, grid, cfg.wave.c_plus)
                                        : kswave::solve_wave(cfg.wave, grid);
  const auto rep = kswave::validate_profile(prof);
  for (const auto& chk : rep.checks)
    std::printf("%-36s %s  value %.6e  threshold %.6e\n", chk.name.c_str(), chk.passed ? "PASS" : "FAIL", chk.value,
                chk.threshold);
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / "profile.csv";
  kswave::write_profile(prof, path);
  std::printf("wrote %s (%zu nodes)\n", path.string().c_str(), prof.grid().n);
  return rep.all_passed() ? kOk : kValidationFailure;
}

int cmd_run(const Common& c) {
  const auto cfg = load(c);
  const auto sum = kswave::run_experiment(cfg);
  print_suites(sum.suites);
  std::printf("status %s  M0 %.6e", sum.status.c_str(), sum.M0);
  if (sum.C0) std::printf("  C0 %.6e", *sum.C0);
  if (sum.drift) std::printf("  drift %.6e", *sum.drift);
  if (sum.cross_max) std::printf("  cross %.6e", *sum.cross_max);
  std::printf("\nsummary: %s\n", (cfg.out_dir / "summary.json").string().c_str());
  if (sum.blow_up) return kBlowUp;
  return sum.suites_passed() ? kOk : kValidationFailure;
}

int cmd_sweep(const Common& c) {
  const auto cfg = load(c);
  const auto res = kswave::sweep(cfg, c.workers);
  bool blow = false, fail = false;
  for (const auto& r : res.rows) {
    if (!r.summary) {
      std::printf("point %3zu  error: %s\n", r.index, r.error.c_str());
      fail = true;
      continue;
    }
    const auto& s = *r.summary;
    std::printf("point %3zu  amp %.3e eps %.4g lambda %.4g ref %d  %s%s\n", r.index, r.amplitude, r.eps, r.lambda,
                r.refinement, s.status.c_str(), s.suites_passed() ? "" : " (suite failure)");
    blow = blow || s.blow_up;
    fail = fail || !s.suites_passed();
  }
  for (double o : res.drift_orders) std::printf("fitted drift order %.4f\n", o);
  std::printf("table: %s\n", (cfg.out_dir / "sweep.csv").string().c_str());
  if (blow) return kBlowUp;
  return fail ? kValidationFailure : kOk;
}

int cmd_check(const Common& c) {
  const auto cfg = load(c);
  const auto suites = kswave::check_suites(cfg);
  print_suites(suites);
  for (const auto& s : suites)
    if (!s.passed) return kValidationFailure;
  return kOk;
}

int cmd_poincare(const Common& c, std::size_t samples) {
  const auto cfg = load(c);
  kswave::PoincareOptions opt;
  opt.samples = samples;
  opt.seed = cfg.seed;
  const auto r = kswave::poincare_check(cfg.lambda, cfg.ny, cfg.wave.s, opt);
  std::printf("C_p             %.17g\n", r.c_p);
  std::printf("worst ratio     %.17g  (%zu samples)\n", r.worst_ratio, r.samples);
  std::printf("extremal ratio  %.17g\n", r.extremal_ratio);
  std::printf("within bound    %s\n", r.within_bound ? "yes" : "no");
  std::printf("lambda_max      %.17g  (s lambda C_p <= 1/16 %s)\n", r.lambda_max, r.smallness_holds ? "holds" : "fails");
  return r.within_bound ? kOk : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keller-Segel traveling-wave stability experiments"};
  app.require_subcommand(1);
  Common common;
  std::size_t samples = 100;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "experiment config (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory (overrides out_dir)");
    sub->add_flag("--strict", common.strict, "treat advisories as errors");
  };
  auto* wave = app.add_subcommand("wave", "solve, validate and export the wave profile");
  auto* run = app.add_subcommand("run", "run one experiment");
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  auto* check = app.add_subcommand("check", "run the invariant suites without time stepping");
  auto* poincare = app.add_subcommand("poincare", "Poincare constant battery");
  for (auto* s : {wave, run, sweep, check, poincare}) add_common(s);
  sweep->add_option("--workers", common.workers, "parallel sweep points")->check(CLI::PositiveNumber);
  poincare->add_option("--samples", samples, "random trigonometric polynomials")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*wave) return cmd_wave(common);
    if (*run) return cmd_run(common);
    if (*sweep) return cmd_sweep(common);
    if (*check) return cmd_check(common);
    if (*poincare) return cmd_poincare(common, samples);
  } catch (const kswave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const kswave::BufferViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const kswave::BlowUp& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return kBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kOk;
}
