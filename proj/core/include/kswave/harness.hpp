#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kswave/config.hpp"
#include "kswave/energy.hpp"
#include "kswave/evolution.hpp"

namespace kswave {

struct InitialPerturbation {
  PerturbState state;
  double M0 = 0.0;
};

/// Builds (phi0, psi0) from the named family:
///   gaussian_bump  phi1 = phi2 = psi = a exp(-(z - z_c)^2 / sigma_z^2)
///   y_mode         the same envelope times cos(2 pi k y / lambda)
///   custom_file    a PERT snapshot on the same grid
/// Throws BufferViolation when the data reach into the right buffer zone.
InitialPerturbation build_initial_perturbation(const PerturbationSpec& spec, const StripGrid& g,
                                               const WaveOnGrid& wave, double buffer_fraction = 0.1);

/// Wave profile used by an experiment: closed form at eps = 0, otherwise
/// solved on a 1D grid that refines the strip z grid by an integer factor.
WaveProfile experiment_profile(const ExperimentConfig& cfg);

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CrossRow {
  double t = 0.0;
  double pert_np = 0.0;  // max |n| differences between formulations
  double pert_nc = 0.0;
  double np_nc = 0.0;
};

struct ExperimentSummary {
  std::filesystem::path out_dir;
  std::string status = "completed";  // worst status across formulations
  bool blow_up = false;
  std::string message;
  double M0 = 0.0;
  // Energy quantities come from the perturbation run; primitive-only
  // formulations leave has_energy false.
  bool has_energy = false;
  double sup_M = 0.0;
  NormSample final_norms;
  DissipationSample accumulators;
  std::optional<double> C0;  // sup M / M0, absent when M0 = 0
  std::optional<DissipationSample> accumulators_over_M0;
  double grad_psi_decay_rate = 0.0;
  double dy_n_peak_ratio = 0.0;  // peak of ||d_y n||^2 over its final value
  // Primitive runs: final max |n - N| (the fixed-point drift when the
  // amplitude is zero).
  std::optional<double> drift;
  std::optional<double> cross_max;
  std::vector<CrossRow> cross;
  std::vector<SuiteResult> suites;
  std::vector<std::string> advisories;
  double seconds = 0.0;

  bool suites_passed() const noexcept;
};

/// Runs the configured formulation(s) into cfg.out_dir and writes
/// summary.json (plus cross.csv for all_three). Throws ConfigError for bad
/// configs; run-time failures are reported in the summary.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

/// Invariant suites that need no time stepping: profile validation,
/// dissipation-coefficient positivity, Poincare battery, buffer check.
std::vector<SuiteResult> check_suites(const ExperimentConfig& cfg);

void write_summary(const std::filesystem::path& path, const ExperimentSummary& s);

struct SweepRow {
  std::size_t index = 0;
  double amplitude = 0.0;
  double eps = 0.0;
  double lambda = 0.0;
  int refinement = 1;
  double dz = 0.0;
  bool advisory = false;
  std::optional<ExperimentSummary> summary;
  std::string error;  // non-empty when the point failed before producing a summary
};

struct SweepResult {
  std::vector<SweepRow> rows;
  // Least-squares slope of log(drift) against log(dz) along the refinement
  // axis, per combination of the other axes; NaN when unavailable.
  std::vector<double> drift_orders;
};

/// Cartesian product of the active axes of cfg.sweep, run by a bounded pool
/// of `workers` threads. Each point writes to cfg.out_dir/point_NNN; the
/// table goes to cfg.out_dir/sweep.csv.
SweepResult sweep(const ExperimentConfig& cfg, std::size_t workers);

/// Slope of log(y) against log(x) by least squares.
double fit_order(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kswave
