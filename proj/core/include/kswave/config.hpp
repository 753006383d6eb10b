#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kswave/evolution.hpp"
#include "kswave/field_ops.hpp"
#include "kswave/wave_profile.hpp"

namespace kswave {

enum class PerturbationFamily { gaussian_bump, y_mode, custom_file };
enum class Formulation { perturbation, primitive_np, primitive_nc, all_three };

const char* to_string(PerturbationFamily f);
const char* to_string(Formulation f);

struct PerturbationSpec {
  PerturbationFamily family = PerturbationFamily::gaussian_bump;
  double amplitude = 0.0;
  double z_center = 0.0;
  double sigma_z = 1.0;
  int y_mode = 1;
  std::filesystem::path file;  // custom_file: a PERT snapshot on the run grid
};

/// Axes a sweep may vary; empty vectors are inactive.
struct SweepAxes {
  std::vector<double> amplitude;
  std::vector<double> eps;
  std::vector<double> lambda;
  std::vector<int> refinement;  // factor applied to dz, dy and dt

  bool empty() const noexcept { return amplitude.empty() && eps.empty() && lambda.empty() && refinement.empty(); }
};

/// Flat `key = value` experiment description (a TOML subset: numbers,
/// booleans, quoted strings, numeric arrays, `#` comments). Unknown keys are
/// rejected.
struct ExperimentConfig {
  WaveParams wave{1.0, 0.05, 1.0};
  double L_z = 20.0;
  std::size_t nz = 256;
  double lambda = 0.3;
  std::size_t ny = 32;
  Discretization disc;
  double profile_dz = 1e-3;  // target spacing of the underlying 1D profile
  SchemeConfig scheme;
  PerturbationSpec init;
  Formulation formulation = Formulation::perturbation;
  std::filesystem::path out_dir = "run";
  std::uint64_t seed = 1;
  bool write_snapshots = true;
  double buffer_fraction = 0.1;
  double cross_tol = 1e-4;  // all_three: bound on the pairwise n difference
  SweepAxes sweep;

  // Raw text the config was parsed from (hashed into run.meta).
  std::string source;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Canonical key = value rendering; parse(to_text()) round-trips.
  std::string to_text() const;

  /// Throws ConfigError on inconsistent values.
  void validate() const;

  /// Non-fatal warnings about theorem hypotheses.
  std::vector<std::string> advisories() const;
  bool smallness_advisory() const;

  StripGrid grid() const;
  std::string hash_text() const { return source.empty() ? to_text() : source; }
};

}  // namespace kswave
