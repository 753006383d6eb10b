#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kswave {

/// Parameters of a planar traveling wave: speed s, chemical diffusion eps
/// and the right chemical limit c_plus.
struct WaveParams {
  double s = 1.0;
  double eps = 0.1;
  double c_plus = 1.0;

  /// Left density limit (1 + eps) s^2.
  double n_minus() const noexcept { return (1.0 + eps) * s * s; }

  /// Throws InvalidArgument unless s > 0, c_plus > 0 and 0 <= eps <= eps_max.
  void validate(double eps_max = 0.5) const;
};

/// Uniform 1D grid z_i = z0 + i * dz, i = 0 .. n-1.
struct ZGrid {
  double z0 = 0.0;
  double dz = 1.0;
  std::size_t n = 0;

  double operator[](std::size_t i) const noexcept { return z0 + static_cast<double>(i) * dz; }
  double front() const noexcept { return z0; }
  double back() const noexcept { return (*this)[n - 1]; }

  /// n nodes spanning [-half_length, half_length].
  static ZGrid symmetric(double half_length, std::size_t n);
  /// Nodes spanning [-half_length, half_length] with spacing as close to dz as
  /// the node count allows.
  static ZGrid with_spacing(double half_length, double dz);
};

struct ChemicalProfile {
  std::vector<double> C;
  std::vector<double> log_C;
  // True when exp() of the accumulated exponent was clamped somewhere.
  bool clamped = false;
};

struct WaveSolveInfo {
  double rk_tol = 0.0;
  double tail_ball = 0.0;
  double delta = 0.0;
  double unstable_eigenvalue = 0.0;
  // Shifted z at which the shot left E-; nodes left of it use the linearization.
  double shoot_start = 0.0;
  // First z where (N, P) is inside the tail ball around E+; NaN if never.
  double tail_entry = 0.0;
  // |P(z_center) + s/2| after event refinement.
  double center_residual = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// Discretized heteroclinic profile (N, P, C) on a uniform z grid.
///
/// Alongside N and P the profile keeps the gaps n_minus - N and P + s. They
/// are integrated directly on the left of the front, where N and P sit within
/// roundoff of their limits, so quantities such as N' = -(s + P) N stay
/// resolved all the way into the left tail.
class WaveProfile {
 public:
  struct Samples {
    std::vector<double> N;
    std::vector<double> P;
    std::vector<double> N_gap;  // n_minus - N
    std::vector<double> P_gap;  // P + s
  };

  WaveProfile(WaveParams params, ZGrid grid, Samples samples, ChemicalProfile chemical,
              double z_center, WaveSolveInfo info = {});

  const WaveParams& params() const noexcept { return params_; }
  const ZGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return grid_.n; }
  double z(std::size_t i) const noexcept { return grid_[i]; }
  double z_center() const noexcept { return z_center_; }
  const WaveSolveInfo& info() const noexcept { return info_; }
  bool chemical_clamped() const noexcept { return chemical_.clamped; }

  std::span<const double> N() const noexcept { return samples_.N; }
  std::span<const double> P() const noexcept { return samples_.P; }
  std::span<const double> N_gap() const noexcept { return samples_.N_gap; }
  std::span<const double> P_gap() const noexcept { return samples_.P_gap; }
  std::span<const double> C() const noexcept { return chemical_.C; }
  std::span<const double> log_C() const noexcept { return chemical_.log_C; }

  // Derivatives from the reduced ODE evaluated at the stored samples; the
  // best-conditioned form is picked on each side of z_center.
  double dN(std::size_t i) const;
  double dP(std::size_t i) const;
  double d2N(std::size_t i) const;
  double d2P(std::size_t i) const;

  /// Linear interpolation of P / N at an arbitrary z inside the grid.
  double P_at(double z) const;
  double N_at(double z) const;

 private:
  bool left_of_center(std::size_t i) const noexcept { return grid_[i] <= z_center_; }

  WaveParams params_;
  ZGrid grid_;
  Samples samples_;
  ChemicalProfile chemical_;
  double z_center_;
  WaveSolveInfo info_;
};

// ---------------------------------------------------------------------------
// Reduced ODE and its equilibria

struct WaveSlope {
  double dN;
  double dP;
};

/// (dN/dz, dP/dz) = (-(s+P) N, (eps P^2 - s P - N) / eps). Rejects eps == 0.
WaveSlope wave_ode_rhs(double N, double P, const WaveParams& params);

struct Equilibrium {
  double N = 0.0;
  double P = 0.0;
  std::array<std::array<double, 2>, 2> jacobian{};
  std::array<double, 2> eigenvalues{};
  // Columns are unit eigenvectors; for a defective Jacobian the second column
  // is a generalized eigenvector.
  std::array<std::array<double, 2>, 2> eigenvectors{};
  bool defective = false;
};

struct Equilibria {
  Equilibrium minus;  // ((1+eps) s^2, -s), saddle
  Equilibrium plus;   // (0, 0), stable node
};

Equilibria equilibria_and_linearization(const WaveParams& params);

// ---------------------------------------------------------------------------
// Profile construction

struct WaveSolveOptions {
  double tol = 1e-8;           // RK tolerance
  double tail_ball = 1e-9;     // relative to s^2 (N) and s (P)
  double delta_factor = 1e-6;  // shooting offset = delta_factor * s^2
  double eps_max = 0.5;
  double eps_min = 1e-3;
  bool allow_small_eps = false;
  double min_step = 1e-12;
  double exponent_clamp = 700.0;
};

/// Shoots the heteroclinic orbit from E- and samples it on `grid`, with the
/// translation fixed so that P = -s/2 at z = 0.
WaveProfile solve_wave(const WaveParams& params, const ZGrid& grid,
                       const WaveSolveOptions& options = {});

/// Closed-form eps = 0 wave N = s^2 / (1 + e^{sz}), P = -N / s,
/// C = c_plus / (1 + e^{-sz}).
WaveProfile explicit_wave_eps0(double s, const ZGrid& grid, double c_plus = 1.0);

/// C(z) = c_plus exp(int_z^{z_max} P) by composite Simpson from the right end.
ChemicalProfile chemical_from_p(std::span<const double> P, double c_plus, const ZGrid& grid,
                                double exponent_clamp = 700.0, double tail_tol = 1e-6);

// ---------------------------------------------------------------------------
// Validation

struct ProfileCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct ValidationOptions {
  double residual_tol = 1e-8;
  double endpoint_tol = 1e-6;
  double center_tol = 1e-8;
  double weight_tol = 1e-8;
  // The N(z_center) >= s^2/4 bound is only asserted at or below this eps.
  double lemma_eps_threshold = 0.1;
};

struct ValidationReport {
  std::vector<ProfileCheck> checks;
  // Empirical sup |N'|, |N''|, |P'|, |P''|.
  double sup_dN = 0.0;
  double sup_d2N = 0.0;
  double sup_dP = 0.0;
  double sup_d2P = 0.0;

  bool all_passed() const noexcept;
  const ProfileCheck* find(const std::string& name) const noexcept;
};

ValidationReport validate_profile(const WaveProfile& profile, const ValidationOptions& options = {});

/// Max pointwise residuals of -N'/N = s + P and -sP - eps P' = N - eps P^2,
/// derivatives by 4th-order finite differences of the stored samples.
struct ProfileResiduals {
  double np_relation = 0.0;
  double p_equation = 0.0;
};
ProfileResiduals profile_residuals(const WaveProfile& profile);

/// Pointwise coefficients (N')^2/N^3, P'/N, P N'/N^2 of the zeroth-order
/// dissipation terms, plus P' itself.
struct DissipationCoefficients {
  std::vector<double> dN_sq_over_N3;
  std::vector<double> dP_over_N;
  std::vector<double> P_dN_over_N2;
  std::vector<double> dP;
};
DissipationCoefficients dissipation_coefficients(const WaveProfile& profile);

// ---------------------------------------------------------------------------
// I/O: CSV `z,N,P,C` plus `<stem>.meta.json` sidecar.

void write_profile(const WaveProfile& profile, const std::filesystem::path& csv_path);
WaveProfile read_profile(const std::filesystem::path& csv_path);
std::filesystem::path profile_meta_path(const std::filesystem::path& csv_path);

/// 4th-order first derivative of uniformly sampled data (one-sided closures).
std::vector<double> derivative4(std::span<const double> f, double dz);

}  // namespace kswave
