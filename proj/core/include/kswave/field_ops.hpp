#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "kswave/wave_profile.hpp"

namespace kswave {

enum class YScheme { centered, spectral };

struct Discretization {
  // 2 or 4. Order of the interior z stencils; nodes next to the boundary
  // always fall back to 2nd order.
  int z_order = 4;
  YScheme y = YScheme::centered;
};

/// Uniform mesh on [-L_z, L_z] x [0, lambda), periodic in y. Node (i, j) sits
/// at z = -L_z + i dz, y = j dy and is stored at index i * ny + j.
class StripGrid {
 public:
  static constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 24;

  StripGrid(double L_z, std::size_t nz, double lambda, std::size_t ny, Discretization disc = {},
            std::size_t node_budget = kDefaultNodeBudget);

  double L_z() const noexcept { return L_z_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t nz() const noexcept { return nz_; }
  std::size_t ny() const noexcept { return ny_; }
  double dz() const noexcept { return dz_; }
  double dy() const noexcept { return dy_; }
  std::size_t size() const noexcept { return nz_ * ny_; }
  const Discretization& disc() const noexcept { return disc_; }

  double z(std::size_t i) const noexcept { return -L_z_ + static_cast<double>(i) * dz_; }
  double y(std::size_t j) const noexcept { return static_cast<double>(j) * dy_; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * ny_ + j; }
  ZGrid zgrid() const noexcept { return {-L_z_, dz_, nz_}; }

  // Dense spectral differentiation matrices (row-major ny x ny); empty unless
  // the y scheme is spectral.
  const std::vector<double>& spectral_d1() const noexcept { return spec_->d1; }
  const std::vector<double>& spectral_d2() const noexcept { return spec_->d2; }

  /// Same geometry and discretization.
  bool same_as(const StripGrid& other) const noexcept;

 private:
  struct Spectral {
    std::vector<double> d1, d2;
  };
  double L_z_, lambda_;
  std::size_t nz_, ny_;
  double dz_, dy_;
  Discretization disc_;
  std::shared_ptr<const Spectral> spec_;
};

using Field = std::vector<double>;

struct VectorField {
  Field z;  // first component
  Field y;  // second component
};

Field zeros(const StripGrid& g);
/// f(z_i, y_j) sampled on every node.
template <class F>
Field sample(const StripGrid& g, F&& f) {
  Field out(g.size());
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) out[g.index(i, j)] = f(g.z(i), g.y(j));
  return out;
}

void check_shape(const Field& f, const StripGrid& g);

// ---------------------------------------------------------------------------
// Differential operators

Field d_z(const Field& f, const StripGrid& g);
Field d_y(const Field& f, const StripGrid& g);
Field d_zz(const Field& f, const StripGrid& g);
Field d_yy(const Field& f, const StripGrid& g);

VectorField grad(const Field& f, const StripGrid& g);
Field div(const VectorField& v, const StripGrid& g);
Field laplacian(const Field& f, const StripGrid& g);
/// Scalar curl d_z v_y - d_y v_z.
Field curl(const VectorField& v, const StripGrid& g);

/// Discrete L2 inner product: trapezoid in z, rectangle in y, optional
/// z-dependent weight (length nz).
double inner(const Field& a, const Field& b, const StripGrid& g, const std::vector<double>* weight = nullptr);

double max_abs(const Field& f);

// ---------------------------------------------------------------------------
// Cole-Hopf pair

VectorField cole_hopf_forward(const Field& logc, const StripGrid& g);

struct ColeHopfOptions {
  // Relative curl threshold; scale is the largest first derivative of p.
  double curl_tol = 1e-3;
};

/// Path integration of -p: along z on the anchor column j = ny/2 from the
/// right end, then along y in every row. logc(nz-1, ny/2) = anchor.
Field cole_hopf_inverse(const VectorField& p, double anchor, const StripGrid& g, const ColeHopfOptions& opt = {});

// ---------------------------------------------------------------------------
// States

/// Wave profile restricted to the strip's z nodes, with ODE-evaluated
/// derivatives.
struct WaveOnGrid {
  WaveParams params;
  std::vector<double> N, P, N_gap, P_gap, log_C, dN, dP;
};

/// Takes the profile's samples at the strip z nodes. The profile grid must
/// coincide with the strip grid or refine it by an integer factor.
WaveOnGrid sample_wave(const WaveProfile& wave, const StripGrid& g);

struct PerturbState {
  StripGrid grid;
  double t = 0.0;
  Field phi1, phi2, psi;

  static PerturbState zero(const StripGrid& g, double t = 0.0);
};

enum class Representation { np, nc };

struct PrimitiveState {
  StripGrid grid;
  double t = 0.0;
  Representation rep = Representation::np;
  Field n;
  VectorField p;  // np only
  Field logc;     // nc only

  /// Discrete curl of p relative to its derivative scale (np only).
  double curl_residual() const;
};

struct Reconstruction {
  PrimitiveState state;
  double min_density = 0.0;
  bool negative_density = false;
};

/// n = N + div phi, p = (P, 0) + grad psi.
Reconstruction reconstruct_primitive(const PerturbState& perturb, const WaveOnGrid& wave);
/// n = N + div phi, log c = log C - psi.
Reconstruction reconstruct_primitive_nc(const PerturbState& perturb, const WaveOnGrid& wave);

/// Pure traveling wave as a primitive state.
PrimitiveState wave_state(const StripGrid& g, const WaveOnGrid& wave, Representation rep);

struct GradientPart {
  Field u;        // n - N
  VectorField v;  // p - (P, 0)
};

GradientPart extract_perturbation_gradient_part(const PrimitiveState& primitive, const WaveOnGrid& wave);

}  // namespace kswave
