#include "kswave/wave_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dopri5.hpp"
#include "kswave/error.hpp"

namespace kswave {

namespace {

using detail::OdePoint;
using detail::Vec2;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Closed-form eigen decomposition of a real 2x2 matrix with real spectrum.
void eigen2x2(Equilibrium& eq) {
  const auto& J = eq.jacobian;
  const double a = J[0][0], b = J[0][1], c = J[1][0], d = J[1][1];
  const double tr = a + d;
  const double det = a * d - b * c;
  const double disc = tr * tr / 4.0 - det;
  if (disc < 0.0) throw InvalidArgument("complex eigenvalues in wave linearization");
  const double root = std::sqrt(disc);
  const double l1 = tr / 2.0 + root;
  const double l2 = tr / 2.0 - root;
  eq.eigenvalues = {l1, l2};

  auto vec_for = [&](double l) -> std::array<double, 2> {
    // Rows of (J - l I); pick the better conditioned one.
    std::array<double, 2> v;
    if (std::abs(b) + std::abs(a - l) >= std::abs(c) + std::abs(d - l))
      v = {b, l - a};
    else
      v = {l - d, c};
    const double norm = std::hypot(v[0], v[1]);
    if (norm == 0.0) return {1.0, 0.0};
    return {v[0] / norm, v[1] / norm};
  };
  const auto v1 = vec_for(l1);
  auto v2 = vec_for(l2);
  const double scale = std::max({std::abs(l1), std::abs(l2), 1e-300});
  const double cross = std::abs(v1[0] * v2[1] - v1[1] * v2[0]);
  if (root <= 1e-12 * scale || cross < 1e-10) {
    eq.defective = true;
    // Generalized eigenvector w with (J - l I) w = v1.
    const double m00 = a - l1, m01 = b, m10 = c, m11 = d - l1;
    std::array<double, 2> w{0.0, 0.0};
    if (std::abs(m00) + std::abs(m01) > std::abs(m10) + std::abs(m11)) {
      if (std::abs(m00) >= std::abs(m01))
        w = {v1[0] / m00, 0.0};
      else
        w = {0.0, v1[0] / m01};
    } else {
      if (std::abs(m10) >= std::abs(m11))
        w = {v1[1] / m10, 0.0};
      else
        w = {0.0, v1[1] / m11};
    }
    v2 = w;
  }
  eq.eigenvectors = {{{v1[0], v2[0]}, {v1[1], v2[1]}}};
}

// 4th-order first-derivative stencil at node i of a uniformly sampled array.
double d4_at(std::span<const double> f, std::size_t i, double dz) {
  const std::size_t n = f.size();
  if (n < 5) {
    if (n < 2) return 0.0;
    if (i == 0) return (f[1] - f[0]) / dz;
    if (i == n - 1) return (f[n - 1] - f[n - 2]) / dz;
    return (f[i + 1] - f[i - 1]) / (2 * dz);
  }
  if (i == 0) return (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * dz);
  if (i == 1) return (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * dz);
  if (i == n - 1)
    return (25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] - 16 * f[n - 4] + 3 * f[n - 5]) / (12 * dz);
  if (i == n - 2)
    return (3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] + 6 * f[n - 4] - f[n - 5]) / (12 * dz);
  return (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * dz);
}

double interpolate(const ZGrid& grid, std::span<const double> values, double z) {
  if (grid.n == 1) return values[0];
  double x = (z - grid.z0) / grid.dz;
  x = std::clamp(x, 0.0, static_cast<double>(grid.n - 1));
  auto i = static_cast<std::size_t>(std::floor(x));
  if (i >= grid.n - 1) i = grid.n - 2;
  const double t = x - static_cast<double>(i);
  return (1 - t) * values[i] + t * values[i + 1];
}

}  // namespace

// ---------------------------------------------------------------------------

void WaveParams::validate(double eps_max) const {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("wave speed s must be positive");
  if (!(c_plus > 0.0) || !std::isfinite(c_plus)) throw InvalidArgument("c_plus must be positive");
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be non-negative");
  if (eps > eps_max)
    throw InvalidArgument("eps = " + std::to_string(eps) + " exceeds eps_max = " + std::to_string(eps_max));
}

ZGrid ZGrid::symmetric(double half_length, std::size_t n) {
  if (!(half_length > 0.0)) throw InvalidArgument("half_length must be positive");
  if (n < 2) throw InvalidArgument("z grid needs at least two nodes");
  return {-half_length, 2.0 * half_length / static_cast<double>(n - 1), n};
}

ZGrid ZGrid::with_spacing(double half_length, double dz) {
  if (!(dz > 0.0)) throw InvalidArgument("dz must be positive");
  const auto intervals = static_cast<std::size_t>(std::llround(2.0 * half_length / dz));
  return symmetric(half_length, std::max<std::size_t>(intervals, 1) + 1);
}

WaveProfile::WaveProfile(WaveParams params, ZGrid grid, Samples samples, ChemicalProfile chemical,
                         double z_center, WaveSolveInfo info)
    : params_(params),
      grid_(grid),
      samples_(std::move(samples)),
      chemical_(std::move(chemical)),
      z_center_(z_center),
      info_(info) {
  const std::size_t n = grid_.n;
  if (samples_.N.size() != n || samples_.P.size() != n || samples_.N_gap.size() != n ||
      samples_.P_gap.size() != n || chemical_.C.size() != n || chemical_.log_C.size() != n)
    throw DimensionMismatch("wave profile arrays do not match the grid");
}

double WaveProfile::dN(std::size_t i) const { return -samples_.P_gap[i] * samples_.N[i]; }

double WaveProfile::dP(std::size_t i) const {
  const double s = params_.s;
  const double eps = params_.eps;
  const double g = samples_.P_gap[i];
  if (eps == 0.0) return g * samples_.N[i] / s;
  if (left_of_center(i)) return (eps * g * g - (2 * eps + 1) * s * g + samples_.N_gap[i]) / eps;
  const double P = samples_.P[i];
  return (eps * P * P - s * P - samples_.N[i]) / eps;
}

double WaveProfile::d2N(std::size_t i) const {
  const double g = samples_.P_gap[i];
  return -dP(i) * samples_.N[i] - g * dN(i);
}

double WaveProfile::d2P(std::size_t i) const {
  const double eps = params_.eps;
  if (eps == 0.0) return -d2N(i) / params_.s;
  return (dP(i) * (2 * eps * samples_.P[i] - params_.s) - dN(i)) / eps;
}

double WaveProfile::P_at(double z) const { return interpolate(grid_, samples_.P, z); }
double WaveProfile::N_at(double z) const { return interpolate(grid_, samples_.N, z); }

// ---------------------------------------------------------------------------

WaveSlope wave_ode_rhs(double N, double P, const WaveParams& params) {
  if (params.eps == 0.0) throw InvalidArgument("wave_ode_rhs: eps = 0 is algebraic, use explicit_wave_eps0");
  const double s = params.s;
  const double eps = params.eps;
  return {-(s + P) * N, (eps * P * P - s * P - N) / eps};
}

Equilibria equilibria_and_linearization(const WaveParams& params) {
  params.validate(std::numeric_limits<double>::infinity());
  if (params.eps == 0.0) throw InvalidArgument("linearization requires eps > 0");
  const double s = params.s;
  const double eps = params.eps;
  Equilibria out;
  out.minus.N = params.n_minus();
  out.minus.P = -s;
  out.minus.jacobian = {{{0.0, -params.n_minus()}, {-1.0 / eps, -(2 * eps + 1) * s / eps}}};
  eigen2x2(out.minus);
  out.plus.N = 0.0;
  out.plus.P = 0.0;
  out.plus.jacobian = {{{-s, 0.0}, {-1.0 / eps, -s / eps}}};
  eigen2x2(out.plus);
  return out;
}

// ---------------------------------------------------------------------------

ChemicalProfile chemical_from_p(std::span<const double> P, double c_plus, const ZGrid& grid,
                                double exponent_clamp, double tail_tol) {
  const std::size_t n = grid.n;
  if (P.size() != n) throw DimensionMismatch("chemical_from_p: P does not match grid");
  if (!(c_plus > 0.0)) throw InvalidArgument("chemical_from_p: c_plus must be positive");
  for (double v : P)
    if (!std::isfinite(v)) throw InvalidArgument("chemical_from_p: non-finite P sample");
  if (n > 0 && std::abs(P[n - 1]) > tail_tol)
    throw InvalidArgument("chemical_from_p: right tail of P is not within tolerance of 0");

  ChemicalProfile out;
  out.C.assign(n, c_plus);
  out.log_C.assign(n, std::log(c_plus));
  const double h = grid.dz;
  double exponent = 0.0;
  for (std::size_t k = n; k-- > 1;) {
    const std::size_t i = k - 1;  // interval [z_i, z_{i+1}]
    double piece;
    if (n == 2)
      piece = 0.5 * h * (P[0] + P[1]);
    else if (i + 2 < n)
      piece = h / 12.0 * (5 * P[i] + 8 * P[i + 1] - P[i + 2]);
    else
      piece = h / 12.0 * (-P[i - 1] + 8 * P[i] + 5 * P[i + 1]);
    exponent += piece;
    out.log_C[i] = std::log(c_plus) + exponent;
    double e = exponent;
    if (e < -exponent_clamp || e > exponent_clamp) {
      e = std::clamp(e, -exponent_clamp, exponent_clamp);
      out.clamped = true;
    }
    out.C[i] = c_plus * std::exp(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

WaveProfile explicit_wave_eps0(double s, const ZGrid& grid, double c_plus) {
  WaveParams params{s, 0.0, c_plus};
  params.validate();
  WaveProfile::Samples smp;
  ChemicalProfile chem;
  const std::size_t n = grid.n;
  smp.N.resize(n);
  smp.P.resize(n);
  smp.N_gap.resize(n);
  smp.P_gap.resize(n);
  chem.C.resize(n);
  chem.log_C.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = s * grid[i];
    // sigma = 1/(1+e^x), 1 - sigma = 1/(1+e^-x), both evaluated without overflow.
    const double sig = x > 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
    const double cosig = x > 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    smp.N[i] = s * s * sig;
    smp.P[i] = -s * sig;
    smp.N_gap[i] = s * s * cosig;
    smp.P_gap[i] = s * cosig;
    // log(1 + e^{-x}) = softplus(-x)
    const double softplus = x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
    chem.log_C[i] = std::log(c_plus) - softplus;
    chem.C[i] = c_plus * std::exp(-softplus);
  }
  WaveSolveInfo info;
  info.tail_entry = kNaN;
  return WaveProfile(params, grid, std::move(smp), std::move(chem), 0.0, info);
}

// ---------------------------------------------------------------------------

WaveProfile solve_wave(const WaveParams& params, const ZGrid& grid, const WaveSolveOptions& opt) {
  params.validate(opt.eps_max);
  if (params.eps <= 0.0) throw InvalidArgument("solve_wave requires eps > 0");
  if (params.eps < opt.eps_min && !opt.allow_small_eps)
    throw InvalidArgument("solve_wave: eps below eps_min; the E+ approach is too stiff for the explicit shooter");
  if (grid.n < 5) throw InvalidArgument("solve_wave: grid needs at least 5 nodes");
  const double s = params.s;
  const double eps = params.eps;
  const double nm = params.n_minus();
  if (grid.back() * s > 650.0) throw InvalidArgument("solve_wave: right tail of N would underflow");

  const double delta = opt.delta_factor * s * s;
  const double tr = -(2 * eps + 1) * s / eps;
  const double det = -nm / eps;
  const double mu = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
  // Unstable direction in gap variables (n_minus - N, P + s).
  const double vnorm = std::hypot(nm, mu);
  const Vec2 dir{nm / vnorm, mu / vnorm};

  detail::Dopri5Options dopt;
  dopt.rtol = opt.tol;
  dopt.h_max = eps / (4.0 * s);
  dopt.h_min = opt.min_step;
  dopt.h_init = std::min(dopt.h_max, 1e-2 / mu);

  auto gap_rhs = [s, eps, nm](const Vec2& y) -> Vec2 {
    const double u = y[0], g = y[1];
    return {g * (nm - u), (eps * g * g - (2 * eps + 1) * s * g + u) / eps};
  };
  auto log_rhs = [s, eps](const Vec2& y) -> Vec2 {
    const double P = y[1];
    return {-(s + P), (eps * P * P - s * P - std::exp(y[0])) / eps};
  };

  auto box_gap = [&](const OdePoint& p) {
    const double u = p.y[0], g = p.y[1];
    if (!(u >= 0.0 && u <= nm && g >= 0.0 && g <= s))
      throw ConvergenceError("shooting trajectory left the invariant box near z = " + std::to_string(p.z));
  };

  const Vec2 y_start{delta * dir[0], delta * dir[1]};
  const double half = 0.5 * s;
  const double z_limit = 1e4 / s;

  // Pass 1: locate the P = -s/2 event.
  double z_event;
  {
    detail::Dopri5 rk(gap_rhs, dopt);
    OdePoint before, after;
    bool found = false;
    rk.advance(rk.start(0.0, y_start), z_limit, [&](const OdePoint& a, const OdePoint& b) {
      box_gap(b);
      if (b.y[1] >= half) {
        before = a;
        after = b;
        found = true;
        return true;
      }
      return false;
    });
    if (!found) throw ConvergenceError("shooting trajectory never reached P = -s/2");
    double lo = before.z, hi = after.z;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::hermite(before, after, 1, mid) < half)
        lo = mid;
      else
        hi = mid;
    }
    z_event = 0.5 * (lo + hi);
  }

  const std::size_t n = grid.n;
  WaveProfile::Samples smp;
  smp.N.assign(n, 0.0);
  smp.P.assign(n, 0.0);
  smp.N_gap.assign(n, 0.0);
  smp.P_gap.assign(n, 0.0);
  WaveSolveInfo info;
  info.rk_tol = opt.tol;
  info.tail_ball = opt.tail_ball;
  info.delta = delta;
  info.unstable_eigenvalue = mu;
  info.tail_entry = kNaN;

  auto put_gap = [&](std::size_t i, const Vec2& y) {
    smp.N_gap[i] = y[0];
    smp.P_gap[i] = y[1];
    smp.N[i] = nm - y[0];
    smp.P[i] = y[1] - s;
  };

  // Pass 2: node-aligned integration up to the event, refining its location.
  OdePoint at_event;
  std::size_t first_right = 0;  // first node with z_i > 0 (or z_i == 0 handled at the event)
  for (int refine = 0; refine < 4; ++refine) {
    detail::Dopri5 rk(gap_rhs, dopt);
    OdePoint cur = rk.start(0.0, y_start);
    std::size_t i = 0;
    for (; i < n; ++i) {
      const double zi = grid[i];
      if (std::abs(zi) <= 1e-9 * grid.dz || zi > 0.0) break;
      const double target = zi + z_event;
      if (target <= 0.0) {
        const double a = std::exp(mu * target);
        put_gap(i, {y_start[0] * a, y_start[1] * a});
        continue;
      }
      cur = rk.advance(cur, target, [&](const OdePoint&, const OdePoint& b) {
        box_gap(b);
        return false;
      });
      put_gap(i, cur.y);
    }
    cur = rk.advance(cur, z_event, [&](const OdePoint&, const OdePoint& b) {
      box_gap(b);
      return false;
    });
    at_event = cur;
    first_right = i;
    info.accepted_steps = rk.accepted();
    info.rejected_steps = rk.rejected();
    const double miss = at_event.y[1] - half;
    info.center_residual = std::abs(miss);
    if (std::abs(miss) <= 1e-13 * s) break;
    z_event -= miss / at_event.f[1];
  }
  info.shoot_start = -z_event;
  if (first_right < n && std::abs(grid[first_right]) <= 1e-9 * grid.dz) {
    put_gap(first_right, at_event.y);
    ++first_right;
  }

  // Pass 3: (ln N, P) from the event to the right end of the grid.
  {
    detail::Dopri5Options lopt = dopt;
    lopt.atol = {opt.tol, 1e-300};
    detail::Dopri5 rk(log_rhs, lopt);
    const double n_event = nm - at_event.y[0];
    OdePoint cur = rk.start(0.0, {std::log(n_event), at_event.y[1] - s});
    const double ball_N = opt.tail_ball * s * s;
    const double ball_P = opt.tail_ball * s;
    auto hook = [&](const OdePoint&, const OdePoint& b) {
      const double N = std::exp(b.y[0]);
      const double P = b.y[1];
      if (!(P <= 0.0 && P >= -s && N <= nm))
        throw ConvergenceError("shooting trajectory left the invariant box near z = " + std::to_string(b.z));
      if (std::isnan(info.tail_entry) && N < ball_N && std::abs(P) < ball_P) info.tail_entry = b.z;
      return false;
    };
    for (std::size_t i = first_right; i < n; ++i) {
      cur = rk.advance(cur, grid[i], hook);
      const double N = std::exp(cur.y[0]);
      smp.N[i] = N;
      smp.P[i] = cur.y[1];
      smp.N_gap[i] = nm - N;
      smp.P_gap[i] = cur.y[1] + s;
    }
    info.accepted_steps += rk.accepted();
    info.rejected_steps += rk.rejected();
  }

  ChemicalProfile chem = chemical_from_p(smp.P, params.c_plus, grid, opt.exponent_clamp,
                                         std::numeric_limits<double>::infinity());
  return WaveProfile(params, grid, std::move(smp), std::move(chem), 0.0, info);
}

// ---------------------------------------------------------------------------

std::vector<double> derivative4(std::span<const double> f, double dz) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = d4_at(f, i, dz);
  return out;
}

ProfileResiduals profile_residuals(const WaveProfile& w) {
  const std::size_t n = w.size();
  const double s = w.params().s;
  const double eps = w.params().eps;
  const double dz = w.grid().dz;
  std::vector<double> logN(n);
  for (std::size_t i = 0; i < n; ++i) logN[i] = std::log(w.N()[i]);
  const auto d_logN = derivative4(logN, dz);
  const auto d_Ngap = derivative4(w.N_gap(), dz);
  const auto d_Pgap = derivative4(w.P_gap(), dz);
  const auto d_P = derivative4(w.P(), dz);

  ProfileResiduals r;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = w.P_gap()[i];
    const double N = w.N()[i];
    const double P = w.P()[i];
    double r1, r2;
    if (w.z(i) <= w.z_center()) {
      r1 = d_Ngap[i] / N - g;
      r2 = eps * d_Pgap[i] - (eps * g * g - (2 * eps + 1) * s * g + w.N_gap()[i]);
    } else {
      r1 = -d_logN[i] - g;
      r2 = eps * d_P[i] - (eps * P * P - s * P - N);
    }
    r.np_relation = std::max(r.np_relation, std::abs(r1));
    r.p_equation = std::max(r.p_equation, std::abs(r2));
  }
  return r;
}

DissipationCoefficients dissipation_coefficients(const WaveProfile& w) {
  const std::size_t n = w.size();
  DissipationCoefficients c;
  c.dN_sq_over_N3.resize(n);
  c.dP_over_N.resize(n);
  c.P_dN_over_N2.resize(n);
  c.dP.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double N = w.N()[i];
    const double g = w.P_gap()[i];
    const double dP = w.dP(i);
    // N' = -g N, so (N')^2/N^3 = g^2/N and P N'/N^2 = -P g / N.
    c.dN_sq_over_N3[i] = g * g / N;
    c.dP_over_N[i] = dP / N;
    c.P_dN_over_N2[i] = -w.P()[i] * g / N;
    c.dP[i] = dP;
  }
  return c;
}

bool ValidationReport::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const ProfileCheck& c) { return c.passed; });
}

const ProfileCheck* ValidationReport::find(const std::string& name) const noexcept {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate_profile(const WaveProfile& w, const ValidationOptions& opt) {
  ValidationReport rep;
  const std::size_t n = w.size();
  const double s = w.params().s;
  const double eps = w.params().eps;
  const double nm = w.params().n_minus();
  const double zc = w.z_center();
  auto add = [&](std::string name, double value, double threshold, bool passed) {
    rep.checks.push_back({std::move(name), value, threshold, passed});
  };
  auto left = [&](std::size_t i) { return w.z(i) <= zc; };

  // Monotonicity, using the gap arrays on the left where N, P saturate.
  {
    double worst_N = -std::numeric_limits<double>::infinity();
    double worst_P = -std::numeric_limits<double>::infinity();
    double worst_C = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const bool both_left = left(i) && left(i + 1);
      const double dN = both_left ? -(w.N_gap()[i + 1] - w.N_gap()[i]) : w.N()[i + 1] - w.N()[i];
      const double dP = both_left ? w.P_gap()[i + 1] - w.P_gap()[i] : w.P()[i + 1] - w.P()[i];
      worst_N = std::max(worst_N, dN);
      worst_P = std::max(worst_P, -dP);
      worst_C = std::max(worst_C, -(w.log_C()[i + 1] - w.log_C()[i]));
    }
    // log C increments fall below one ulp in the saturated right tail, so
    // strictness comes from (log C)' = -P > 0 and the samples only have to
    // be non-decreasing.
    double max_P = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) max_P = std::max(max_P, w.P()[i]);
    const bool c_ok = worst_C <= 0.0 && max_P < 0.0;
    worst_C = std::max(worst_C, max_P);
    add("N_strictly_decreasing", worst_N, 0.0, worst_N < 0.0);
    add("P_strictly_increasing", worst_P, 0.0, worst_P < 0.0);
    add("C_strictly_increasing", worst_C, 0.0, c_ok);
  }

  // Far-field limits.
  {
    const double nl = std::abs(w.N_gap()[0]) / nm;
    const double pl = std::abs(w.P_gap()[0]) / s;
    const double nr = std::abs(w.N()[n - 1]) / (s * s);
    const double pr = std::abs(w.P()[n - 1]) / s;
    const double cr = std::abs(w.C()[n - 1] - w.params().c_plus) / w.params().c_plus;
    add("N_left_limit", nl, opt.endpoint_tol, nl <= opt.endpoint_tol);
    add("P_left_limit", pl, opt.endpoint_tol, pl <= opt.endpoint_tol);
    add("N_right_limit", nr, opt.endpoint_tol, nr <= opt.endpoint_tol);
    add("P_right_limit", pr, opt.endpoint_tol, pr <= opt.endpoint_tol);
    add("C_right_limit", cr, opt.endpoint_tol, cr <= opt.endpoint_tol);
  }

  // ODE residuals.
  {
    const auto r = profile_residuals(w);
    const double t1 = opt.residual_tol * std::max(1.0, s);
    const double t2 = opt.residual_tol * std::max(1.0, s * s);
    add("residual_NP_relation", r.np_relation, t1, r.np_relation <= t1);
    add("residual_P_equation", r.p_equation, t2, r.p_equation <= t2);
  }

  // Anchor point.
  {
    const double pc = std::abs(w.P_at(zc) + 0.5 * s);
    // Linear interpolation between nodes adds O(dz^2 |P''|).
    const double tol = opt.center_tol + 0.125 * w.grid().dz * w.grid().dz * s * s * s;
    add("center_P_value", pc, tol, pc <= tol);
    const double Nc = w.N_at(zc);
    const bool asserted = eps <= opt.lemma_eps_threshold;
    add("center_density_bound", Nc, 0.25 * s * s, !asserted || Nc >= 0.25 * s * s);
  }

  // Strict bound box in the interior.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      worst = std::min({worst, w.N()[i], w.N_gap()[i], w.P_gap()[i], -w.P()[i]});
    }
    add("bound_box", worst, 0.0, worst > 0.0);
  }

  // Weight bounds for w = 1/N on either side of z_center.
  {
    std::vector<double> logN(n);
    for (std::size_t i = 0; i < n; ++i) logN[i] = std::log(w.N()[i]);
    const auto d_logN = derivative4(logN, w.grid().dz);
    double growth = std::numeric_limits<double>::infinity();
    double bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (w.z(i) >= zc) {
        growth = std::min(growth, -d_logN[i] - 0.5 * s);
      } else {
        const double weight = 1.0 / w.N()[i];
        bound = std::max(bound, weight / (16.0 / (s * s * s * s) * w.N()[i]));
      }
    }
    if (!std::isfinite(growth)) growth = 0.0;
    add("weight_growth_right", growth, -opt.weight_tol, growth >= -opt.weight_tol);
    add("weight_bound_left", bound, 1.0 + opt.weight_tol, bound <= 1.0 + opt.weight_tol);
  }

  // Dissipation coefficients are positive for any monotone wave.
  {
    const auto c = dissipation_coefficients(w);
    const double m = std::min({*std::min_element(c.dN_sq_over_N3.begin(), c.dN_sq_over_N3.end()),
                               *std::min_element(c.dP_over_N.begin(), c.dP_over_N.end()),
                               *std::min_element(c.P_dN_over_N2.begin(), c.P_dN_over_N2.end())});
    add("dissipation_coefficients_positive", m, 0.0, m > 0.0);
  }

  for (std::size_t i = 0; i < n; ++i) {
    rep.sup_dN = std::max(rep.sup_dN, std::abs(w.dN(i)));
    rep.sup_d2N = std::max(rep.sup_d2N, std::abs(w.d2N(i)));
    rep.sup_dP = std::max(rep.sup_dP, std::abs(w.dP(i)));
    rep.sup_d2P = std::max(rep.sup_d2P, std::abs(w.d2P(i)));
  }
  return rep;
}

}  // namespace kswave
