#include "kswave/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kswave/error.hpp"

namespace kswave {

namespace {

// Applies a z-direction operator column by column; `row(i, f, k)` must return
// the operator at node i for the column offset k.
template <class Row>
Field apply_z(const Field& f, const StripGrid& g, Row&& row) {
  check_shape(f, g);
  Field out(g.size());
  const std::size_t ny = g.ny();
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < ny; ++j) out[i * ny + j] = row(i, f.data() + j, ny);
  return out;
}

double z_first(std::size_t i, const double* f, std::size_t st, std::size_t nz, double dz, int order) {
  auto at = [&](std::size_t k) { return f[k * st]; };
  if (i == 0) return (-3 * at(0) + 4 * at(1) - at(2)) / (2 * dz);
  if (i == nz - 1) return (3 * at(nz - 1) - 4 * at(nz - 2) + at(nz - 3)) / (2 * dz);
  if (order == 4 && i >= 2 && i + 2 < nz)
    return (at(i - 2) - 8 * at(i - 1) + 8 * at(i + 1) - at(i + 2)) / (12 * dz);
  return (at(i + 1) - at(i - 1)) / (2 * dz);
}

double z_second(std::size_t i, const double* f, std::size_t st, std::size_t nz, double dz, int order) {
  auto at = [&](std::size_t k) { return f[k * st]; };
  const double h2 = dz * dz;
  if (i == 0) return (2 * at(0) - 5 * at(1) + 4 * at(2) - at(3)) / h2;
  if (i == nz - 1) return (2 * at(nz - 1) - 5 * at(nz - 2) + 4 * at(nz - 3) - at(nz - 4)) / h2;
  if (order == 4 && i >= 2 && i + 2 < nz)
    return (-at(i - 2) + 16 * at(i - 1) - 30 * at(i) + 16 * at(i + 1) - at(i + 2)) / (12 * h2);
  return (at(i - 1) - 2 * at(i) + at(i + 1)) / h2;
}

Field apply_y_dense(const Field& f, const StripGrid& g, const std::vector<double>& m) {
  const std::size_t ny = g.ny();
  Field out(g.size(), 0.0);
  for (std::size_t i = 0; i < g.nz(); ++i) {
    const double* row = f.data() + i * ny;
    double* o = out.data() + i * ny;
    for (std::size_t j = 0; j < ny; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ny; ++k) acc += m[j * ny + k] * row[k];
      o[j] = acc;
    }
  }
  return out;
}

// Integral of f over [x_k, x_{k+1}] from neighbouring samples (exact for
// cubics in the interior, quadratics at the ends).
double interval_integral(const double* f, std::size_t st, std::size_t n, std::size_t k, double h) {
  auto at = [&](std::size_t m) { return f[m * st]; };
  if (n == 2) return 0.5 * h * (at(0) + at(1));
  if (k == 0) return h / 12.0 * (5 * at(0) + 8 * at(1) - at(2));
  if (k + 2 >= n) return h / 12.0 * (-at(k - 1) + 8 * at(k) + 5 * at(k + 1));
  return h / 24.0 * (-at(k - 1) + 13 * at(k) + 13 * at(k + 1) - at(k + 2));
}

double derivative_scale(const VectorField& p, const StripGrid& g) {
  return std::max({max_abs(d_z(p.z, g)), max_abs(d_y(p.z, g)), max_abs(d_z(p.y, g)), max_abs(d_y(p.y, g))});
}

}  // namespace

// ---------------------------------------------------------------------------

StripGrid::StripGrid(double L_z, std::size_t nz, double lambda, std::size_t ny, Discretization disc,
                     std::size_t node_budget)
    : L_z_(L_z), lambda_(lambda), nz_(nz), ny_(ny), disc_(disc) {
  if (!(L_z > 0.0) || !std::isfinite(L_z)) throw InvalidArgument("StripGrid: L_z must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("StripGrid: lambda must be positive");
  if (nz < 16) throw InvalidArgument("StripGrid: nz must be at least 16");
  if (ny < 4 || ny % 2 != 0) throw InvalidArgument("StripGrid: ny must be even and at least 4");
  if (nz > node_budget / ny) throw InvalidArgument("StripGrid: nz * ny exceeds the node budget");
  if (disc.z_order != 2 && disc.z_order != 4) throw InvalidArgument("StripGrid: z_order must be 2 or 4");
  dz_ = 2.0 * L_z / static_cast<double>(nz - 1);
  dy_ = lambda / static_cast<double>(ny);

  auto spec = std::make_shared<Spectral>();
  if (disc.y == YScheme::spectral) {
    const double pi = std::numbers::pi;
    const double h = 2 * pi / static_cast<double>(ny);
    const double k = 2 * pi / lambda;
    spec->d1.assign(ny * ny, 0.0);
    spec->d2.assign(ny * ny, 0.0);
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t m = 0; m < ny; ++m) {
        const long d = static_cast<long>(j) - static_cast<long>(m);
        if (d == 0) {
          spec->d2[j * ny + m] = k * k * (-pi * pi / (3 * h * h) - 1.0 / 6.0);
          continue;
        }
        const double sign = (d % 2 == 0) ? 1.0 : -1.0;
        const double half = static_cast<double>(d) * h / 2;
        spec->d1[j * ny + m] = k * 0.5 * sign / std::tan(half);
        spec->d2[j * ny + m] = -k * k * sign / (2 * std::sin(half) * std::sin(half));
      }
    }
  }
  spec_ = std::move(spec);
}

bool StripGrid::same_as(const StripGrid& o) const noexcept {
  return nz_ == o.nz_ && ny_ == o.ny_ && L_z_ == o.L_z_ && lambda_ == o.lambda_ &&
         disc_.z_order == o.disc_.z_order && disc_.y == o.disc_.y;
}

Field zeros(const StripGrid& g) { return Field(g.size(), 0.0); }

void check_shape(const Field& f, const StripGrid& g) {
  if (f.size() != g.size())
    throw DimensionMismatch("field has " + std::to_string(f.size()) + " values, grid has " +
                            std::to_string(g.size()) + " nodes");
}

// ---------------------------------------------------------------------------

Field d_z(const Field& f, const StripGrid& g) {
  const std::size_t nz = g.nz();
  const double dz = g.dz();
  const int order = g.disc().z_order;
  return apply_z(f, g, [&](std::size_t i, const double* col, std::size_t st) {
    return z_first(i, col, st, nz, dz, order);
  });
}

Field d_zz(const Field& f, const StripGrid& g) {
  const std::size_t nz = g.nz();
  const double dz = g.dz();
  const int order = g.disc().z_order;
  return apply_z(f, g, [&](std::size_t i, const double* col, std::size_t st) {
    return z_second(i, col, st, nz, dz, order);
  });
}

Field d_y(const Field& f, const StripGrid& g) {
  check_shape(f, g);
  if (g.disc().y == YScheme::spectral) return apply_y_dense(f, g, g.spectral_d1());
  const std::size_t ny = g.ny();
  const double inv = 1.0 / (2 * g.dy());
  Field out(g.size());
  for (std::size_t i = 0; i < g.nz(); ++i) {
    const double* r = f.data() + i * ny;
    double* o = out.data() + i * ny;
    for (std::size_t j = 0; j < ny; ++j) o[j] = (r[(j + 1) % ny] - r[(j + ny - 1) % ny]) * inv;
  }
  return out;
}

Field d_yy(const Field& f, const StripGrid& g) {
  check_shape(f, g);
  if (g.disc().y == YScheme::spectral) return apply_y_dense(f, g, g.spectral_d2());
  const std::size_t ny = g.ny();
  const double inv = 1.0 / (g.dy() * g.dy());
  Field out(g.size());
  for (std::size_t i = 0; i < g.nz(); ++i) {
    const double* r = f.data() + i * ny;
    double* o = out.data() + i * ny;
    for (std::size_t j = 0; j < ny; ++j) o[j] = (r[(j + 1) % ny] - 2 * r[j] + r[(j + ny - 1) % ny]) * inv;
  }
  return out;
}

VectorField grad(const Field& f, const StripGrid& g) { return {d_z(f, g), d_y(f, g)}; }

Field div(const VectorField& v, const StripGrid& g) {
  Field out = d_z(v.z, g);
  const Field b = d_y(v.y, g);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
  return out;
}

Field laplacian(const Field& f, const StripGrid& g) {
  Field out = d_zz(f, g);
  const Field b = d_yy(f, g);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
  return out;
}

Field curl(const VectorField& v, const StripGrid& g) {
  Field out = d_z(v.y, g);
  const Field b = d_y(v.z, g);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
  return out;
}

double inner(const Field& a, const Field& b, const StripGrid& g, const std::vector<double>* weight) {
  check_shape(a, g);
  check_shape(b, g);
  if (weight && weight->size() != g.nz()) throw DimensionMismatch("weight length must equal nz");
  const std::size_t ny = g.ny();
  double total = 0.0;
  for (std::size_t i = 0; i < g.nz(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < ny; ++j) row += a[i * ny + j] * b[i * ny + j];
    double wz = (i == 0 || i == g.nz() - 1) ? 0.5 : 1.0;
    if (weight) wz *= (*weight)[i];
    total += wz * row;
  }
  return total * g.dz() * g.dy();
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f) {
    if (std::isnan(v)) return v;
    m = std::max(m, std::abs(v));
  }
  return m;
}

// ---------------------------------------------------------------------------

VectorField cole_hopf_forward(const Field& logc, const StripGrid& g) {
  VectorField p = grad(logc, g);
  for (double& v : p.z) v = -v;
  for (double& v : p.y) v = -v;
  return p;
}

Field cole_hopf_inverse(const VectorField& p, double anchor, const StripGrid& g, const ColeHopfOptions& opt) {
  check_shape(p.z, g);
  check_shape(p.y, g);
  const double scale = derivative_scale(p, g);
  const double c = max_abs(curl(p, g));
  if (std::isnan(c) || c > opt.curl_tol * scale)
    throw CurlViolation("cole_hopf_inverse: curl " + std::to_string(c) + " exceeds " +
                        std::to_string(opt.curl_tol) + " x derivative scale " + std::to_string(scale));

  const std::size_t nz = g.nz(), ny = g.ny(), j0 = ny / 2;
  Field L(g.size());
  L[g.index(nz - 1, j0)] = anchor;
  for (std::size_t i = nz - 1; i-- > 0;)
    L[g.index(i, j0)] = L[g.index(i + 1, j0)] + interval_integral(p.z.data() + j0, ny, nz, i, g.dz());

  // Periodic rows: copy each row starting at j0 so the interval rule sees a
  // contiguous, wrapped sequence.
  std::vector<double> row(ny + 3);
  const double h = g.dy();
  for (std::size_t i = 0; i < nz; ++i) {
    for (std::size_t m = 0; m < ny + 3; ++m) row[m] = p.y[g.index(i, (j0 + ny - 1 + m) % ny)];
    // row[m] holds p2 at j0 - 1 + m.
    double acc = L[g.index(i, j0)];
    for (std::size_t k = 0; k + 1 < ny; ++k) {
      const double seg = h / 24.0 * (-row[k] + 13 * row[k + 1] + 13 * row[k + 2] - row[k + 3]);
      acc -= seg;
      L[g.index(i, (j0 + k + 1) % ny)] = acc;
    }
  }
  return L;
}

// ---------------------------------------------------------------------------

WaveOnGrid sample_wave(const WaveProfile& wave, const StripGrid& g) {
  const ZGrid& wz = wave.grid();
  const double ratio = g.dz() / wz.dz;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio ||
      std::abs(wz.z0 + g.L_z()) > 1e-9 * g.dz() || (g.nz() - 1) * stride + 1 != wz.n)
    throw DimensionMismatch("wave profile grid does not coincide with the strip z nodes");
  WaveOnGrid out;
  out.params = wave.params();
  const std::size_t nz = g.nz();
  for (auto* v : {&out.N, &out.P, &out.N_gap, &out.P_gap, &out.log_C, &out.dN, &out.dP}) v->resize(nz);
  for (std::size_t i = 0; i < nz; ++i) {
    const std::size_t k = i * stride;
    out.N[i] = wave.N()[k];
    out.P[i] = wave.P()[k];
    out.N_gap[i] = wave.N_gap()[k];
    out.P_gap[i] = wave.P_gap()[k];
    out.log_C[i] = wave.log_C()[k];
    out.dN[i] = wave.dN(k);
    out.dP[i] = wave.dP(k);
  }
  return out;
}

PerturbState PerturbState::zero(const StripGrid& g, double t) { return {g, t, zeros(g), zeros(g), zeros(g)}; }

double PrimitiveState::curl_residual() const {
  if (rep != Representation::np) return 0.0;
  const double scale = derivative_scale(p, grid);
  const double c = max_abs(curl(p, grid));
  return scale > 0.0 ? c / scale : c;
}

namespace {

void check_wave(const WaveOnGrid& w, const StripGrid& g) {
  if (w.N.size() != g.nz()) throw DimensionMismatch("wave samples do not match the strip z nodes");
}

Reconstruction density_part(const PerturbState& s, const WaveOnGrid& w, Representation rep) {
  const StripGrid& g = s.grid;
  check_wave(w, g);
  check_shape(s.phi1, g);
  check_shape(s.phi2, g);
  check_shape(s.psi, g);
  Reconstruction r{{g, s.t, rep, div({s.phi1, s.phi2}, g), {}, {}}, 0.0, false};
  const std::size_t ny = g.ny();
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      double& v = r.state.n[i * ny + j];
      v += w.N[i];
      mn = std::min(mn, v);
    }
  r.min_density = mn;
  r.negative_density = mn < 0.0;
  return r;
}

}  // namespace

Reconstruction reconstruct_primitive(const PerturbState& s, const WaveOnGrid& w) {
  Reconstruction r = density_part(s, w, Representation::np);
  const StripGrid& g = s.grid;
  r.state.p = grad(s.psi, g);
  const std::size_t ny = g.ny();
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < ny; ++j) r.state.p.z[i * ny + j] += w.P[i];
  return r;
}

Reconstruction reconstruct_primitive_nc(const PerturbState& s, const WaveOnGrid& w) {
  Reconstruction r = density_part(s, w, Representation::nc);
  const StripGrid& g = s.grid;
  r.state.logc.resize(g.size());
  const std::size_t ny = g.ny();
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < ny; ++j) r.state.logc[i * ny + j] = w.log_C[i] - s.psi[i * ny + j];
  return r;
}

PrimitiveState wave_state(const StripGrid& g, const WaveOnGrid& w, Representation rep) {
  return (rep == Representation::np ? reconstruct_primitive(PerturbState::zero(g), w)
                                    : reconstruct_primitive_nc(PerturbState::zero(g), w))
      .state;
}

GradientPart extract_perturbation_gradient_part(const PrimitiveState& s, const WaveOnGrid& w) {
  if (s.rep != Representation::np) throw InvalidArgument("extract_perturbation_gradient_part needs the (n, p) form");
  const StripGrid& g = s.grid;
  check_wave(w, g);
  check_shape(s.n, g);
  check_shape(s.p.z, g);
  check_shape(s.p.y, g);
  GradientPart out{s.n, s.p};
  const std::size_t ny = g.ny();
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      out.u[i * ny + j] -= w.N[i];
      out.v.z[i * ny + j] -= w.P[i];
    }
  return out;
}

}  // namespace kswave
