#include "kswave/linear_solvers.hpp"

#include <array>
#include <cmath>

#include "kswave/error.hpp"

namespace kswave {

void solve_tridiagonal(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                       std::vector<double>& d) {
  const std::size_t n = b.size();
  if (a.size() != n || c.size() != n || d.size() != n) throw DimensionMismatch("tridiagonal band sizes differ");
  if (n == 0) return;
  std::vector<double> cp(n);
  double den = b[0];
  if (den == 0.0) throw InvalidArgument("tridiagonal: zero pivot");
  cp[0] = c[0] / den;
  d[0] /= den;
  for (std::size_t i = 1; i < n; ++i) {
    den = b[i] - a[i] * cp[i - 1];
    if (den == 0.0) throw InvalidArgument("tridiagonal: zero pivot");
    cp[i] = c[i] / den;
    d[i] = (d[i] - a[i] * d[i - 1]) / den;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= cp[i] * d[i + 1];
}

void solve_cyclic_tridiagonal(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& c, std::vector<double>& d) {
  const std::size_t n = b.size();
  if (n < 3) throw InvalidArgument("cyclic tridiagonal needs n >= 3");
  const double alpha = c[n - 1];  // A(n-1, 0)
  const double beta = a[0];       // A(0, n-1)
  const double gamma = -b[0];
  std::vector<double> bb = b;
  bb[0] -= gamma;
  bb[n - 1] -= alpha * beta / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  solve_tridiagonal(a, bb, c, d);
  solve_tridiagonal(a, bb, c, u);
  const double fact = (d[0] + beta * d[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) d[i] -= fact * u[i];
}

// ---------------------------------------------------------------------------

ZImplicit::ZImplicit(const StripGrid& g, double a) : nz_(g.nz()), ny_(g.ny()) {
  const std::size_t n = nz_;
  const double h2 = g.dz() * g.dz();
  std::vector<std::array<double, 5>> band(n, {0, 0, 0, 0, 0});
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = band[i];
    if (i == 0 || i == n - 1) {
      r[2] = 1.0;
    } else if (g.disc().z_order == 4 && i >= 2 && i + 2 < n) {
      const double k = a / (12 * h2);
      r = {k, -16 * k, 1 + 30 * k, -16 * k, k};
    } else {
      const double k = a / h2;
      r = {0, -k, 1 + 2 * k, -k, 0};
    }
  }
  l1_.assign(n, 0.0);
  l2_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double piv = band[k][2];
    if (!(std::abs(piv) > 1e-300)) throw InvalidArgument("ZImplicit: singular pivot");
    for (std::size_t r = k + 1; r <= std::min(k + 2, n - 1); ++r) {
      const std::size_t off = r - k;  // 1 or 2
      const double m = band[r][2 - off] / piv;
      (off == 1 ? l1_ : l2_)[r] = m;
      for (std::size_t c = k; c <= std::min(k + 2, n - 1); ++c) band[r][c + 2 - r] -= m * band[k][c + 2 - k];
    }
  }
  u0_.resize(n);
  u1_.resize(n);
  u2_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    u0_[k] = band[k][2];
    u1_[k] = band[k][3];
    u2_[k] = band[k][4];
  }
}

void ZImplicit::solve(double* f) const {
  const std::size_t n = nz_, ny = ny_;
  for (std::size_t r = 1; r < n; ++r) {
    double* row = f + r * ny;
    const double* p1 = f + (r - 1) * ny;
    const double m1 = l1_[r];
    if (r >= 2) {
      const double* p2 = f + (r - 2) * ny;
      const double m2 = l2_[r];
      for (std::size_t j = 0; j < ny; ++j) row[j] -= m1 * p1[j] + m2 * p2[j];
    } else {
      for (std::size_t j = 0; j < ny; ++j) row[j] -= m1 * p1[j];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double* row = f + k * ny;
    const double inv = 1.0 / u0_[k];
    if (k + 2 < n) {
      const double* q1 = f + (k + 1) * ny;
      const double* q2 = f + (k + 2) * ny;
      for (std::size_t j = 0; j < ny; ++j) row[j] = (row[j] - u1_[k] * q1[j] - u2_[k] * q2[j]) * inv;
    } else if (k + 1 < n) {
      const double* q1 = f + (k + 1) * ny;
      for (std::size_t j = 0; j < ny; ++j) row[j] = (row[j] - u1_[k] * q1[j]) * inv;
    } else {
      for (std::size_t j = 0; j < ny; ++j) row[j] *= inv;
    }
  }
}

// ---------------------------------------------------------------------------

YImplicit::YImplicit(const StripGrid& g, double a)
    : nz_(g.nz()), ny_(g.ny()), dense_(g.disc().y == YScheme::spectral) {
  const std::size_t n = ny_;
  if (dense_) {
    // Gauss-Jordan inverse of I - a D2 with partial pivoting.
    std::vector<double> m(n * n), inv(n * n, 0.0);
    const auto& d2 = g.spectral_d2();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m[i * n + j] = (i == j ? 1.0 : 0.0) - a * d2[i * n + j];
      inv[i * n + i] = 1.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < n; ++r)
        if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col])) piv = r;
      if (std::abs(m[piv * n + col]) < 1e-300) throw InvalidArgument("YImplicit: singular matrix");
      if (piv != col)
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(m[piv * n + j], m[col * n + j]);
          std::swap(inv[piv * n + j], inv[col * n + j]);
        }
      const double p = 1.0 / m[col * n + col];
      for (std::size_t j = 0; j < n; ++j) {
        m[col * n + j] *= p;
        inv[col * n + j] *= p;
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = m[r * n + col];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          m[r * n + j] -= f * m[col * n + j];
          inv[r * n + j] -= f * inv[col * n + j];
        }
      }
    }
    inverse_ = std::move(inv);
    return;
  }

  const double k = a / (g.dy() * g.dy());
  const double diag = 1 + 2 * k;
  off_ = -k;
  gamma_ = -diag;
  std::vector<double> b(n, diag);
  b[0] -= gamma_;
  b[n - 1] -= off_ * off_ / gamma_;
  cprime_.resize(n);
  denom_.resize(n);
  denom_[0] = b[0];
  cprime_[0] = off_ / denom_[0];
  for (std::size_t i = 1; i < n; ++i) {
    denom_[i] = b[i] - off_ * cprime_[i - 1];
    cprime_[i] = off_ / denom_[i];
  }
  zvec_.assign(n, 0.0);
  zvec_[0] = gamma_;
  zvec_[n - 1] = off_;
  // Forward/back sweep for the correction vector.
  zvec_[0] /= denom_[0];
  for (std::size_t i = 1; i < n; ++i) zvec_[i] = (zvec_[i] - off_ * zvec_[i - 1]) / denom_[i];
  for (std::size_t i = n - 1; i-- > 0;) zvec_[i] -= cprime_[i] * zvec_[i + 1];
  corr_ = 1.0 / (1.0 + zvec_[0] + off_ * zvec_[n - 1] / gamma_);
}

void YImplicit::solve(double* f) const {
  const std::size_t n = ny_;
  if (dense_) {
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < nz_; ++i) {
      double* row = f + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += inverse_[j * n + k] * row[k];
        tmp[j] = acc;
      }
      std::copy(tmp.begin(), tmp.end(), row);
    }
    return;
  }
  for (std::size_t i = 0; i < nz_; ++i) {
    double* d = f + i * n;
    d[0] /= denom_[0];
    for (std::size_t j = 1; j < n; ++j) d[j] = (d[j] - off_ * d[j - 1]) / denom_[j];
    for (std::size_t j = n - 1; j-- > 0;) d[j] -= cprime_[j] * d[j + 1];
    const double fact = (d[0] + off_ * d[n - 1] / gamma_) * corr_;
    for (std::size_t j = 0; j < n; ++j) d[j] -= fact * zvec_[j];
  }
}

}  // namespace kswave
