#pragma once

#include <cstddef>
#include <vector>

#include "kswave/field_ops.hpp"

namespace kswave {

/// Thomas algorithm; a = sub, b = diag, c = super (a[0], c[n-1] unused).
/// Overwrites d with the solution.
void solve_tridiagonal(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                       std::vector<double>& d);

/// Periodic tridiagonal system (corner entries a[0] and c[n-1]) by
/// Sherman-Morrison on top of the Thomas algorithm.
void solve_cyclic_tridiagonal(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& c, std::vector<double>& d);

/// Banded LU (two sub-, two super-diagonals, no pivoting) of I - a D_zz with
/// identity rows at both ends, so the boundary entries of the solution equal
/// those of the right-hand side.
class ZImplicit {
 public:
  ZImplicit(const StripGrid& g, double a);
  /// Solves in place for every y column of a grid field.
  void solve(double* field) const;

 private:
  std::size_t nz_, ny_;
  // Row i holds U(i, i..i+2) and the multipliers L(i+1, i), L(i+2, i).
  std::vector<double> u0_, u1_, u2_, l1_, l2_;
};

/// Factorization of I - a D_yy along every periodic y row.
class YImplicit {
 public:
  YImplicit(const StripGrid& g, double a);
  void solve(double* field) const;

 private:
  std::size_t nz_, ny_;
  bool dense_;
  std::vector<double> inverse_;  // dense ny x ny (spectral)
  // Cyclic tridiagonal with constant bands: Thomas sweep coefficients for
  // the modified matrix plus the Sherman-Morrison correction vector.
  std::vector<double> cprime_, denom_, zvec_;
  double off_ = 0.0, gamma_ = 0.0, corr_ = 0.0;
};

}  // namespace kswave
