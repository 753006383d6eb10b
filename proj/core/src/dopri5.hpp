#pragma once

// Adaptive Dormand-Prince 5(4) stepper for 2-component autonomous systems.
// Internal to the wave solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "kswave/error.hpp"

namespace kswave::detail {

using Vec2 = std::array<double, 2>;

struct OdePoint {
  double z = 0.0;
  Vec2 y{};
  Vec2 f{};
};

struct Dopri5Options {
  double rtol = 1e-8;
  Vec2 atol{1e-300, 1e-300};
  double h_max = 1.0;
  double h_min = 1e-12;
  double h_init = 1e-3;
};

class Dopri5 {
 public:
  using Rhs = std::function<Vec2(const Vec2&)>;
  // Called after each accepted step with (previous, current); returning true stops.
  using StepHook = std::function<bool(const OdePoint&, const OdePoint&)>;

  Dopri5(Rhs rhs, Dopri5Options options) : rhs_(std::move(rhs)), opt_(options), h_(options.h_init) {}

  OdePoint start(double z, const Vec2& y) const { return {z, y, rhs_(y)}; }

  /// Advances from `from` to exactly `z_target` (unless the hook stops early).
  OdePoint advance(OdePoint from, double z_target, const StepHook& hook = {}) {
    OdePoint cur = from;
    while (cur.z < z_target) {
      const double remaining = z_target - cur.z;
      double h = std::min(h_, opt_.h_max);
      // Stretch onto the target rather than leave a roundoff-sized sliver.
      bool last = remaining <= h * (1.0 + 1e-6);
      if (last) h = remaining;
      for (;;) {
        if (h < opt_.h_min * std::max(1.0, std::abs(cur.z)))
          throw StiffnessError("step size underflow at z = " + std::to_string(cur.z));
        Vec2 y_new{};
        Vec2 f_new{};
        const double err = attempt(cur, h, y_new, f_new);
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        if (err <= 1.0 && std::isfinite(y_new[0]) && std::isfinite(y_new[1])) {
          OdePoint next{last ? z_target : cur.z + h, y_new, f_new};
          ++accepted_;
          // Only grow the persistent step when it was not clipped by the target.
          if (!last || h >= h_) h_ = h * std::clamp(fac, 0.2, 5.0);
          const OdePoint prev = cur;
          cur = next;
          if (hook && hook(prev, cur)) return cur;
          break;
        }
        ++rejected_;
        h *= std::clamp(std::isfinite(err) ? fac : 0.2, 0.2, 0.9);
        last = false;
        h_ = h;
      }
    }
    return cur;
  }

  std::size_t accepted() const noexcept { return accepted_; }
  std::size_t rejected() const noexcept { return rejected_; }

 private:
  double attempt(const OdePoint& p, double h, Vec2& y_out, Vec2& f_out) const {
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                     a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                     a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                     b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                     e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    const Vec2& y = p.y;
    const Vec2& k1 = p.f;
    auto comb = [&](auto... terms) {
      Vec2 r = y;
      for (int c = 0; c < 2; ++c) r[c] += h * (... + (terms.first * (*terms.second)[c]));
      return r;
    };
    using T = std::pair<double, const Vec2*>;
    const Vec2 k2 = rhs_(comb(T{a21, &k1}));
    const Vec2 k3 = rhs_(comb(T{a31, &k1}, T{a32, &k2}));
    const Vec2 k4 = rhs_(comb(T{a41, &k1}, T{a42, &k2}, T{a43, &k3}));
    const Vec2 k5 = rhs_(comb(T{a51, &k1}, T{a52, &k2}, T{a53, &k3}, T{a54, &k4}));
    const Vec2 k6 = rhs_(comb(T{a61, &k1}, T{a62, &k2}, T{a63, &k3}, T{a64, &k4}, T{a65, &k5}));
    y_out = comb(T{b1, &k1}, T{b3, &k3}, T{b4, &k4}, T{b5, &k5}, T{b6, &k6});
    f_out = rhs_(y_out);
    const Vec2& k7 = f_out;

    double acc = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double e = h * (e1 * k1[c] + e3 * k3[c] + e4 * k4[c] + e5 * k5[c] + e6 * k6[c] + e7 * k7[c]);
      const double scale = opt_.atol[c] + opt_.rtol * std::max(std::abs(y[c]), std::abs(y_out[c]));
      acc += (e / scale) * (e / scale);
    }
    return std::sqrt(acc / 2.0);
  }

  Rhs rhs_;
  Dopri5Options opt_;
  double h_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

/// Cubic Hermite value of component c between two accepted points.
inline double hermite(const OdePoint& a, const OdePoint& b, int c, double z) {
  const double h = b.z - a.z;
  const double t = (z - a.z) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * a.y[c] + (t3 - 2 * t2 + t) * h * a.f[c] + (-2 * t3 + 3 * t2) * b.y[c] +
         (t3 - t2) * h * b.f[c];
}

}  // namespace kswave::detail
