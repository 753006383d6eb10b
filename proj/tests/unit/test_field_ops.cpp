#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kswave/error.hpp"
#include "kswave/field_ops.hpp"

using namespace kswave;

namespace {

constexpr double kPi = std::numbers::pi;

Field bump_field(const StripGrid& g, double zc = 0.0, double width = 1.0, int mode = 1) {
  return sample(g, [&](double z, double y) {
    const double u = (z - zc) / width;
    return std::exp(-u * u) * (1.0 + 0.5 * std::cos(2 * kPi * mode * y / g.lambda()));
  });
}

double max_diff_interior(const Field& a, const Field& b, const StripGrid& g, std::size_t margin) {
  double m = 0;
  for (std::size_t i = margin; i + margin < g.nz(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) m = std::max(m, std::abs(a[g.index(i, j)] - b[g.index(i, j)]));
  return m;
}

WaveOnGrid eps0_wave(const StripGrid& g) {
  return sample_wave(explicit_wave_eps0(1.0, g.zgrid()), g);
}

}  // namespace

TEST(StripGrid, SpacingsAndValidation) {
  const StripGrid g(20.0, 257, 0.3, 32);
  EXPECT_DOUBLE_EQ(g.dz(), 40.0 / 256);
  EXPECT_DOUBLE_EQ(g.dy(), 0.3 / 32);
  EXPECT_EQ(g.size(), 257u * 32u);
  EXPECT_DOUBLE_EQ(g.z(0), -20.0);
  EXPECT_NEAR(g.z(256), 20.0, 1e-12);
  EXPECT_THROW(StripGrid(20.0, 15, 0.3, 32), InvalidArgument);
  EXPECT_THROW(StripGrid(20.0, 64, 0.3, 5), InvalidArgument);
  EXPECT_THROW(StripGrid(20.0, 64, 0.3, 2), InvalidArgument);
  EXPECT_THROW(StripGrid(-1.0, 64, 0.3, 8), InvalidArgument);
  EXPECT_THROW(StripGrid(20.0, 64, 0.0, 8), InvalidArgument);
  EXPECT_THROW(StripGrid(20.0, 1 << 12, 0.3, 1 << 12, {}, 1 << 20), InvalidArgument);
}

TEST(Operators, ShapeMismatchThrows) {
  const StripGrid g(5.0, 16, 1.0, 4);
  EXPECT_THROW(d_z(Field(10), g), DimensionMismatch);
  EXPECT_THROW(div({Field(g.size()), Field(3)}, g), DimensionMismatch);
}

TEST(Operators, GradOfConstantIsZero) {
  for (auto ys : {YScheme::centered, YScheme::spectral}) {
    const StripGrid g(5.0, 32, 1.0, 8, {4, ys});
    const Field c(g.size(), 3.7);
    const auto v = grad(c, g);
    EXPECT_LT(max_abs(v.z), 1e-12);
    EXPECT_LT(max_abs(v.y), 1e-12);
    EXPECT_LT(max_abs(laplacian(c, g)), 1e-10);
  }
}

TEST(Operators, LaplacianOfYEigenfunction) {
  const double lambda = 0.3;
  for (std::size_t ny : {16u, 32u, 64u}) {
    const StripGrid g(5.0, 32, lambda, ny);
    const Field f = sample(g, [&](double, double y) { return std::sin(2 * kPi * y / lambda); });
    const Field l = laplacian(f, g);
    const double k = 2 * kPi / lambda, dy = g.dy();
    // Exact symbol of the centered 3-point stencil, and the continuum value.
    const double symbol = -4.0 / (dy * dy) * std::pow(std::sin(k * dy / 2), 2);
    double err_sym = 0, err_cont = 0;
    for (std::size_t q = 0; q < g.size(); ++q) {
      err_sym = std::max(err_sym, std::abs(l[q] - symbol * f[q]));
      err_cont = std::max(err_cont, std::abs(l[q] + k * k * f[q]));
    }
    EXPECT_LT(err_sym, 1e-9 * k * k);
    EXPECT_LT(err_cont, 0.1 * k * k * k * k * dy * dy);
  }
  const StripGrid gs(5.0, 32, lambda, 16, {4, YScheme::spectral});
  const Field f = sample(gs, [&](double, double y) { return std::sin(2 * kPi * y / lambda); });
  const Field l = laplacian(f, gs);
  const double k = 2 * kPi / lambda;
  for (std::size_t q = 0; q < gs.size(); ++q) EXPECT_NEAR(l[q], -k * k * f[q], 1e-9 * k * k);
}

TEST(Operators, DivGradConvergesToLaplacian) {
  std::vector<double> h, e;
  for (std::size_t r : {1u, 2u, 4u}) {
    const StripGrid g(6.0, 48 * r + 1, 1.0, 16 * r);
    const Field f = bump_field(g, 0.0, 1.0);
    const Field a = div(grad(f, g), g), b = laplacian(f, g);
    h.push_back(g.dz());
    e.push_back(max_diff_interior(a, b, g, 4));
  }
  const double order = std::log(e[0] / e[2]) / std::log(h[0] / h[2]);
  EXPECT_GE(order, 1.9);
}

TEST(Operators, ZDerivativesHaveDesignOrder) {
  for (int order : {2, 4}) {
    std::vector<double> err;
    for (std::size_t r : {1u, 2u}) {
      const StripGrid g(6.0, 64 * r + 1, 1.0, 4, {order, YScheme::centered});
      const Field f = sample(g, [](double z, double) { return std::exp(-z * z); });
      const Field fz = d_z(f, g);
      const Field fzz = d_zz(f, g);
      double e = 0;
      for (std::size_t i = 3; i + 3 < g.nz(); ++i) {
        const double z = g.z(i);
        e = std::max(e, std::abs(fz[g.index(i, 0)] + 2 * z * std::exp(-z * z)));
        e = std::max(e, std::abs(fzz[g.index(i, 0)] - (4 * z * z - 2) * std::exp(-z * z)));
      }
      err.push_back(e);
    }
    EXPECT_GE(std::log2(err[0] / err[1]), order - 0.2) << "z_order " << order;
  }
}

TEST(Operators, SummationByParts) {
  const StripGrid g(8.0, 129, 0.5, 16);
  const Field f = bump_field(g, -1.0, 1.0, 1);
  const VectorField G{bump_field(g, 0.5, 1.2, 2), bump_field(g, 0.0, 0.8, 3)};
  const auto gf = grad(f, g);
  const double lhs = inner(gf.z, G.z, g) + inner(gf.y, G.y, g);
  const double rhs = -inner(f, div(G, g), g);
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs) + 1e-14);
}

TEST(Operators, YOperatorsCommuteWithShift) {
  for (auto ys : {YScheme::centered, YScheme::spectral}) {
    const StripGrid g(4.0, 32, 1.0, 8, {4, ys});
    Field f(g.size());
    for (std::size_t q = 0; q < f.size(); ++q) f[q] = std::sin(0.37 * static_cast<double>(q * q % 101));
    auto shift = [&](const Field& u) {
      Field out(u.size());
      for (std::size_t i = 0; i < g.nz(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) out[g.index(i, (j + 1) % g.ny())] = u[g.index(i, j)];
      return out;
    };
    EXPECT_LT(max_diff_interior(d_y(shift(f), g), shift(d_y(f, g)), g, 0), 1e-12);
    EXPECT_LT(max_diff_interior(d_yy(shift(f), g), shift(d_yy(f, g)), g, 0), 1e-10);
  }
}

TEST(Operators, GradientIsCurlFree) {
  for (auto ys : {YScheme::centered, YScheme::spectral}) {
    const StripGrid g(4.0, 40, 0.7, 12, {4, ys});
    Field f(g.size());
    for (std::size_t q = 0; q < f.size(); ++q) f[q] = std::cos(0.11 * static_cast<double>(q % 97) + 0.3 * (q / 97));
    EXPECT_LT(max_abs(curl(grad(f, g), g)), 1e-9);
  }
}

TEST(ColeHopf, ForwardOfConstantAndWaveProfile) {
  const StripGrid g(15.0, 301, 0.3, 8);
  EXPECT_LT(max_abs(cole_hopf_forward(Field(g.size(), -2.0), g).z), 1e-12);
  const auto w = eps0_wave(g);
  const Field logc = sample(g, [&](double z, double) { return -std::log1p(std::exp(-z)); });
  const auto p = cole_hopf_forward(logc, g);
  double e = 0;
  for (std::size_t i = 0; i < g.nz(); ++i) e = std::max(e, std::abs(p.z[g.index(i, 3)] - w.P[i]));
  EXPECT_LT(e, 1e-3);
  EXPECT_EQ(max_abs(p.y), 0.0);
}

TEST(ColeHopf, InverseOfZeroIsAnchor) {
  const StripGrid g(5.0, 32, 1.0, 8);
  const Field l = cole_hopf_inverse({Field(g.size(), 0.0), Field(g.size(), 0.0)}, 1.25, g);
  for (double v : l) EXPECT_EQ(v, 1.25);
}

TEST(ColeHopf, RoundTripRecoversFieldUpToAnchor) {
  std::vector<double> err, h;
  for (std::size_t r : {1u, 2u}) {
    const StripGrid g(6.0, 96 * r + 1, 1.0, 16 * r);
    const Field f = sample(g, [](double z, double y) {
      return 0.4 * std::tanh(z) + 0.2 * std::exp(-z * z) * std::sin(2 * kPi * y);
    });
    const std::size_t anchor = g.index(g.nz() - 1, g.ny() / 2);
    const Field back = cole_hopf_inverse(cole_hopf_forward(f, g), 0.7, g);
    double e = 0;
    for (std::size_t q = 0; q < f.size(); ++q) e = std::max(e, std::abs(back[q] - (f[q] - f[anchor] + 0.7)));
    err.push_back(e);
    h.push_back(g.dz());
    EXPECT_DOUBLE_EQ(back[anchor], 0.7);
  }
  EXPECT_LT(err[0], 1e-2);
  EXPECT_GT(err[0] / err[1], 3.5);
}

TEST(ColeHopf, CurlInjectionRejected) {
  const StripGrid g(4.0, 41, 1.0, 16);
  VectorField p{sample(g, [](double z, double y) { return std::exp(-z * z) * std::sin(2 * kPi * y); }),
                Field(g.size(), 0.0)};
  EXPECT_THROW(cole_hopf_inverse(p, 0.0, g), CurlViolation);
}

TEST(Reconstruct, ZeroPerturbationGivesWave) {
  const StripGrid g(10.0, 101, 0.3, 8);
  const auto w = eps0_wave(g);
  const auto r = reconstruct_primitive(PerturbState::zero(g), w);
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) {
      EXPECT_EQ(r.state.n[g.index(i, j)], w.N[i]);
      EXPECT_EQ(r.state.p.z[g.index(i, j)], w.P[i]);
      EXPECT_EQ(r.state.p.y[g.index(i, j)], 0.0);
    }
  EXPECT_FALSE(r.negative_density);
  const auto nc = reconstruct_primitive_nc(PerturbState::zero(g), w);
  for (std::size_t i = 0; i < g.nz(); ++i) EXPECT_EQ(nc.state.logc[g.index(i, 0)], w.log_C[i]);
}

TEST(Reconstruct, PlanarPsiBump) {
  const StripGrid g(10.0, 401, 0.3, 8);
  const auto w = eps0_wave(g);
  auto st = PerturbState::zero(g);
  const double delta = 1e-3;
  st.psi = sample(g, [&](double z, double) { return delta * std::exp(-z * z); });
  const auto r = reconstruct_primitive(st, w);
  for (std::size_t i = 0; i < g.nz(); ++i) {
    const double z = g.z(i);
    EXPECT_NEAR(r.state.p.z[g.index(i, 5)], w.P[i] - 2 * delta * z * std::exp(-z * z), 1e-7);
    EXPECT_EQ(r.state.p.y[g.index(i, 5)], 0.0);
  }
}

TEST(Reconstruct, NegativeDensityReportedNotHidden) {
  const StripGrid g(10.0, 101, 0.3, 8);
  const auto w = eps0_wave(g);
  auto st = PerturbState::zero(g);
  st.phi1 = sample(g, [&](double z, double) { return -5.0 * std::exp(-(z - 5) * (z - 5)); });
  const auto r = reconstruct_primitive(st, w);
  EXPECT_TRUE(r.negative_density);
  EXPECT_LT(r.min_density, 0.0);
}

TEST(Reconstruct, ExtractGradientPartInvertsDefinition) {
  const StripGrid g(8.0, 81, 0.4, 8);
  const auto w = eps0_wave(g);
  auto st = PerturbState::zero(g);
  st.phi1 = bump_field(g, 0.0, 1.0, 1);
  st.phi2 = bump_field(g, 0.5, 1.0, 2);
  st.psi = bump_field(g, -0.5, 1.0, 1);
  const auto r = reconstruct_primitive(st, w);
  const auto gp = extract_perturbation_gradient_part(r.state, w);
  const Field u = div({st.phi1, st.phi2}, g);
  const auto v = grad(st.psi, g);
  EXPECT_LT(max_diff_interior(gp.u, u, g, 0), 1e-13);
  EXPECT_LT(max_diff_interior(gp.v.z, v.z, g, 0), 1e-13);
  EXPECT_LT(max_diff_interior(gp.v.y, v.y, g, 0), 1e-13);
  EXPECT_LT(r.state.curl_residual(), 1e-10);
  const auto pure = extract_perturbation_gradient_part(wave_state(g, w, Representation::np), w);
  EXPECT_EQ(max_abs(pure.u), 0.0);
  EXPECT_EQ(max_abs(pure.v.z), 0.0);
}

TEST(SampleWave, RequiresIntegerRefinement) {
  const StripGrid g(10.0, 101, 0.3, 8);
  EXPECT_NO_THROW(sample_wave(explicit_wave_eps0(1.0, ZGrid::symmetric(10.0, 401)), g));
  EXPECT_THROW(sample_wave(explicit_wave_eps0(1.0, ZGrid::symmetric(10.0, 150)), g), DimensionMismatch);
}
