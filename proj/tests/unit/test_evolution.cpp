#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kswave/error.hpp"
#include "kswave/evolution.hpp"

using namespace kswave;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

const WaveOnGrid& wave_for(const StripGrid& g) {
  static std::map<std::pair<std::size_t, double>, WaveOnGrid> cache;
  const auto key = std::make_pair(g.nz(), g.L_z());
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto prof = solve_wave({1.0, 0.05, 1.0}, ZGrid::symmetric(g.L_z(), (g.nz() - 1) * 16 + 1));
    it = cache.emplace(key, sample_wave(prof, g)).first;
  }
  return it->second;
}

PerturbState bump(const StripGrid& g, double a, int mode, double zc = -2.0) {
  auto st = PerturbState::zero(g);
  const auto f = sample(g, [&](double z, double y) {
    return a * std::exp(-(z - zc) * (z - zc)) * std::cos(2 * kPi * mode * y / g.lambda());
  });
  st.phi1 = st.phi2 = st.psi = f;
  return st;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double l2(const Field& f) {
  double a = 0;
  for (double v : f) a += v * v;
  return a;
}

}  // namespace

TEST(Scheme, ValidationRejectsBadValues) {
  SchemeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dt = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.theta = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.snapshot_stride = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.blowup_factor = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Diffusion, SubstepNeverIncreasesEnergy) {
  for (auto ys : {YScheme::centered, YScheme::spectral})
    for (double theta : {0.5, 0.75, 1.0})
      for (double dt : {1e-3, 0.1, 10.0}) {
        const StripGrid g(4.0, 41, 1.0, 16, {4, ys});
        Field u = sample(g, [](double z, double y) {
          return (16 - z * z) * (std::sin(7 * z) + std::cos(2 * kPi * 3 * y)) / 16;
        });
        const double before = l2(u);
        diffusion_substep(u, 0.7, dt, theta, g);
        EXPECT_LE(l2(u), before * (1 + 1e-12)) << theta << ' ' << dt;
      }
}

TEST(Perturbation, ZeroStateStaysZero) {
  const StripGrid g(10.0, 64, 0.3, 8);
  SchemeConfig c;
  c.dt = 0.01;
  c.t_end = 10.0;
  c.snapshot_stride = 100;
  const auto tr = run_perturbation(PerturbState::zero(g), wave_for(g), c);
  ASSERT_TRUE(tr.ok()) << tr.message;
  EXPECT_EQ(tr.steps, 1000u);
  for (const auto& r : tr.energy.rows()) EXPECT_EQ(r.M, 0.0);
  EXPECT_EQ(max_abs(tr.final_perturb->phi1), 0.0);
  EXPECT_EQ(max_abs(tr.final_perturb->psi), 0.0);
  EXPECT_NEAR(tr.final_perturb->t, 10.0, 1e-12);
}

TEST(Perturbation, PlanarDataStayPlanar) {
  const StripGrid g(10.0, 64, 0.3, 8);
  SchemeConfig c;
  c.dt = 0.02;
  c.t_end = 2.0;
  const auto tr = run_perturbation(bump(g, 1e-2, 0), wave_for(g), c);
  ASSERT_TRUE(tr.ok()) << tr.message;
  const auto& f = *tr.final_perturb;
  double spread = 0, scale = max_abs(f.phi1);
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 1; j < g.ny(); ++j) {
      spread = std::max(spread, std::abs(f.phi1[g.index(i, j)] - f.phi1[g.index(i, 0)]));
      spread = std::max(spread, std::abs(f.psi[g.index(i, j)] - f.psi[g.index(i, 0)]));
    }
  EXPECT_LT(spread, 1e-13 * scale);
}

TEST(Perturbation, AB2HistoryRestartsOnTimeGap) {
  const StripGrid g(10.0, 64, 0.3, 8);
  SchemeConfig c;
  c.dt = 0.01;
  PerturbationStepper a(g, wave_for(g), c), fresh(g, wave_for(g), c);
  const auto s0 = bump(g, 1e-3, 1);
  const auto s1 = a.step(s0);
  const auto s2 = a.step(s1);
  // Re-stepping s0 is a gap: the Euler start must reproduce s1 exactly.
  EXPECT_EQ(a.step(s0).phi1, s1.phi1);
  EXPECT_EQ(fresh.step(s0).psi, s1.psi);
  // The second step uses AB2, so it differs from a restarted Euler step.
  PerturbationStepper b(g, wave_for(g), c);
  EXPECT_NE(b.step(s1).phi1, s2.phi1);
}

TEST(Perturbation, LinearizationScaling) {
  const StripGrid g(10.0, 64, 0.3, 8);
  SchemeConfig c;
  c.dt = 0.02;
  c.t_end = 1.0;
  auto scaled = [&](double a) {
    const auto tr = run_perturbation(bump(g, a, 1), wave_for(g), c);
    EXPECT_TRUE(tr.ok());
    Field f = tr.final_perturb->psi;
    for (double& v : f) v /= a;
    return f;
  };
  const Field f3 = scaled(1e-3), f4 = scaled(1e-4), f5 = scaled(1e-5);
  double d34 = 0, d45 = 0;
  for (std::size_t k = 0; k < f3.size(); ++k) {
    d34 = std::max(d34, std::abs(f3[k] - f4[k]));
    d45 = std::max(d45, std::abs(f4[k] - f5[k]));
  }
  // The nonlinear remainder is quadratic, so the scaled difference shrinks by 10.
  EXPECT_GT(d34, 0.0);
  EXPECT_NEAR(d34 / d45, 10.0, 0.5);
}

TEST(Perturbation, CflPolicy) {
  const StripGrid g(10.0, 64, 0.3, 8);
  SchemeConfig c;
  c.dt = 5.0;
  PerturbationStepper fixed(g, wave_for(g), c);
  EXPECT_THROW(fixed.step(bump(g, 1e-3, 1)), CflViolation);
  const auto tr = run_perturbation(bump(g, 1e-3, 1), wave_for(g), [&] {
    auto d = c;
    d.t_end = 10.0;
    return d;
  }());
  EXPECT_EQ(tr.status, RunStatus::cfl_violation);
  EXPECT_EQ(tr.failed_step, 0u);
  c.adaptive_dt = true;
  PerturbationStepper adaptive(g, wave_for(g), c);
  const auto s0 = bump(g, 1e-3, 1);
  const double bound = cfl_bound(s0, wave_for(g), c.cfl_safety);
  EXPECT_DOUBLE_EQ(adaptive.step(s0).t, bound);
}

TEST(Perturbation, NonFiniteDataReportBlowUp) {
  const StripGrid g(10.0, 64, 0.3, 8);
  auto st = bump(g, 1e-3, 1);
  st.phi1[g.index(10, 3)] = std::nan("");
  SchemeConfig c;
  c.t_end = 0.1;
  const auto tr = run_perturbation(st, wave_for(g), c);
  EXPECT_EQ(tr.status, RunStatus::blow_up);
  EXPECT_FALSE(tr.message.empty());
}

TEST(Perturbation, DeterministicOutput) {
  const StripGrid g(10.0, 64, 0.3, 8);
  SchemeConfig c;
  c.dt = 0.02;
  c.t_end = 0.5;
  c.snapshot_stride = 5;
  const auto base = fs::temp_directory_path() / "kswave_det";
  fs::remove_all(base);
  for (const char* d : {"a", "b"}) {
    RunOptions o;
    o.out_dir = base / d;
    ASSERT_TRUE(run_perturbation(bump(g, 1e-3, 1), wave_for(g), c, o).ok());
  }
  EXPECT_EQ(slurp(base / "a" / "energy.csv"), slurp(base / "b" / "energy.csv"));
  EXPECT_EQ(slurp(base / "a" / "snap_000025.fld"), slurp(base / "b" / "snap_000025.fld"));
  EXPECT_TRUE(fs::exists(base / "a" / "run.meta"));
}

TEST(Primitive, ConstantEquilibriumIsStationary) {
  const StripGrid g(6.0, 32, 0.5, 8);
  SchemeConfig c;
  c.dt = 0.01;
  PrimitiveStepper st(g, {1.0, 0.05, 1.0}, c, Representation::np);
  PrimitiveState u{g, 0.0, Representation::np, Field(g.size(), 2.0), {zeros(g), zeros(g)}, {}};
  for (int k = 0; k < 50; ++k) u = st.step(u);
  for (double v : u.n) EXPECT_EQ(v, 2.0);
  EXPECT_EQ(max_abs(u.p.z), 0.0);
}

TEST(Primitive, NcWithoutCellsIsAdvectedHeatFlowOfC) {
  // With n = 0 the log c equation is the Cole-Hopf image of
  // c_t = s c_z + eps Lap c, solved here in closed form.
  const double eps = 0.05, s = 1.0, lambda = 2 * kPi, T = 1.0;
  const StripGrid g(8.0, 64, lambda, 16);
  auto exact = [&](double z, double y, double t) {
    const double sp = 1 + eps * t;
    return 1.0 + 0.1 / std::sqrt(sp) * std::exp(-(z + s * t) * (z + s * t) / (4 * sp)) * std::cos(y) *
                     std::exp(-eps * t);
  };
  PrimitiveState u{g, 0.0, Representation::nc, zeros(g), {}, sample(g, [&](double z, double y) {
                     return std::log(exact(z, y, 0.0));
                   })};
  SchemeConfig c;
  c.dt = 0.01;
  PrimitiveStepper stepper(g, {s, eps, 1.0}, c, Representation::nc);
  for (int k = 0; k < 100; ++k) u = stepper.step(u);
  ASSERT_NEAR(u.t, T, 1e-12);
  const auto& f = u;
  EXPECT_EQ(max_abs(f.n), 0.0);
  double err = 0;
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      err = std::max(err, std::abs(f.logc[g.index(i, j)] - std::log(exact(g.z(i), g.y(j), T))));
  EXPECT_LT(err, 1e-3);
}

TEST(Primitive, SteadyWaveDriftIsSmall) {
  const StripGrid g(10.0, 128, 0.3, 8);
  SchemeConfig c;
  c.dt = 0.01;
  c.t_end = 0.5;
  for (auto rep : {Representation::np, Representation::nc}) {
    const auto tr = run_primitive(wave_state(g, wave_for(g), rep), wave_for(g), c);
    ASSERT_TRUE(tr.ok()) << tr.message;
    EXPECT_LT(tr.primitive_rows.back().n_dev, 1e-4);
    EXPECT_GT(tr.primitive_rows.back().min_n, 0.0);
  }
}

TEST(Primitive, NegativeDensityStopsTheRun) {
  const StripGrid g(10.0, 64, 0.3, 8);
  auto st = wave_state(g, wave_for(g), Representation::np);
  st.n[g.index(20, 2)] = -0.5;
  SchemeConfig c;
  c.dt = 0.01;
  c.t_end = 0.1;
  const auto tr = run_primitive(st, wave_for(g), c);
  EXPECT_EQ(tr.status, RunStatus::negativity);
  EXPECT_EQ(tr.failed_step, 0u);
}

TEST(Meta, GitBlobHash) {
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}
