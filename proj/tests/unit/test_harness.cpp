#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kswave/error.hpp"
#include "kswave/field_io.hpp"
#include "kswave/harness.hpp"

using namespace kswave;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& name) {
  ExperimentConfig c;
  c.L_z = 16.0;
  c.nz = 64;
  c.ny = 8;
  c.lambda = 0.3;
  c.profile_dz = 0.02;
  c.scheme.dt = 0.02;
  c.scheme.t_end = 0.5;
  c.scheme.snapshot_stride = 5;
  c.init.z_center = -2.0;
  c.write_snapshots = false;
  c.out_dir = fs::temp_directory_path() / "kswave_harness" / name;
  fs::remove_all(c.out_dir);
  return c;
}

WaveOnGrid wave_of(const ExperimentConfig& c) { return sample_wave(experiment_profile(c), c.grid()); }

const SuiteResult* find_suite(const ExperimentSummary& s, const std::string& name) {
  for (const auto& r : s.suites)
    if (r.name == name) return &r;
  return nullptr;
}

}  // namespace

TEST(Initial, AmplitudeScalingIsQuadraticInM0) {
  auto c = small_config("scaling");
  const auto w = wave_of(c);
  PerturbationSpec spec{PerturbationFamily::y_mode, 1e-4, -2.0, 1.0, 1, {}};
  const double m1 = build_initial_perturbation(spec, c.grid(), w).M0;
  spec.amplitude = 2e-4;
  const double m2 = build_initial_perturbation(spec, c.grid(), w).M0;
  EXPECT_NEAR(m2 / m1, 4.0, 1e-12);
}

TEST(Initial, ModeZeroIsPlanarAndBufferIsEnforced) {
  auto c = small_config("planar");
  const auto g = c.grid();
  const auto w = wave_of(c);
  PerturbationSpec spec{PerturbationFamily::y_mode, 1e-3, -2.0, 1.0, 0, {}};
  const auto init = build_initial_perturbation(spec, g, w);
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) EXPECT_EQ(init.state.psi[g.index(i, j)], init.state.psi[g.index(i, 0)]);
  spec.z_center = 15.5;
  EXPECT_THROW(build_initial_perturbation(spec, g, w), BufferViolation);
}

TEST(Initial, CustomFileRoundTrip) {
  auto c = small_config("custom");
  const auto g = c.grid();
  const auto w = wave_of(c);
  PerturbationSpec spec{PerturbationFamily::gaussian_bump, 1e-3, -2.0, 1.0, 1, {}};
  const auto a = build_initial_perturbation(spec, g, w);
  fs::create_directories(c.out_dir);
  write_snapshot(c.out_dir / "init.fld", a.state);
  spec.family = PerturbationFamily::custom_file;
  spec.file = c.out_dir / "init.fld";
  const auto b = build_initial_perturbation(spec, g, w);
  EXPECT_EQ(b.M0, a.M0);
  EXPECT_EQ(b.state.phi2, a.state.phi2);
}

TEST(Experiment, ZeroAmplitudeGivesZeroEnergyAndPassingSuites) {
  auto c = small_config("zero");
  const auto s = run_experiment(c);
  EXPECT_EQ(s.status, "completed");
  EXPECT_EQ(s.M0, 0.0);
  EXPECT_EQ(s.sup_M, 0.0);
  EXPECT_FALSE(s.C0.has_value());
  EXPECT_TRUE(s.suites_passed());
  ASSERT_NE(find_suite(s, "planar_symmetry"), nullptr);
  const auto j = nlohmann::json::parse(std::ifstream(c.out_dir / "summary.json"));
  EXPECT_EQ(j["status"], "completed");
  EXPECT_TRUE(fs::exists(c.out_dir / "energy.csv"));
  EXPECT_TRUE(fs::exists(c.out_dir / "run.meta"));
}

TEST(Experiment, AllThreeFormulationsAgree) {
  auto c = small_config("three");
  c.formulation = Formulation::all_three;
  c.init.family = PerturbationFamily::y_mode;
  c.init.amplitude = 1e-4;
  c.cross_tol = 1e-3;  // the coarse test grid drifts by ~1e-4
  const auto s = run_experiment(c);
  EXPECT_TRUE(s.suites_passed()) << s.message;
  ASSERT_TRUE(s.cross_max.has_value());
  EXPECT_LT(*s.cross_max, c.cross_tol);
  EXPECT_FALSE(s.cross.empty());
  ASSERT_TRUE(s.C0.has_value());
  EXPECT_GE(*s.C0, 1.0);
  for (const char* d : {"perturbation", "primitive_np", "primitive_nc"}) EXPECT_TRUE(fs::exists(c.out_dir / d));
  EXPECT_TRUE(fs::exists(c.out_dir / "cross.csv"));
}

TEST(Experiment, BufferViolationRaises) {
  auto c = small_config("buffer");
  c.init.amplitude = 1e-3;
  c.init.z_center = 15.5;
  EXPECT_THROW(run_experiment(c), BufferViolation);
  const auto suites = check_suites(c);
  EXPECT_FALSE(suites.back().passed);
}

TEST(Experiment, CheckSuitesPass) {
  auto c = small_config("check");
  for (const auto& s : check_suites(c)) EXPECT_TRUE(s.passed) << s.name << ": " << s.detail;
}

TEST(Sweep, FailingPointIsIsolated) {
  auto c = small_config("sweep_iso");
  c.sweep.eps = {0.05, 1e-4};  // the second is below the solver's range
  const auto r = sweep(c, 2);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_TRUE(r.rows[0].summary.has_value());
  EXPECT_FALSE(r.rows[1].summary.has_value());
  EXPECT_FALSE(r.rows[1].error.empty());
  std::ifstream in(c.out_dir / "sweep.csv");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 3u);
}

TEST(Sweep, RefinementOrderOfSteadyDrift) {
  auto c = small_config("sweep_order");
  c.formulation = Formulation::primitive_np;
  c.wave.eps = 0.0;
  c.L_z = 12.0;
  c.nz = 97;
  c.scheme.t_end = 0.2;
  c.sweep.refinement = {1, 2};
  const auto r = sweep(c, 1);
  ASSERT_EQ(r.drift_orders.size(), 1u);
  EXPECT_GT(r.drift_orders[0], 3.0);
}

TEST(FitOrder, RecoversPowerLaw) {
  EXPECT_NEAR(fit_order({0.1, 0.05, 0.025}, {3e-4, 3e-4 / 16, 3e-4 / 256}), 4.0, 1e-12);
  EXPECT_TRUE(std::isnan(fit_order({0.1}, {1.0})));
}
