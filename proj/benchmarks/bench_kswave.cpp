#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kswave/energy.hpp"
#include "kswave/evolution.hpp"
#include "kswave/linear_solvers.hpp"
#include "kswave/wave_profile.hpp"

using namespace kswave;

namespace {

StripGrid strip(std::size_t nz, std::size_t ny, YScheme ys = YScheme::centered) {
  return StripGrid(20.0, nz, 0.3, ny, {4, ys});
}

Field noise(const StripGrid& g) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1, 1);
  Field f(g.size());
  for (double& v : f) v = d(rng);
  return f;
}

const WaveOnGrid& wave256() {
  static const WaveOnGrid w = [] {
    const auto g = strip(256, 32);
    return sample_wave(solve_wave({1.0, 0.05, 1.0}, ZGrid::symmetric(20.0, 255 * 16 + 1)), g);
  }();
  return w;
}

PerturbState seeded_state(const StripGrid& g) {
  auto s = PerturbState::zero(g);
  s.phi1 = sample(g, [&](double z, double y) { return 1e-4 * std::exp(-z * z) * std::cos(2 * std::numbers::pi * y / g.lambda()); });
  s.phi2 = s.psi = s.phi1;
  return s;
}

}  // namespace

static void BM_SolveWave(benchmark::State& st) {
  const double dz = 1.0 / static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(solve_wave({1.0, 0.05, 1.0}, ZGrid::with_spacing(30.0, dz)));
  st.SetLabel("dz = 1/" + std::to_string(st.range(0)));
}
BENCHMARK(BM_SolveWave)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Laplacian(benchmark::State& st) {
  const auto g = strip(static_cast<std::size_t>(st.range(0)), 32, st.range(1) ? YScheme::spectral : YScheme::centered);
  const Field f = noise(g);
  for (auto _ : st) benchmark::DoNotOptimize(laplacian(f, g));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * g.size()));
}
BENCHMARK(BM_Laplacian)->Args({256, 0})->Args({511, 0})->Args({256, 1});

static void BM_ImplicitSolve(benchmark::State& st) {
  const auto g = strip(static_cast<std::size_t>(st.range(0)), 32);
  const ZImplicit zi(g, 0.01);
  const YImplicit yi(g, 0.01);
  Field f = noise(g);
  for (auto _ : st) {
    zi.solve(f.data());
    yi.solve(f.data());
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * g.size()));
}
BENCHMARK(BM_ImplicitSolve)->Arg(256)->Arg(511);

static void BM_PerturbationStep(benchmark::State& st) {
  const auto g = strip(256, 32);
  SchemeConfig cfg;
  cfg.dt = 0.02;
  PerturbationStepper stepper(g, wave256(), cfg);
  auto s = seeded_state(g);
  for (auto _ : st) s = stepper.step(s);
}
BENCHMARK(BM_PerturbationStep)->Unit(benchmark::kMicrosecond);

static void BM_PrimitiveStep(benchmark::State& st) {
  const auto g = strip(256, 32);
  SchemeConfig cfg;
  cfg.dt = 0.02;
  const auto rep = st.range(0) ? Representation::nc : Representation::np;
  PrimitiveStepper stepper(g, wave256().params, cfg, rep);
  auto s = wave_state(g, wave256(), rep);
  for (auto _ : st) s = stepper.step(s);
  st.SetLabel(st.range(0) ? "nc" : "np");
}
BENCHMARK(BM_PrimitiveStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_EnergyNorms(benchmark::State& st) {
  const auto g = strip(256, 32);
  const auto w = WeightField::from_wave(wave256());
  const auto s = seeded_state(g);
  for (auto _ : st) {
    benchmark::DoNotOptimize(big_m_terms(s, w));
    benchmark::DoNotOptimize(dissipation_terms(s, w, 0.05));
  }
}
BENCHMARK(BM_EnergyNorms)->Unit(benchmark::kMicrosecond);

static void BM_ColeHopfInverse(benchmark::State& st) {
  const auto g = strip(256, 32);
  const Field logc = sample(g, [](double z, double y) { return -std::log1p(std::exp(-z)) + 1e-3 * std::sin(20 * y); });
  const auto p = cole_hopf_forward(logc, g);
  for (auto _ : st) benchmark::DoNotOptimize(cole_hopf_inverse(p, 0.0, g));
}
BENCHMARK(BM_ColeHopfInverse)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
