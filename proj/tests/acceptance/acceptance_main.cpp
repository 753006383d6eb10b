// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "kswave/energy.hpp"
#include "kswave/harness.hpp"
#include "kswave/wave_profile.hpp"

using namespace kswave;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("criterion %2d %-34s %s  %s  (%.1f s)\n", id, name, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

template <class F>
void criterion(int id, const char* name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(id, name, pass, detail, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

const fs::path& work_dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "kswave_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

// Profiles of the (s, eps) grid, solved on [-30/s, 30/s] at dz = 1e-3.
struct SolvedProfile {
  WaveParams params;
  WaveProfile profile;
};

const std::vector<SolvedProfile>& profile_grid() {
  static const std::vector<SolvedProfile> all = [] {
    std::vector<SolvedProfile> out;
    for (double s : {0.5, 1.0, 2.0})
      for (double eps : {0.05, 0.1, 0.2}) {
        const WaveParams p{s, eps, 1.0};
        out.push_back({p, solve_wave(p, ZGrid::with_spacing(30.0 / s, 1e-3))});
      }
    return out;
  }();
  return all;
}

// Residuals by centered differences (4th order in the interior), written
// against the samples only.
double fd4(std::span<const double> f, std::size_t i, double h) {
  return (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
}

// Base experiment shared by the evolution criteria.
ExperimentConfig base_config(const std::string& name) {
  ExperimentConfig c;
  c.wave = {1.0, 0.05, 1.0};
  c.L_z = 20.0;
  c.nz = 256;
  c.lambda = 0.3;
  c.ny = 32;
  c.scheme.dt = 0.02;
  c.scheme.snapshot_stride = 25;
  c.write_snapshots = false;
  c.out_dir = work_dir() / name;
  return c;
}

std::size_t column(const std::string& header, const std::string& name) {
  std::size_t idx = 0, pos = 0;
  while (true) {
    const auto next = header.find(',', pos);
    if (header.substr(pos, next - pos) == name) return idx;
    if (next == std::string::npos) throw std::runtime_error("energy.csv has no column " + name);
    pos = next + 1;
    ++idx;
  }
}

}  // namespace

int main() {
  // Criterion 1: left density limit.
  criterion(1, "wave_left_limit", [](std::string& d) {
    double worst = 0;
    for (const auto& sp : profile_grid()) {
      const double nm = (1 + sp.params.eps) * sp.params.s * sp.params.s;
      worst = std::max(worst, std::abs(sp.profile.N()[0] - nm) / nm);
    }
    d = fmt("max relative |N(-L) - (1+eps)s^2| = %.3e over 9 profiles (tol 1e-6)", worst);
    return worst <= 1e-6;
  });

  // Criterion 2: small-eps profiles approach the closed form.
  criterion(2, "eps0_oracle", [](std::string& d) {
    std::vector<double> dev;
    for (double eps : {4e-3, 2e-3, 1e-3}) {
      const auto prof = solve_wave({1.0, eps, 1.0}, ZGrid::with_spacing(30.0, 1e-3));
      double m = 0;
      for (std::size_t i = 0; i < prof.size(); ++i)
        m = std::max(m, std::abs(prof.N()[i] - 1.0 / (1.0 + std::exp(prof.z(i)))));
      dev.push_back(m);
    }
    d = fmt("sup deviation %.3e, %.3e, %.3e at eps = 4e-3, 2e-3, 1e-3", dev[0], dev[1], dev[2]);
    return dev[2] <= 5e-3 && dev[0] > dev[1] && dev[1] > dev[2];
  });

  // Criterion 3: profile identities on the solved grid.
  criterion(3, "profile_identities", [](std::string& d) {
    double r1 = 0, r2 = 0;
    for (const auto& sp : profile_grid()) {
      const auto& p = sp.profile;
      const double s = sp.params.s, eps = sp.params.eps, h = p.grid().dz;
      const auto N = p.N(), P = p.P();
      for (std::size_t i = 2; i + 2 < p.size(); ++i) {
        const double dN = fd4(N, i, h), dP = fd4(P, i, h);
        // -N'/N = s + P, scaled by N to stay finite in the vacuum tail.
        r1 = std::max(r1, std::abs(dN + (s + P[i]) * N[i]));
        r2 = std::max(r2, std::abs(-s * P[i] - eps * dP - (N[i] - eps * P[i] * P[i])));
      }
    }
    d = fmt("max residuals %.3e (N' + (s+P)N), %.3e (P equation); tol 1e-6", r1, r2);
    return r1 < 1e-6 && r2 < 1e-6;
  });

  // Criterion 4: density at the P = -s/2 crossing.
  criterion(4, "center_density_bound", [](std::string& d) {
    double margin = INFINITY;
    for (const auto& sp : profile_grid()) {
      if (sp.params.eps > 0.1) continue;
      const auto& p = sp.profile;
      const double s = sp.params.s;
      const auto P = p.P(), N = p.N();
      std::size_t k = 0;
      while (k + 1 < p.size() && !(P[k] <= -s / 2 && P[k + 1] > -s / 2)) ++k;
      if (k + 1 >= p.size()) throw std::runtime_error("no P = -s/2 crossing");
      const double a = (-s / 2 - P[k]) / (P[k + 1] - P[k]);
      const double n0 = N[k] + a * (N[k + 1] - N[k]);
      margin = std::min(margin, n0 / (s * s / 4));
    }
    d = fmt("min N(z0) / (s^2/4) = %.6f over eps <= 0.1", margin);
    return margin >= 1.0;
  });

  // Criterion 5: steady-wave fixed point in all three formulations.
  double drift256 = NAN;
  criterion(5, "steady_wave_fixed_point", [&](std::string& d) {
    std::vector<double> drift;
    double pert_m = 0;
    for (int r : {1, 2}) {
      auto c = base_config("fixed_point_" + std::to_string(r));
      c.formulation = Formulation::all_three;
      c.init.amplitude = 0.0;
      c.scheme.t_end = 1.0;
      c.nz = (256 - 1) * r + 1;
      c.scheme.dt = 0.02 / r;
      const auto sum = run_experiment(c);
      if (sum.status != "completed" || !sum.drift) throw std::runtime_error("run failed: " + sum.message);
      drift.push_back(*sum.drift);
      pert_m = std::max(pert_m, sum.sup_M);
    }
    drift256 = drift[0];
    const double ratio = drift[0] / drift[1];
    d = fmt("drift %.3e -> %.3e (ratio %.2f)", drift[0], drift[1], ratio);
    d += fmt(", order %.2f; perturbation-form sup M %.1e", std::log2(ratio), pert_m);
    return drift[0] <= 1e-4 && ratio >= 3.5 && pert_m == 0.0;
  });

  // Criterion 6: NP and NC agree on a perturbed state.
  criterion(6, "cole_hopf_equivalence", [&](std::string& d) {
    if (!std::isfinite(drift256)) throw std::runtime_error("criterion 5 drift unavailable");
    auto c = base_config("cole_hopf");
    c.formulation = Formulation::all_three;
    c.init.family = PerturbationFamily::y_mode;
    c.init.y_mode = 1;
    c.init.amplitude = 1e-3;
    c.scheme.t_end = 1.0;
    c.cross_tol = 1.0;  // judged here against the drift instead
    const auto sum = run_experiment(c);
    if (sum.cross.empty() || std::abs(sum.cross.back().t - 1.0) > 1e-9) throw std::runtime_error("no t = 1 row");
    const double diff = sum.cross.back().np_nc;
    d = fmt("max |n_NP - n_NC| at t=1 = %.3e vs 5 x drift = %.3e", diff, 5 * drift256);
    return sum.status == "completed" && diff <= 5 * drift256;
  });

  // Criterion 7 runs two gaussian seeds with M0 just below 1e-4: a planar
  // bump and the same envelope times a k = 1 y-mode. Criterion 8 reads the
  // second run; criterion 11 rescales the first.
  //
  // The domain is [-120, 120] at the dz of the 256-node grid. On [-20, 20]
  // the left-moving characteristic of the linearization about the left
  // state (speed about 1.7) reaches the held boundary near t = 11 and the
  // reflected boundary layer inflates M; the long domain keeps the
  // boundary out of reach until t = 50.
  auto long_domain = [](ExperimentConfig& c) {
    c.L_z = 120.0;
    c.nz = (256 - 1) * 6 + 1;
  };
  struct Witness {
    std::string label;
    double amplitude = NAN, M0 = NAN, c0 = NAN, tail = NAN;
    std::string status;
    std::vector<std::vector<double>> cols;
    bool ok = false;
  };
  auto witness = [&](const std::string& label, PerturbationFamily family) {
    Witness w;
    w.label = label;
    auto c = base_config("stability_" + label);
    long_domain(c);
    c.init.family = family;
    c.init.y_mode = 1;
    c.scheme.t_end = 50.0;
    // M0 is quadratic in the amplitude; aim at 0.9e-4.
    c.init.amplitude = 1e-6;
    const auto g = c.grid();
    const auto wave = sample_wave(experiment_profile(c), g);
    const double m_unit = build_initial_perturbation(c.init, g, wave).M0;
    c.init.amplitude = 1e-6 * std::sqrt(0.9e-4 / m_unit);
    w.amplitude = c.init.amplitude;
    const auto sum = run_experiment(c);
    w.M0 = sum.M0;
    w.status = sum.status;
    w.cols = read_energy_csv(c.out_dir / "energy.csv");
    const std::string h = kEnergyCsvHeader;
    const auto& t = w.cols[column(h, "t")];
    // Oracle: running sup of the norm sum recomputed from the columns.
    double sup = 0, m_first = 0;
    for (std::size_t r = 0; r < t.size(); ++r) {
      const double m =
          w.cols[column(h, "phi_H3w")][r] + w.cols[column(h, "psi_H3")][r] + w.cols[column(h, "gradpsi_H2w")][r];
      if (r == 0) m_first = m;
      sup = std::max(sup, m);
    }
    w.c0 = sup / m_first;
    // Accumulator increase over the last 20% of the run.
    std::size_t k80 = 0;
    while (t[k80] < 0.8 * t.back() - 1e-9) ++k80;
    w.tail = 0;
    for (const char* name : {"diss_phi", "diss_psi", "diss_eps_psi4"}) {
      const auto& a = w.cols[column(h, name)];
      if (a.back() > 0) w.tail = std::max(w.tail, (a.back() - a[k80]) / a.back());
    }
    w.ok = sum.status == "completed" && t.back() >= 50.0 - 1e-9 && w.M0 <= 1e-4 && w.c0 <= 10.0 && w.tail <= 0.01 &&
           std::abs(w.c0 - sum.C0.value_or(NAN)) <= 1e-12 * w.c0;
    return w;
  };
  Witness planar, seeded;
  criterion(7, "stability_witness", [&](std::string& d) {
    planar = witness("planar", PerturbationFamily::gaussian_bump);
    seeded = witness("y_mode_1", PerturbationFamily::y_mode);
    for (const Witness* w : {&planar, &seeded}) {
      d += (d.empty() ? "" : "; ") + w->label + fmt(": amplitude %.3e, M0 %.3e, C0 %.4f", w->amplitude, w->M0, w->c0);
      d += fmt(", tail growth %.2e, ", w->tail) + w->status;
    }
    d += "; L_z 120";
    return planar.ok && seeded.ok;
  });

  criterion(8, "transversal_decay", [&](std::string& d) {
    if (seeded.cols.empty()) throw std::runtime_error("criterion 7 run unavailable");
    const std::string h = kEnergyCsvHeader;
    const auto& dy = seeded.cols[column(h, "dy_n_L2")];
    const auto& t = seeded.cols[column(h, "t")];
    const auto peak = std::max_element(dy.begin(), dy.end());
    const double ratio = *peak / dy.back();
    d = fmt("||d_y n||^2 peak %.3e at t=%.1f, final %.3e", *peak, t[static_cast<std::size_t>(peak - dy.begin())],
            dy.back());
    d += fmt(", drop %.3e x", ratio);
    return t.back() >= 50.0 - 1e-9 && ratio >= 10.0;
  });

  criterion(9, "poincare_battery", [](std::string& d) {
    PoincareOptions o;
    o.samples = 100;
    o.seed = 20261016;
    const auto r = poincare_check(0.3, 32, 1.0, o);
    const double cp = 1.0 / (2.0 * std::numbers::pi);
    // Oracle for the extremal ratio: a single sine mode, spectral derivative exact.
    std::vector<double> f(32);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = std::sin(2.0 * std::numbers::pi * j / 32.0);
    const double direct = poincare_ratio(f, 0.3);
    d = fmt("worst %.12f, extremal %.12f, 1/(2pi) %.12f", r.worst_ratio, r.extremal_ratio, cp);
    return r.samples >= 100 && r.worst_ratio <= cp + 1e-6 && std::abs(r.extremal_ratio - cp) <= 1e-6 &&
           std::abs(direct - cp) <= 1e-6;
  });

  criterion(10, "dissipation_coefficients", [](std::string& d) {
    double lib_min = INFINITY, oracle_min = INFINITY;
    std::size_t validated = 0;
    for (const auto& sp : profile_grid()) {
      const auto& p = sp.profile;
      if (!validate_profile(p).all_passed()) continue;
      ++validated;
      const auto dc = dissipation_coefficients(p);
      for (std::size_t i = 0; i < p.size(); ++i)
        lib_min = std::min({lib_min, dc.dN_sq_over_N3[i], dc.dP_over_N[i], dc.P_dN_over_N2[i]});
      // Oracle in gap variables h = n_minus - N, g = P + s, which keeps the
      // left tail free of cancellation.
      const double s = sp.params.s, eps = sp.params.eps;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double N = p.N()[i], P = p.P()[i], h = p.N_gap()[i], g = p.P_gap()[i];
        const double dN = -g * N;
        const double dP = (h - g * (s * (1 + 2 * eps) - eps * g)) / eps;
        oracle_min = std::min({oracle_min, dN * dN / (N * N * N), dP / N, P * dN / (N * N)});
      }
    }
    d = fmt("min coefficient %.3e (library), %.3e (gap-form oracle) on %.0f validated profiles", lib_min, oracle_min,
            static_cast<double>(validated));
    return validated == profile_grid().size() && lib_min > 0 && oracle_min > 0;
  });

  criterion(11, "linearity_limit", [&](std::string& d) {
    const double amplitude = planar.amplitude;
    if (!std::isfinite(amplitude)) throw std::runtime_error("criterion 7 amplitude unavailable");
    auto c = base_config("linearity");
    long_domain(c);
    c.init.family = PerturbationFamily::gaussian_bump;
    c.scheme.t_end = 50.0;
    // Start 16x above the criterion-7 amplitude and halve four times.
    for (int k = 0; k <= 4; ++k) c.sweep.amplitude.push_back(amplitude * std::ldexp(16.0, -k));
    const auto res = sweep(c, 1);
    std::vector<double> c0;
    for (const auto& r : res.rows) {
      if (!r.summary || !r.summary->C0) throw std::runtime_error("sweep point failed: " + r.error);
      c0.push_back(*r.summary->C0);
    }
    const double rel = std::abs(c0[3] - c0[4]) / c0[4];
    d = fmt("C0 %.4f %.4f %.4f", c0[0], c0[1], c0[2]) + fmt(" %.4f %.4f; last pair differs by %.3e", c0[3], c0[4], rel);
    return rel <= 0.05;
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
