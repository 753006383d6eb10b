#include "kswave/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "kswave/error.hpp"
#include "kswave/field_io.hpp"

namespace kswave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

InitialPerturbation build_initial_perturbation(const PerturbationSpec& spec, const StripGrid& g,
                                               const WaveOnGrid& wave, double buffer_fraction) {
  if (wave.N.size() != g.nz()) throw DimensionMismatch("wave samples do not match the strip z nodes");
  InitialPerturbation out{PerturbState::zero(g), 0.0};
  if (spec.family == PerturbationFamily::custom_file) {
    const Snapshot snap = read_snapshot(spec.file);
    PerturbState st = snap.to_perturb();
    if (!st.grid.same_as(g)) throw DimensionMismatch("perturbation file grid differs from the run grid");
    st.grid = g;  // keep the run's discretization choice
    st.t = 0.0;
    out.state = std::move(st);
  } else if (spec.amplitude != 0.0) {
    if (!(spec.sigma_z > 0.0)) throw InvalidArgument("sigma_z must be positive");
    const double two_pi_k = 2.0 * std::numbers::pi * spec.y_mode / g.lambda();
    const bool modal = spec.family == PerturbationFamily::y_mode;
    for (std::size_t i = 0; i < g.nz(); ++i) {
      const double dz = (g.z(i) - spec.z_center) / spec.sigma_z;
      const double env = spec.amplitude * std::exp(-dz * dz);
      for (std::size_t j = 0; j < g.ny(); ++j) {
        const double v = modal ? env * std::cos(two_pi_k * g.y(j)) : env;
        const std::size_t k = g.index(i, j);
        out.state.phi1[k] = v;
        out.state.phi2[k] = v;
        out.state.psi[k] = v;
      }
    }
  }
  const WeightField w = WeightField::from_wave(wave);
  BufferOptions bo;
  bo.fraction = buffer_fraction;
  assert_buffer(out.state, w, bo);
  out.M0 = big_m_terms(out.state, w).total();
  return out;
}

WaveProfile experiment_profile(const ExperimentConfig& cfg) {
  const StripGrid g = cfg.grid();
  const auto refine = static_cast<std::size_t>(std::max(1.0, std::ceil(g.dz() / cfg.profile_dz - 1e-9)));
  const ZGrid zg = ZGrid::symmetric(cfg.L_z, (cfg.nz - 1) * refine + 1);
  if (cfg.wave.eps == 0.0) return explicit_wave_eps0(cfg.wave.s, zg, cfg.wave.c_plus);
  return solve_wave(cfg.wave, zg);
}

bool ExperimentSummary::suites_passed() const noexcept {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& r) { return r.passed; });
}

namespace {

std::vector<SuiteResult> static_suites(const ExperimentConfig& cfg, const WaveProfile& prof) {
  std::vector<SuiteResult> out;
  const ValidationReport rep = validate_profile(prof);
  std::string failed;
  for (const auto& c : rep.checks)
    if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
  out.push_back({"wave_profile", rep.all_passed(), failed.empty() ? "all checks passed" : "failed: " + failed});

  const auto* pos = rep.find("dissipation_coefficients_positive");
  out.push_back({"dissipation_coefficients", pos && pos->passed,
                 pos ? "min coefficient " + fmt17(pos->value) : "check missing"});

  PoincareOptions po;
  po.seed = cfg.seed;
  const PoincareResult pr = poincare_check(cfg.lambda, cfg.ny, cfg.wave.s, po);
  out.push_back({"poincare", pr.within_bound,
                 "worst ratio " + fmt17(pr.worst_ratio) + " vs C_p " + fmt17(pr.c_p)});
  return out;
}

bool is_planar(const Field& f, const StripGrid& g, double scale) {
  const std::size_t ny = g.ny();
  for (std::size_t i = 0; i < g.nz(); ++i) {
    const auto b = f.begin() + static_cast<std::ptrdiff_t>(i * ny);
    const auto [lo, hi] = std::minmax_element(b, b + static_cast<std::ptrdiff_t>(ny));
    if (*hi - *lo > 1e-12 * scale) return false;
  }
  return true;
}

int severity(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return 0;
    case RunStatus::buffer_violation: return 1;
    case RunStatus::cfl_violation: return 2;
    case RunStatus::negativity: return 3;
    case RunStatus::blow_up: return 4;
  }
  return 5;
}

}  // namespace

std::vector<SuiteResult> check_suites(const ExperimentConfig& cfg) {
  cfg.validate();
  const WaveProfile prof = experiment_profile(cfg);
  auto suites = static_suites(cfg, prof);
  const StripGrid g = cfg.grid();
  const WaveOnGrid wave = sample_wave(prof, g);
  try {
    const auto init = build_initial_perturbation(cfg.init, g, wave, cfg.buffer_fraction);
    suites.push_back({"buffer", true, "M0 = " + fmt17(init.M0)});
  } catch (const BufferViolation& e) {
    suites.push_back({"buffer", false, e.what()});
  }
  return suites;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  ExperimentSummary sum;
  sum.out_dir = cfg.out_dir;
  sum.advisories = cfg.advisories();
  std::filesystem::create_directories(cfg.out_dir);

  const StripGrid g = cfg.grid();
  const WaveProfile prof = experiment_profile(cfg);
  sum.suites = static_suites(cfg, prof);
  const WaveOnGrid wave = sample_wave(prof, g);
  const InitialPerturbation init = build_initial_perturbation(cfg.init, g, wave, cfg.buffer_fraction);
  sum.M0 = init.M0;
  sum.suites.push_back({"buffer", true, "initial data clear of the right buffer"});

  RunOptions base;
  base.write_snapshots = cfg.write_snapshots;
  base.config_text = cfg.hash_text();
  base.buffer.fraction = cfg.buffer_fraction;
  base.meta = {{"s", fmt17(cfg.wave.s)},
               {"eps", fmt17(cfg.wave.eps)},
               {"c_plus", fmt17(cfg.wave.c_plus)},
               {"family", to_string(cfg.init.family)},
               {"amplitude", fmt17(cfg.init.amplitude)},
               {"z_center", fmt17(cfg.init.z_center)},
               {"sigma_z", fmt17(cfg.init.sigma_z)},
               {"y_mode", std::to_string(cfg.init.y_mode)},
               {"seed", std::to_string(cfg.seed)},
               {"M0", fmt17(init.M0)}};

  const bool three = cfg.formulation == Formulation::all_three;
  auto dir_for = [&](const char* name) { return three ? cfg.out_dir / name : cfg.out_dir; };
  std::vector<Field> n_pert, n_np, n_nc;
  std::vector<double> t_cross;
  RunStatus worst = RunStatus::completed;

  auto note = [&](const Trajectory& tr) {
    if (severity(tr.status) > severity(worst)) {
      worst = tr.status;
      sum.message = tr.message;
    }
  };

  if (cfg.formulation == Formulation::perturbation || three) {
    RunOptions opt = base;
    opt.out_dir = dir_for("perturbation");
    if (three)
      opt.on_perturb_snapshot = [&](const PerturbState& s) {
        n_pert.push_back(reconstruct_primitive(s, wave).state.n);
        t_cross.push_back(s.t);
      };
    Trajectory tr = run_perturbation(init.state, wave, cfg.scheme, opt);
    note(tr);
    const auto& rows = tr.energy.rows();
    if (!rows.empty()) {
      sum.has_energy = true;
      const EnergyRow& last = rows.back();
      sum.sup_M = last.M;
      sum.final_norms = last.norms;
      sum.accumulators = last.acc;
      if (sum.M0 > 0.0) {
        sum.C0 = sum.sup_M / rows.front().M;
        sum.accumulators_over_M0 =
            DissipationSample{last.acc.phi / sum.M0, last.acc.psi / sum.M0, last.acc.eps_psi4 / sum.M0};
      }
      std::vector<double> t, gp;
      double peak = 0.0;
      for (const auto& r : rows) {
        t.push_back(r.t);
        gp.push_back(r.norms.gradpsi_H2w);
        peak = std::max(peak, r.dy_n_L2);
      }
      const auto positive = std::count_if(gp.begin() + static_cast<std::ptrdiff_t>(rows.size() / 2), gp.end(),
                                          [](double v) { return v > 0.0; });
      sum.grad_psi_decay_rate = positive >= 2 ? exponential_rate(t, gp, rows.size() / 2) : kNaN;
      sum.dy_n_peak_ratio = last.dy_n_L2 > 0.0 ? peak / last.dy_n_L2 : (peak > 0.0 ? INFINITY : 1.0);

      const bool planar_init = cfg.init.family == PerturbationFamily::gaussian_bump ||
                               (cfg.init.family == PerturbationFamily::y_mode && cfg.init.y_mode == 0);
      if (planar_init && tr.final_perturb) {
        const PerturbState& f = *tr.final_perturb;
        const double scale =
            std::max({max_abs(f.phi1), max_abs(f.phi2), max_abs(f.psi), std::numeric_limits<double>::min()});
        const bool ok = is_planar(f.phi1, g, scale) && is_planar(f.phi2, g, scale) && is_planar(f.psi, g, scale);
        sum.suites.push_back({"planar_symmetry", ok, ok ? "y-independent to roundoff" : "y-dependence developed"});
      }
      if (!opt.out_dir.empty()) {
        // Recompute C0 from the file alone.
        const auto cols = read_energy_csv(opt.out_dir / "energy.csv");
        bool ok = cols.size() > 4 && !cols[4].empty();
        std::string detail = "energy.csv unreadable";
        if (ok) {
          const auto& m = cols[4];
          const double sup = *std::max_element(m.begin(), m.end());
          const double first = m.front();
          if (sum.C0) {
            const double c0 = sup / first;
            ok = std::abs(c0 - *sum.C0) <= 1e-12 * std::abs(*sum.C0);
            detail = "C0 from energy.csv " + fmt17(c0);
          } else {
            ok = sup == sum.sup_M && first == 0.0;
            detail = "M0 = 0, M column sup " + fmt17(sup);
          }
        }
        sum.suites.push_back({"summary_arithmetic", ok, detail});
      }
    }
  }

  auto run_prim = [&](Representation rep, const char* name, std::vector<Field>& store) {
    RunOptions opt = base;
    opt.out_dir = dir_for(name);
    if (three) opt.on_primitive_snapshot = [&](const PrimitiveState& s) { store.push_back(s.n); };
    Reconstruction r = rep == Representation::np ? reconstruct_primitive(init.state, wave)
                                                 : reconstruct_primitive_nc(init.state, wave);
    opt.meta.emplace_back("initial_min_density", fmt17(r.min_density));
    Trajectory tr = run_primitive(r.state, wave, cfg.scheme, opt);
    note(tr);
    if (!tr.primitive_rows.empty()) {
      const double d = tr.primitive_rows.back().n_dev;
      sum.drift = sum.drift ? std::max(*sum.drift, d) : d;
    }
  };
  if (cfg.formulation == Formulation::primitive_np || three) run_prim(Representation::np, "primitive_np", n_np);
  if (cfg.formulation == Formulation::primitive_nc || three) run_prim(Representation::nc, "primitive_nc", n_nc);

  if (three) {
    const std::size_t m = std::min({n_pert.size(), n_np.size(), n_nc.size()});
    double mx = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      CrossRow row;
      row.t = t_cross[r];
      for (std::size_t k = 0; k < g.size(); ++k) {
        row.pert_np = std::max(row.pert_np, std::abs(n_pert[r][k] - n_np[r][k]));
        row.pert_nc = std::max(row.pert_nc, std::abs(n_pert[r][k] - n_nc[r][k]));
        row.np_nc = std::max(row.np_nc, std::abs(n_np[r][k] - n_nc[r][k]));
      }
      mx = std::max({mx, row.pert_np, row.pert_nc, row.np_nc});
      sum.cross.push_back(row);
    }
    sum.cross_max = mx;
    std::ofstream out(cfg.out_dir / "cross.csv");
    if (!out) throw FormatError("cannot write cross.csv");
    out << "t,pert_np,pert_nc,np_nc\n";
    for (const auto& r : sum.cross)
      out << fmt17(r.t) << ',' << fmt17(r.pert_np) << ',' << fmt17(r.pert_nc) << ',' << fmt17(r.np_nc) << '\n';
    sum.suites.push_back({"cross_formulation", m > 0 && mx <= cfg.cross_tol,
                          "max n difference " + fmt17(mx) + " vs " + fmt17(cfg.cross_tol)});
  }

  sum.status = to_string(worst);
  sum.blow_up = worst == RunStatus::blow_up || worst == RunStatus::negativity;
  sum.suites.push_back({"run_completed", worst == RunStatus::completed, sum.status});
  sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_summary(cfg.out_dir / "summary.json", sum);
  return sum;
}

namespace {

nlohmann::ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::ordered_json diss_json(const DissipationSample& d) {
  return {{"phi", num(d.phi)}, {"psi", num(d.psi)}, {"eps_psi4", num(d.eps_psi4)}};
}

}  // namespace

void write_summary(const std::filesystem::path& path, const ExperimentSummary& s) {
  nlohmann::ordered_json j;
  j["status"] = s.status;
  j["blow_up"] = s.blow_up;
  j["message"] = s.message;
  j["M0"] = num(s.M0);
  if (s.has_energy) {
    j["sup_M"] = num(s.sup_M);
    j["final_norms"] = {{"phi_H3w", num(s.final_norms.phi_H3w)},
                        {"psi_H3", num(s.final_norms.psi_H3)},
                        {"gradpsi_H2w", num(s.final_norms.gradpsi_H2w)}};
    j["accumulators"] = diss_json(s.accumulators);
    j["C0"] = s.C0 ? num(*s.C0) : nlohmann::ordered_json(nullptr);
    j["accumulators_over_M0"] =
        s.accumulators_over_M0 ? diss_json(*s.accumulators_over_M0) : nlohmann::ordered_json(nullptr);
    j["grad_psi_decay_rate"] = num(s.grad_psi_decay_rate);
    j["dy_n_peak_ratio"] = num(s.dy_n_peak_ratio);
  } else {
    for (const char* k : {"sup_M", "final_norms", "accumulators", "C0", "accumulators_over_M0"}) j[k] = nullptr;
  }
  j["drift"] = s.drift ? num(*s.drift) : nlohmann::ordered_json(nullptr);
  j["cross_max"] = s.cross_max ? num(*s.cross_max) : nlohmann::ordered_json(nullptr);
  auto suites = nlohmann::ordered_json::object();
  for (const auto& r : s.suites) suites[r.name] = {{"passed", r.passed}, {"detail", r.detail}};
  j["suites"] = suites;
  j["suites_passed"] = s.suites_passed();
  j["advisories"] = s.advisories;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

double fit_order(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("fit_order: sizes differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kNaN;
  const double den = static_cast<double>(n) * sxx - sx * sx;
  if (den == 0.0) return kNaN;
  return (static_cast<double>(n) * sxy - sx * sy) / den;
}

namespace {

std::string opt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' ? ' ' : c);
  }
  return out + '"';
}

}  // namespace

SweepResult sweep(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  if (cfg.sweep.empty()) throw ConfigError("sweep needs at least one sweep_* axis");
  if (workers == 0) workers = 1;

  const auto or_base = [](const auto& axis, auto base) {
    using T = decltype(base);
    return axis.empty() ? std::vector<T>{base} : std::vector<T>(axis.begin(), axis.end());
  };
  const auto amps = or_base(cfg.sweep.amplitude, cfg.init.amplitude);
  const auto epss = or_base(cfg.sweep.eps, cfg.wave.eps);
  const auto lams = or_base(cfg.sweep.lambda, cfg.lambda);
  const auto refs = or_base(cfg.sweep.refinement, 1);

  std::vector<ExperimentConfig> points;
  SweepResult res;
  for (double a : amps)
    for (double e : epss)
      for (double l : lams)
        for (int r : refs) {
          ExperimentConfig p = cfg;
          p.sweep = {};
          p.source.clear();
          p.init.amplitude = a;
          p.wave.eps = e;
          p.lambda = l;
          const auto ru = static_cast<std::size_t>(r);
          p.nz = (cfg.nz - 1) * ru + 1;
          p.ny = cfg.ny * ru;
          p.scheme.dt = cfg.scheme.dt / r;
          p.scheme.snapshot_stride = cfg.scheme.snapshot_stride * ru;
          char name[32];
          std::snprintf(name, sizeof name, "point_%03zu", points.size());
          p.out_dir = cfg.out_dir / name;
          SweepRow row;
          row.index = points.size();
          row.amplitude = a;
          row.eps = e;
          row.lambda = l;
          row.refinement = r;
          row.dz = 2.0 * p.L_z / static_cast<double>(p.nz - 1);
          row.advisory = p.smallness_advisory();
          res.rows.push_back(row);
          points.push_back(std::move(p));
        }

  std::filesystem::create_directories(cfg.out_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      SweepRow& row = res.rows[k];
      try {
        row.summary = run_experiment(points[k]);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t nthreads = std::min(workers, points.size());
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Order fit along the refinement axis, per combination of the other axes.
  std::map<std::tuple<double, double, double>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : res.rows)
    if (r.summary && r.summary->drift) {
      auto& [x, y] = groups[{r.amplitude, r.eps, r.lambda}];
      x.push_back(r.dz);
      y.push_back(*r.summary->drift);
    }
  std::map<std::tuple<double, double, double>, double> orders;
  if (refs.size() > 1)
    for (auto& [key, xy] : groups) {
      orders[key] = fit_order(xy.first, xy.second);
      res.drift_orders.push_back(orders[key]);
    }

  std::ofstream out(cfg.out_dir / "sweep.csv");
  if (!out) throw FormatError("cannot write sweep.csv");
  out << "point,amplitude,eps,lambda,refinement,dz,smallness_advisory,status,M0,sup_M,C0,drift,drift_order,"
         "cross_max,grad_psi_decay_rate,suites_passed,seconds,error\n";
  for (const auto& r : res.rows) {
    out << r.index << ',' << fmt17(r.amplitude) << ',' << fmt17(r.eps) << ',' << fmt17(r.lambda) << ','
        << r.refinement << ',' << fmt17(r.dz) << ',' << (r.advisory ? "true" : "false") << ',';
    const auto ord = orders.find({r.amplitude, r.eps, r.lambda});
    const std::string order = ord == orders.end() ? "" : fmt17(ord->second);
    if (r.summary) {
      const auto& s = *r.summary;
      out << s.status << ',' << fmt17(s.M0) << ',' << (s.has_energy ? fmt17(s.sup_M) : "") << ',' << opt17(s.C0)
          << ',' << opt17(s.drift) << ',' << order << ',' << opt17(s.cross_max) << ','
          << (s.has_energy ? fmt17(s.grad_psi_decay_rate) : "") << ',' << (s.suites_passed() ? "true" : "false")
          << ',' << fmt17(s.seconds) << ",\n";
    } else {
      out << "error,,,,," << order << ",,,false,," << csv_escape(r.error) << '\n';
    }
  }
  return res;
}

}  // namespace kswave
