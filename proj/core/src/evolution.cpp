#include "kswave/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <openssl/evp.h>

#include "kswave/error.hpp"
#include "kswave/field_io.hpp"
#include "kswave/linear_solvers.hpp"

namespace kswave {

void SchemeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be non-negative");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  if (!(cfl_safety > 0.0)) throw InvalidArgument("cfl_safety must be positive");
  if (snapshot_stride == 0) throw InvalidArgument("snapshot_stride must be at least 1");
  if (!(blowup_factor > 1.0)) throw InvalidArgument("blowup_factor must exceed 1");
  if (!(negativity_tol >= 0.0)) throw InvalidArgument("negativity_tol must be non-negative");
}

namespace detail {

// Theta-scheme in delta form with AB2 extrapolation of the explicit terms:
//   (I - a Dz)(I - a Dy) delta = dt (kappa Lap u^n + E*),  a = theta dt kappa.
class Imex {
 public:
  Imex(const StripGrid& g, std::vector<double> kappas, double theta)
      : grid_(g), kappas_(std::move(kappas)), theta_(theta) {}

  void reset() {
    prev_.clear();
    dt_prev_ = 0.0;
  }

  // t_in is the time of u; a gap relative to the previous output drops the history.
  void advance(const std::vector<Field*>& u, std::vector<Field>&& expl, double dt, double t_in) {
    const std::size_t nf = u.size();
    const std::size_t ny = grid_.ny(), nz = grid_.nz();
    if (t_in != t_out_) reset();
    const bool ab2 = prev_.size() == nf && dt_prev_ > 0.0;
    const double r = ab2 ? dt / dt_prev_ : 0.0;
    const double w0 = 1.0 + 0.5 * r, w1 = -0.5 * r;
    for (std::size_t f = 0; f < nf; ++f) {
      Field rhs = laplacian(*u[f], grid_);
      const double kappa = kappas_[f];
      const Field& e = expl[f];
      for (std::size_t k = 0; k < rhs.size(); ++k) {
        const double ex = ab2 ? w0 * e[k] + w1 * prev_[f][k] : e[k];
        rhs[k] = dt * (kappa * rhs[k] + ex);
      }
      std::fill(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(ny), 0.0);
      std::fill(rhs.end() - static_cast<std::ptrdiff_t>(ny), rhs.end(), 0.0);
      const double a = theta_ * dt * kappa;
      if (a > 0.0) {
        const auto& fac = factors(a);
        fac.first.solve(rhs.data());
        fac.second.solve(rhs.data());
      }
      Field& target = *u[f];
      for (std::size_t k = ny; k < (nz - 1) * ny; ++k) target[k] += rhs[k];
    }
    prev_ = std::move(expl);
    dt_prev_ = dt;
    t_out_ = t_in + dt;
  }

 private:
  const std::pair<ZImplicit, YImplicit>& factors(double a) {
    auto it = cache_.find(a);
    if (it == cache_.end()) {
      if (cache_.size() > 16) cache_.clear();
      it = cache_.emplace(a, std::make_pair(ZImplicit(grid_, a), YImplicit(grid_, a))).first;
    }
    return it->second;
  }

  StripGrid grid_;
  std::vector<double> kappas_;
  double theta_;
  std::vector<Field> prev_;
  double dt_prev_ = 0.0;
  double t_out_ = std::numeric_limits<double>::quiet_NaN();
  std::map<double, std::pair<ZImplicit, YImplicit>> cache_;
};

}  // namespace detail

void diffusion_substep(Field& u, double kappa, double dt, double theta, const StripGrid& g) {
  check_shape(u, g);
  detail::Imex imex(g, {kappa}, theta);
  std::vector<Field> zero{Field(g.size(), 0.0)};
  imex.advance({&u}, std::move(zero), dt, 0.0);
}

namespace {

double max_of(const Field& f) { return max_abs(f); }

double combine_bound(double cfl, double dz, double dy, double speed_z, double speed_y) {
  double b = std::numeric_limits<double>::infinity();
  if (speed_z > 0.0) b = std::min(b, dz / speed_z);
  if (speed_y > 0.0) b = std::min(b, dy / speed_y);
  return cfl * b;
}

// Resolves the step size and enforces the CFL policy.
double choose_dt(const SchemeConfig& cfg, std::optional<double> requested, double bound, std::size_t step) {
  double dt = requested.value_or(cfg.dt);
  if (std::isnan(bound)) throw BlowUp("non-finite state", step);
  if (dt > bound) {
    if (!cfg.adaptive_dt)
      throw CflViolation("dt = " + std::to_string(dt) + " exceeds the CFL bound " + std::to_string(bound), step);
    dt = bound;
  }
  return dt;
}

void check_growth(std::initializer_list<const Field*> fields, double& sup0, double factor, std::size_t step) {
  double sup = 0.0;
  for (const Field* f : fields) {
    const double m = max_of(*f);
    if (!std::isfinite(m)) throw BlowUp("non-finite value at step " + std::to_string(step), step);
    sup = std::max(sup, m);
  }
  if (sup0 < 0.0) {
    sup0 = sup;
    return;
  }
  if (sup > factor * (sup0 + 1.0))
    throw BlowUp("sup norm " + std::to_string(sup) + " exceeds blow-up threshold at step " + std::to_string(step),
                 step);
}

}  // namespace

double cfl_bound(const PerturbState& s, const WaveOnGrid& wave, double cfl_safety) {
  const StripGrid& g = s.grid;
  const Field pz = d_z(s.psi, g), py = d_y(s.psi, g);
  double pmax = 0.0;
  for (double v : wave.P) pmax = std::max(pmax, std::abs(v));
  return combine_bound(cfl_safety, g.dz(), g.dy(), wave.params.s + pmax + max_of(pz), max_of(py));
}

double cfl_bound(const PrimitiveState& s, double speed, double cfl_safety) {
  const StripGrid& g = s.grid;
  if (s.rep == Representation::np)
    return combine_bound(cfl_safety, g.dz(), g.dy(), speed + max_of(s.p.z), max_of(s.p.y));
  const Field lz = d_z(s.logc, g), ly = d_y(s.logc, g);
  return combine_bound(cfl_safety, g.dz(), g.dy(), speed + max_of(lz), max_of(ly));
}

// ---------------------------------------------------------------------------

PerturbationStepper::PerturbationStepper(const StripGrid& g, WaveOnGrid wave, SchemeConfig cfg)
    : grid_(g), wave_(std::move(wave)), cfg_(cfg) {
  cfg_.validate();
  if (wave_.N.size() != g.nz()) throw DimensionMismatch("wave samples do not match the strip z nodes");
  imex_ = std::make_unique<detail::Imex>(g, std::vector<double>{1.0, 1.0, wave_.params.eps}, cfg_.theta);
}

PerturbationStepper::~PerturbationStepper() = default;
PerturbationStepper::PerturbationStepper(PerturbationStepper&&) noexcept = default;
PerturbationStepper& PerturbationStepper::operator=(PerturbationStepper&&) noexcept = default;

void PerturbationStepper::reset() {
  imex_->reset();
  steps_ = 0;
  sup0_ = -1.0;
}

PerturbState PerturbationStepper::step(const PerturbState& in, std::optional<double> dt_req) {
  if (!in.grid.same_as(grid_)) throw DimensionMismatch("state grid differs from stepper grid");
  check_shape(in.phi1, grid_);
  check_shape(in.phi2, grid_);
  check_shape(in.psi, grid_);
  const double dt = choose_dt(cfg_, dt_req, cfl_bound(in, wave_, cfg_.cfl_safety), steps_);
  if (sup0_ < 0.0) check_growth({&in.phi1, &in.phi2, &in.psi}, sup0_, cfg_.blowup_factor, steps_);

  const StripGrid& g = grid_;
  const std::size_t ny = g.ny();
  const double s = wave_.params.s, eps = wave_.params.eps;
  const Field u = div({in.phi1, in.phi2}, g);
  const Field pz = d_z(in.psi, g), py = d_y(in.psi, g);
  Field e1 = d_z(in.phi1, g), e2 = d_z(in.phi2, g), ep(g.size());
  for (std::size_t i = 0; i < g.nz(); ++i) {
    const double N = wave_.N[i], P = wave_.P[i];
    for (std::size_t j = 0; j < ny; ++j) {
      const std::size_t k = i * ny + j;
      e1[k] = s * e1[k] + N * pz[k] + P * u[k] + u[k] * pz[k];
      e2[k] = s * e2[k] + N * py[k] + u[k] * py[k];
      ep[k] = s * pz[k] - 2 * eps * P * pz[k] - eps * (pz[k] * pz[k] + py[k] * py[k]) + u[k];
    }
  }
  PerturbState out = in;
  imex_->advance({&out.phi1, &out.phi2, &out.psi}, {std::move(e1), std::move(e2), std::move(ep)}, dt, in.t);
  out.t = in.t + dt;
  ++steps_;
  check_growth({&out.phi1, &out.phi2, &out.psi}, sup0_, cfg_.blowup_factor, steps_);
  return out;
}

// ---------------------------------------------------------------------------

PrimitiveStepper::PrimitiveStepper(const StripGrid& g, WaveParams params, SchemeConfig cfg, Representation rep)
    : grid_(g), params_(params), cfg_(cfg), rep_(rep) {
  cfg_.validate();
  std::vector<double> kappas = rep == Representation::np ? std::vector<double>{1.0, params.eps, params.eps}
                                                         : std::vector<double>{1.0, params.eps};
  imex_ = std::make_unique<detail::Imex>(g, std::move(kappas), cfg_.theta);
}

PrimitiveStepper::~PrimitiveStepper() = default;
PrimitiveStepper::PrimitiveStepper(PrimitiveStepper&&) noexcept = default;
PrimitiveStepper& PrimitiveStepper::operator=(PrimitiveStepper&&) noexcept = default;

void PrimitiveStepper::reset() {
  imex_->reset();
  steps_ = 0;
  sup0_ = -1.0;
}

PrimitiveState PrimitiveStepper::step(const PrimitiveState& in, std::optional<double> dt_req) {
  if (!in.grid.same_as(grid_)) throw DimensionMismatch("state grid differs from stepper grid");
  if (in.rep != rep_) throw InvalidArgument("state representation differs from stepper");
  const StripGrid& g = grid_;
  check_shape(in.n, g);
  const double s = params_.s, eps = params_.eps;
  const double dt = choose_dt(cfg_, dt_req, cfl_bound(in, s, cfg_.cfl_safety), steps_);
  const double floor = -cfg_.negativity_tol * params_.n_minus();
  auto check_density = [&](const Field& n) {
    const double mn = *std::min_element(n.begin(), n.end());
    if (mn < floor) throw NegativeDensity("density became negative (" + std::to_string(mn) + ")", steps_);
  };
  if (steps_ == 0) check_density(in.n);
  PrimitiveState out = in;

  if (rep_ == Representation::np) {
    check_shape(in.p.z, g);
    check_shape(in.p.y, g);
    if (sup0_ < 0.0) check_growth({&in.n, &in.p.z, &in.p.y}, sup0_, cfg_.blowup_factor, steps_);
    Field np1(g.size()), np2(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      np1[k] = in.n[k] * in.p.z[k];
      np2[k] = in.n[k] * in.p.y[k];
    }
    Field en = div({std::move(np1), std::move(np2)}, g);
    const Field nz_ = d_z(in.n, g), ny_ = d_y(in.n, g);
    const Field p1z = d_z(in.p.z, g), p1y = d_y(in.p.z, g);
    const Field p2z = d_z(in.p.y, g), p2y = d_y(in.p.y, g);
    Field e1(g.size()), e2(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      en[k] += s * nz_[k];
      const double p1 = in.p.z[k], p2 = in.p.y[k];
      e1[k] = s * p1z[k] - 2 * eps * (p1 * p1z[k] + p2 * p1y[k]) + nz_[k];
      e2[k] = s * p2z[k] - 2 * eps * (p1 * p2z[k] + p2 * p2y[k]) + ny_[k];
    }
    imex_->advance({&out.n, &out.p.z, &out.p.y}, {std::move(en), std::move(e1), std::move(e2)}, dt, in.t);
  } else {
    check_shape(in.logc, g);
    if (sup0_ < 0.0) check_growth({&in.n, &in.logc}, sup0_, cfg_.blowup_factor, steps_);
    const Field lz = d_z(in.logc, g), ly = d_y(in.logc, g);
    Field np1(g.size()), np2(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      np1[k] = -in.n[k] * lz[k];
      np2[k] = -in.n[k] * ly[k];
    }
    Field en = div({std::move(np1), std::move(np2)}, g);
    const Field nz_ = d_z(in.n, g);
    Field el(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      en[k] += s * nz_[k];
      el[k] = s * lz[k] + eps * (lz[k] * lz[k] + ly[k] * ly[k]) - in.n[k];
    }
    imex_->advance({&out.n, &out.logc}, {std::move(en), std::move(el)}, dt, in.t);
  }
  out.t = in.t + dt;
  ++steps_;
  if (rep_ == Representation::np)
    check_growth({&out.n, &out.p.z, &out.p.y}, sup0_, cfg_.blowup_factor, steps_);
  else
    check_growth({&out.n, &out.logc}, sup0_, cfg_.blowup_factor, steps_);
  check_density(out.n);
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blow_up: return "blow_up";
    case RunStatus::cfl_violation: return "cfl_violation";
    case RunStatus::negativity: return "negativity";
    case RunStatus::buffer_violation: return "buffer_violation";
  }
  return "unknown";
}

std::string git_blob_sha1(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[md[k] >> 4]);
    out.push_back(hex[md[k] & 15]);
  }
  return out;
}

PrimitiveRow primitive_row(const PrimitiveState& s, const WaveOnGrid& wave) {
  const StripGrid& g = s.grid;
  const std::size_t ny = g.ny();
  PrimitiveRow r;
  r.t = s.t;
  r.min_n = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const std::size_t k = i * ny + j;
      r.n_dev = std::max(r.n_dev, std::abs(s.n[k] - wave.N[i]));
      r.min_n = std::min(r.min_n, s.n[k]);
      if (s.rep == Representation::np)
        r.field_dev = std::max({r.field_dev, std::abs(s.p.z[k] - wave.P[i]), std::abs(s.p.y[k])});
      else
        r.field_dev = std::max(r.field_dev, std::abs(s.logc[k] - wave.log_C[i]));
    }
  r.curl = s.curl_residual();
  r.dy_n_L2 = dy_l2(s.n, g);
  return r;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_primitive_csv(const std::filesystem::path& path, const std::vector<PrimitiveRow>& rows) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "t,n_dev,field_dev,min_n,curl,dy_n_L2\n";
  for (const auto& r : rows)
    out << fmt17(r.t) << ',' << fmt17(r.n_dev) << ',' << fmt17(r.field_dev) << ',' << fmt17(r.min_n) << ','
        << fmt17(r.curl) << ',' << fmt17(r.dy_n_L2) << '\n';
}

namespace {

void write_meta(const RunOptions& opt, const StripGrid& g, const SchemeConfig& cfg, const char* formulation,
                const Trajectory* tr) {
  if (opt.out_dir.empty()) return;
  std::ofstream m(opt.out_dir / "run.meta");
  if (!m) throw FormatError("cannot write run.meta");
  m << "formulation = " << formulation << '\n';
  m << "config_sha1 = " << git_blob_sha1(opt.config_text) << '\n';
  m << "L_z = " << fmt17(g.L_z()) << "\nnz = " << g.nz() << "\nlambda = " << fmt17(g.lambda()) << "\nny = " << g.ny()
    << '\n';
  m << "z_order = " << g.disc().z_order << "\ny_scheme = " << (g.disc().y == YScheme::spectral ? "spectral" : "centered")
    << '\n';
  m << "dt = " << fmt17(cfg.dt) << "\nt_end = " << fmt17(cfg.t_end) << "\ntheta = " << fmt17(cfg.theta)
    << "\ncfl_safety = " << fmt17(cfg.cfl_safety) << "\nsnapshot_stride = " << cfg.snapshot_stride
    << "\nadaptive_dt = " << (cfg.adaptive_dt ? "true" : "false") << '\n';
  for (const auto& [k, v] : opt.meta) m << k << " = " << v << '\n';
  if (tr) {
    m << "status = " << to_string(tr->status) << '\n';
    m << "steps = " << tr->steps << '\n';
    if (!tr->ok()) m << "failed_step = " << tr->failed_step << "\nerror = " << tr->message << '\n';
  } else {
    m << "status = running\n";
  }
}

template <class State, class Stepper, class OnSnap>
Trajectory drive(const State& init, Stepper& stepper, const SchemeConfig& cfg, const RunOptions& opt,
                 const char* formulation, OnSnap&& on_snap) {
  Trajectory tr;
  if (!opt.out_dir.empty()) std::filesystem::create_directories(opt.out_dir);
  write_meta(opt, init.grid, cfg, formulation, nullptr);

  auto snapshot = [&](const State& s, std::size_t step) {
    tr.snapshot_times.push_back(s.t);
    if (!opt.out_dir.empty() && opt.write_snapshots) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06zu.fld", step);
      write_snapshot(opt.out_dir / name, s);
    }
    on_snap(s);
  };

  State cur = init;
  std::size_t step = 0;
  try {
    snapshot(cur, 0);
    const double t_end = cfg.t_end;
    while (cur.t < t_end && t_end - cur.t > 1e-12 * std::max(1.0, t_end)) {
      double dt = cfg.dt;
      const double remaining = t_end - cur.t;
      if (remaining <= dt * (1.0 + 1e-9)) dt = remaining;
      // Adaptive mode may cut the step further inside the stepper.
      cur = stepper.step(cur, dt);
      ++step;
      if (step % cfg.snapshot_stride == 0 || !(t_end - cur.t > 1e-12 * std::max(1.0, t_end))) snapshot(cur, step);
    }
  } catch (const CflViolation& e) {
    tr.status = RunStatus::cfl_violation;
    tr.failed_step = e.step();
    tr.message = e.what();
  } catch (const NegativeDensity& e) {
    tr.status = RunStatus::negativity;
    tr.failed_step = e.step();
    tr.message = e.what();
  } catch (const BlowUp& e) {
    tr.status = RunStatus::blow_up;
    tr.failed_step = e.step();
    tr.message = e.what();
  } catch (const BufferViolation& e) {
    tr.status = RunStatus::buffer_violation;
    tr.failed_step = step;
    tr.message = e.what();
  }
  tr.steps = step;
  if constexpr (std::is_same_v<State, PerturbState>)
    tr.final_perturb = cur;
  else
    tr.final_primitive = cur;
  return tr;
}

}  // namespace

Trajectory run_perturbation(const PerturbState& init, const WaveOnGrid& wave, const SchemeConfig& cfg,
                            const RunOptions& opt) {
  cfg.validate();
  PerturbationStepper stepper(init.grid, wave, cfg);
  EnergyReport energy(wave, init.grid, opt.buffer);
  std::vector<PerturbState> kept;
  Trajectory tr = drive(init, stepper, cfg, opt, "perturbation", [&](const PerturbState& s) {
    energy.accumulate(s);
    if (opt.keep_snapshots) kept.push_back(s);
    if (opt.on_perturb_snapshot) opt.on_perturb_snapshot(s);
  });
  tr.energy = std::move(energy);
  tr.perturb_snapshots = std::move(kept);
  if (!opt.out_dir.empty()) {
    tr.energy.write_csv(opt.out_dir / "energy.csv");
    write_meta(opt, init.grid, cfg, "perturbation", &tr);
  }
  return tr;
}

Trajectory run_primitive(const PrimitiveState& init, const WaveOnGrid& wave, const SchemeConfig& cfg,
                         const RunOptions& opt) {
  cfg.validate();
  PrimitiveStepper stepper(init.grid, wave.params, cfg, init.rep);
  std::vector<PrimitiveRow> rows;
  std::vector<PrimitiveState> kept;
  const char* name = init.rep == Representation::np ? "primitive_np" : "primitive_nc";
  Trajectory tr = drive(init, stepper, cfg, opt, name, [&](const PrimitiveState& s) {
    rows.push_back(primitive_row(s, wave));
    if (opt.keep_snapshots) kept.push_back(s);
    if (opt.on_primitive_snapshot) opt.on_primitive_snapshot(s);
  });
  tr.primitive_rows = std::move(rows);
  tr.primitive_snapshots = std::move(kept);
  if (!opt.out_dir.empty()) {
    write_primitive_csv(opt.out_dir / "primitive.csv", tr.primitive_rows);
    write_meta(opt, init.grid, cfg, name, &tr);
  }
  return tr;
}

}  // namespace kswave
