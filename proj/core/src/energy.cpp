#include "kswave/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "kswave/error.hpp"

namespace kswave {

namespace {

constexpr int kMaxOrder = 4;
using EnergyTable = std::array<std::array<double, kMaxOrder + 1>, kMaxOrder + 1>;  // [i][j], i+j <= kmax

// Energies int |d_z^i d_y^j f|^2 w for every i + j <= kmax.
EnergyTable mixed_energies(const Field& f, int kmax, const StripGrid& g, const std::vector<double>* w) {
  EnergyTable e{};
  Field dy_j = f;
  for (int j = 0; j <= kmax; ++j) {
    if (j > 0) dy_j = d_y(dy_j, g);
    Field dz = dy_j;
    for (int i = 0; i + j <= kmax; ++i) {
      if (i > 0) dz = d_z(dz, g);
      e[i][j] = inner(dz, dz, g, w);
    }
  }
  return e;
}

double sum_orders(const EnergyTable& e, int lo, int hi) {
  double s = 0.0;
  for (int i = 0; i <= hi; ++i)
    for (int j = 0; i + j <= hi; ++j)
      if (i + j >= lo) s += e[i][j];
  return s;
}

void check_order(int k) {
  if (k < 0 || k > 3) throw InvalidArgument("Sobolev order must be in 0..3");
}

const std::vector<double>* weights(const WeightField* w, const StripGrid& g) {
  if (!w) return nullptr;
  if (w->w.size() != g.nz()) throw DimensionMismatch("weight field does not match grid");
  return &w->w;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* const kEnergyCsvHeader =
    "t,phi_H3w,psi_H3,gradpsi_H2w,M,diss_phi,diss_psi,diss_eps_psi4,lem31_a,lem31_b,lem31_c,eps_P_psi2,dy_n_L2,"
    "dy_psi_L2";

WeightField WeightField::from_wave(const WaveOnGrid& wave) {
  WeightField out;
  out.w.resize(wave.N.size());
  for (std::size_t i = 0; i < wave.N.size(); ++i) {
    if (!(wave.N[i] > 0.0)) throw InvalidArgument("weight 1/N needs N > 0 on every node");
    out.w[i] = 1.0 / wave.N[i];
  }
  return out;
}

WeightField WeightField::uniform(const StripGrid& g) { return {std::vector<double>(g.nz(), 1.0)}; }

double weighted_sobolev_norm(const Field& f, int k, const StripGrid& g, const WeightField* w) {
  check_order(k);
  return sum_orders(mixed_energies(f, k, g, weights(w, g)), 0, k);
}

double weighted_sobolev_norm(const VectorField& v, int k, const StripGrid& g, const WeightField* w) {
  return weighted_sobolev_norm(v.z, k, g, w) + weighted_sobolev_norm(v.y, k, g, w);
}

double derivative_energy(const Field& f, int l, const StripGrid& g, const WeightField* w) {
  if (l < 0 || l > kMaxOrder) throw InvalidArgument("derivative order must be in 0..4");
  return sum_orders(mixed_energies(f, l, g, weights(w, g)), l, l);
}

double fourier_sobolev_norm(const Field& f, int k, const StripGrid& g, const WeightField* w) {
  check_order(k);
  const auto* wz = weights(w, g);
  const std::size_t nz = g.nz(), ny = g.ny();
  const double pi = std::numbers::pi;
  double total = 0.0;
  Field dz = f;
  for (int i = 0; i <= k; ++i) {
    if (i > 0) dz = d_z(dz, g);
    for (std::size_t r = 0; r < nz; ++r) {
      double row = 0.0;
      for (std::size_t mm = 0; mm < ny; ++mm) {
        std::complex<double> c = 0.0;
        for (std::size_t j = 0; j < ny; ++j)
          c += dz[r * ny + j] * std::polar(1.0, -2 * pi * static_cast<double>(mm * j) / static_cast<double>(ny));
        c /= static_cast<double>(ny);
        const double m = mm <= ny / 2 ? static_cast<double>(mm) : static_cast<double>(mm) - static_cast<double>(ny);
        double weight_m = 0.0;
        for (int j = 0; i + j <= k; ++j) weight_m += std::pow(m, 2 * j);
        row += weight_m * std::norm(c);
      }
      double q = (r == 0 || r == nz - 1) ? 0.5 : 1.0;
      if (wz) q *= (*wz)[r];
      total += q * row;
    }
  }
  return total * g.dz() * g.lambda();
}

double norm_equivalence_factor(double lambda, int k) {
  const double r = std::pow(lambda / (2 * std::numbers::pi), 2 * k);
  return std::max({1.0, r, 1.0 / r});
}

double dy_l2(const Field& f, const StripGrid& g) {
  const Field d = d_y(f, g);
  return inner(d, d, g);
}

// ---------------------------------------------------------------------------

BufferReport buffer_check(const PerturbState& s, const WeightField& w, const BufferOptions& opt) {
  const StripGrid& g = s.grid;
  if (w.w.size() != g.nz()) throw DimensionMismatch("weight field does not match grid");
  const double width = opt.fraction * g.L_z();
  double sup = std::max({max_abs(s.phi1), max_abs(s.phi2), max_abs(s.psi)});
  BufferReport rep;
  if (std::isnan(sup)) {
    rep.right_buffer_ratio = rep.left_buffer_ratio = sup;
    return rep;
  }
  if (sup == 0.0) return rep;
  const std::size_t ny = g.ny();
  for (std::size_t i = 0; i < g.nz(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      const std::size_t k = i * ny + j;
      row = std::max({row, std::abs(s.phi1[k]), std::abs(s.phi2[k]), std::abs(s.psi[k])});
    }
    const double rel = row / sup;
    if (g.z(i) >= g.L_z() - width) rep.right_buffer_ratio = std::max(rep.right_buffer_ratio, rel);
    if (g.z(i) <= -g.L_z() + width) rep.left_buffer_ratio = std::max(rep.left_buffer_ratio, rel);
    if (rel > opt.tol) rep.max_weight_used = std::max(rep.max_weight_used, w.w[i]);
  }
  return rep;
}

void assert_buffer(const PerturbState& s, const WeightField& w, const BufferOptions& opt) {
  const auto rep = buffer_check(s, w, opt);
  // Non-finite data are left to the blow-up detection.
  if (rep.right_buffer_ratio > opt.tol)
    throw BufferViolation("perturbation reaches the right buffer zone: relative size " +
                          std::to_string(rep.right_buffer_ratio) + " > " + std::to_string(opt.tol));
}

NormSample big_m_terms(const PerturbState& s, const WeightField& w) {
  const StripGrid& g = s.grid;
  const auto* wz = weights(&w, g);
  const auto e1 = mixed_energies(s.phi1, 3, g, wz);
  const auto e2 = mixed_energies(s.phi2, 3, g, wz);
  const auto ep = mixed_energies(s.psi, 3, g, nullptr);
  const auto epw = mixed_energies(s.psi, 3, g, wz);
  NormSample n;
  n.phi_H3w = sum_orders(e1, 0, 3) + sum_orders(e2, 0, 3);
  n.psi_H3 = sum_orders(ep, 0, 3);
  // |grad psi|^2 in H^2_w: d^(a,b) psi appears once through psi_z (a >= 1)
  // and once through psi_y (b >= 1).
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b) {
      if (a + b == 0) continue;
      n.gradpsi_H2w += ((a >= 1) + (b >= 1)) * epw[a][b];
    }
  return n;
}

DissipationSample dissipation_terms(const PerturbState& s, const WeightField& w, double eps) {
  const StripGrid& g = s.grid;
  const auto* wz = weights(&w, g);
  const auto e1 = mixed_energies(s.phi1, 4, g, wz);
  const auto e2 = mixed_energies(s.phi2, 4, g, wz);
  const auto ep = mixed_energies(s.psi, 4, g, wz);
  DissipationSample d;
  d.phi = sum_orders(e1, 1, 4) + sum_orders(e2, 1, 4);
  d.psi = sum_orders(ep, 1, 3);
  d.eps_psi4 = eps * sum_orders(ep, 4, 4);
  return d;
}

LemmaSample lemma_diagnostics(const PerturbState& s, const WaveOnGrid& wave) {
  const StripGrid& g = s.grid;
  const std::size_t nz = g.nz();
  if (wave.N.size() != nz) throw DimensionMismatch("wave samples do not match the strip z nodes");
  std::vector<double> ca(nz), cb(nz), cc(nz), cd(nz);
  LemmaSample out;
  out.min_coefficient = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nz; ++i) {
    const double N = wave.N[i];
    const double g_p = wave.P_gap[i];  // -N'/N
    ca[i] = g_p * g_p / N;             // (N')^2 / N^3
    cb[i] = wave.dP[i] / N;            // P'/N
    cc[i] = -wave.P[i] * g_p / N;      // P N' / N^2
    cd[i] = wave.params.eps * wave.dP[i];
    out.min_coefficient = std::min({out.min_coefficient, ca[i], cb[i], cc[i]});
  }
  out.coefficients_positive = out.min_coefficient > 0.0;
  out.a = inner(s.phi1, s.phi1, g, &ca) + inner(s.phi2, s.phi2, g, &ca);
  out.b = inner(s.phi1, s.phi1, g, &cb);
  out.c = inner(s.phi2, s.phi2, g, &cc);
  out.eps_P_psi2 = inner(s.psi, s.psi, g, &cd);
  return out;
}

std::vector<double> big_m(const std::vector<double>& sums) {
  std::vector<double> m(sums.size());
  double run = 0.0;
  for (std::size_t k = 0; k < sums.size(); ++k) {
    run = k == 0 ? sums[0] : std::max(run, sums[k]);
    m[k] = run;
  }
  return m;
}

// ---------------------------------------------------------------------------

EnergyReport::EnergyReport(const WaveOnGrid& wave, const StripGrid& g, BufferOptions buffer)
    : wave_(wave), buffer_(buffer) {
  if (wave.N.size() != g.nz()) throw DimensionMismatch("wave samples do not match the strip z nodes");
  weight_ = WeightField::from_wave(wave);
}

void EnergyReport::accumulate(const PerturbState& s) {
  if (weight_.w.empty()) throw InvalidArgument("EnergyReport was default-constructed");
  if (!rows_.empty() && !(s.t > rows_.back().t))
    throw InvalidArgument("energy snapshots must have strictly increasing t");
  const StripGrid& g = s.grid;
  // Initial data must respect the buffer; later rows only report how far the
  // weight reaches.
  if (rows_.empty()) assert_buffer(s, weight_, buffer_);
  const auto buf = buffer_check(s, weight_, buffer_);
  EnergyRow row;
  row.t = s.t;
  row.norms = big_m_terms(s, weight_);
  row.M = rows_.empty() ? row.norms.total() : std::max(rows_.back().M, row.norms.total());
  const DissipationSample now = dissipation_terms(s, weight_, wave_.params.eps);
  if (!rows_.empty()) {
    const double dt = s.t - rows_.back().t;
    row.acc = rows_.back().acc;
    row.acc.phi += 0.5 * dt * (last_integrand_.phi + now.phi);
    row.acc.psi += 0.5 * dt * (last_integrand_.psi + now.psi);
    row.acc.eps_psi4 += 0.5 * dt * (last_integrand_.eps_psi4 + now.eps_psi4);
  }
  last_integrand_ = now;
  row.lemma = lemma_diagnostics(s, wave_);
  row.dy_n_L2 = dy_l2(div({s.phi1, s.phi2}, g), g);
  row.dy_psi_L2 = dy_l2(s.psi, g);
  row.max_weight_used = buf.max_weight_used;
  rows_.push_back(row);
}

void EnergyReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << kEnergyCsvHeader << '\n';
  for (const auto& r : rows_) {
    const double cols[] = {r.t,         r.norms.phi_H3w, r.norms.psi_H3, r.norms.gradpsi_H2w, r.M,
                           r.acc.phi,   r.acc.psi,       r.acc.eps_psi4, r.lemma.a,           r.lemma.b,
                           r.lemma.c,   r.lemma.eps_P_psi2, r.dy_n_L2,   r.dy_psi_L2};
    bool first = true;
    for (double c : cols) {
      if (!first) out << ',';
      out << fmt17(c);
      first = false;
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed: " + path.string());
}

std::vector<std::vector<double>> read_energy_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kEnergyCsvHeader) throw FormatError("energy.csv: unexpected header");
  std::vector<std::vector<double>> cols(14);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::size_t c = 0;
    while (std::getline(ss, tok, ',')) {
      if (c >= cols.size()) throw FormatError("energy.csv: too many columns");
      cols[c++].push_back(std::stod(tok));
    }
    if (c != cols.size()) throw FormatError("energy.csv: too few columns");
  }
  return cols;
}

// ---------------------------------------------------------------------------

double poincare_ratio(const std::vector<double>& f, double lambda) {
  const std::size_t n = f.size();
  if (n < 4) throw InvalidArgument("poincare_ratio needs at least 4 samples");
  const double pi = std::numbers::pi;
  const double dy = lambda / static_cast<double>(n);
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(n);
  double dev = 0.0;
  for (double v : f) dev += (v - mean) * (v - mean);
  dev *= dy;
  // ||f'||^2 by Parseval on the DFT; the Nyquist mode has no real derivative.
  double der = 0.0;
  for (std::size_t mm = 1; mm < n; ++mm) {
    if (2 * mm == n) continue;
    std::complex<double> c = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      c += f[j] * std::polar(1.0, -2 * pi * static_cast<double>(mm * j) / static_cast<double>(n));
    c /= static_cast<double>(n);
    const double m = mm < n / 2 ? static_cast<double>(mm) : static_cast<double>(mm) - static_cast<double>(n);
    const double xi = 2 * pi * m / lambda;
    der += xi * xi * std::norm(c);
  }
  der *= lambda;
  if (dev <= 1e-30 * (mean * mean * lambda + 1e-300)) return 0.0;
  if (der == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(dev) / (lambda * std::sqrt(der));
}

bool smallness_condition(double s, double lambda) { return s * lambda * kPoincareConstant <= 1.0 / 16.0; }

double smallness_lambda_max(double s) { return 1.0 / (16.0 * s * kPoincareConstant); }

PoincareResult poincare_check(double lambda, std::size_t ny, double s, const PoincareOptions& opt) {
  if (ny < 4) throw InvalidArgument("poincare_check needs ny >= 4");
  if (!(lambda > 0.0)) throw InvalidArgument("poincare_check needs lambda > 0");
  const double pi = std::numbers::pi;
  PoincareResult r;
  r.c_p = kPoincareConstant;
  r.lambda_max = smallness_lambda_max(s);
  r.smallness_holds = smallness_condition(s, lambda);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> coef(0.0, 1.0);
  const std::size_t max_mode = ny / 2 - 1;
  std::uniform_int_distribution<std::size_t> top(1, std::max<std::size_t>(max_mode, 1));
  std::vector<double> f(ny);
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const std::size_t modes = top(rng);
    const double c0 = coef(rng);
    std::fill(f.begin(), f.end(), c0);
    for (std::size_t m = 1; m <= modes; ++m) {
      const double a = coef(rng), b = coef(rng);
      for (std::size_t j = 0; j < ny; ++j) {
        const double x = 2 * pi * static_cast<double>(m * j) / static_cast<double>(ny);
        f[j] += a * std::cos(x) + b * std::sin(x);
      }
    }
    r.worst_ratio = std::max(r.worst_ratio, poincare_ratio(f, lambda));
    ++r.samples;
  }
  if (opt.include_extremal) {
    for (std::size_t j = 0; j < ny; ++j) f[j] = std::sin(2 * pi * static_cast<double>(j) / static_cast<double>(ny));
    r.extremal_ratio = poincare_ratio(f, lambda);
    r.worst_ratio = std::max(r.worst_ratio, r.extremal_ratio);
    ++r.samples;
  }
  r.within_bound = r.worst_ratio <= r.c_p + opt.tol;
  return r;
}

// ---------------------------------------------------------------------------

YModeSeries y_mode_decay(const EnergyReport& report) {
  YModeSeries out;
  for (const auto& r : report.rows()) {
    out.t.push_back(r.t);
    out.dy_n.push_back(r.dy_n_L2);
    out.dy_psi.push_back(r.dy_psi_L2);
  }
  return out;
}

double exponential_rate(const std::vector<double>& t, const std::vector<double>& v, std::size_t from, double floor) {
  if (t.size() != v.size()) throw DimensionMismatch("exponential_rate: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = from; k < t.size(); ++k) {
    if (!(v[k] > floor)) continue;
    const double y = std::log(v[k]);
    sx += t[k];
    sy += y;
    sxx += t[k] * t[k];
    sxy += t[k] * y;
    ++n;
  }
  if (n < 2) throw InvalidArgument("exponential_rate: fewer than two usable points");
  const double den = static_cast<double>(n) * sxx - sx * sx;
  if (den == 0.0) throw InvalidArgument("exponential_rate: degenerate time samples");
  return -(static_cast<double>(n) * sxy - sx * sy) / den;
}

}  // namespace kswave
