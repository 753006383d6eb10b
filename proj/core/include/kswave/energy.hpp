#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kswave/field_ops.hpp"

namespace kswave {

/// w(z) = 1/N(z) on the strip z nodes (broadcast in y).
struct WeightField {
  std::vector<double> w;

  static WeightField from_wave(const WaveOnGrid& wave);
  static WeightField uniform(const StripGrid& g);
};

/// Squared norm sum_{i+j<=k} int |d_z^i d_y^j f|^2 w. Pass nullptr for the
/// unweighted H^k norm.
double weighted_sobolev_norm(const Field& f, int k, const StripGrid& g, const WeightField* w);
/// Sum over the components of a vector field.
double weighted_sobolev_norm(const VectorField& v, int k, const StripGrid& g, const WeightField* w);

/// Fourier-coefficient form sum_{i+j<=k} sum_m m^{2j} int |d_z^i f_m|^2 w,
/// m the integer y mode (|m| <= ny/2), normalized like the mixed form.
double fourier_sobolev_norm(const Field& f, int k, const StripGrid& g, const WeightField* w);

/// Ratio bound max(1, (lambda/2pi)^{2k}, (2pi/lambda)^{2k}) between the two forms.
double norm_equivalence_factor(double lambda, int k);

/// sum_{|alpha| = l} int |D^alpha f|^2 w.
double derivative_energy(const Field& f, int l, const StripGrid& g, const WeightField* w);

struct NormSample {
  double phi_H3w = 0.0;
  double psi_H3 = 0.0;
  double gradpsi_H2w = 0.0;
  double total() const noexcept { return phi_H3w + psi_H3 + gradpsi_H2w; }
};

/// Dissipation integrands at one instant.
struct DissipationSample {
  double phi = 0.0;      // sum_{l=1..4} ||grad^l phi||_w^2
  double psi = 0.0;      // sum_{l=1..3} ||grad^l psi||_w^2
  double eps_psi4 = 0.0; // eps ||grad^4 psi||_w^2
};

struct LemmaSample {
  double a = 0.0;          // int (N')^2/N^3 |phi|^2
  double b = 0.0;          // int (P'/N) (phi^1)^2
  double c = 0.0;          // int (P N'/N^2) (phi^2)^2
  double eps_P_psi2 = 0.0; // eps int P' |psi|^2
  double min_coefficient = 0.0;
  bool coefficients_positive = true;
};

struct BufferReport {
  // Largest |value| among phi1, phi2, psi inside the right buffer, relative
  // to the global sup.
  double right_buffer_ratio = 0.0;
  double left_buffer_ratio = 0.0;
  // Largest w(z) multiplying a value above the buffer tolerance.
  double max_weight_used = 0.0;
};

struct BufferOptions {
  double fraction = 0.1;  // of L_z, at each end
  double tol = 1e-6;      // relative to the global sup
};

BufferReport buffer_check(const PerturbState& s, const WeightField& w, const BufferOptions& opt = {});
/// Throws BufferViolation when the right buffer holds a non-negligible value.
void assert_buffer(const PerturbState& s, const WeightField& w, const BufferOptions& opt = {});

NormSample big_m_terms(const PerturbState& s, const WeightField& w);
DissipationSample dissipation_terms(const PerturbState& s, const WeightField& w, double eps);
LemmaSample lemma_diagnostics(const PerturbState& s, const WaveOnGrid& wave);

/// Running sup of M over a sequence of norm-sum values.
std::vector<double> big_m(const std::vector<double>& norm_sums);

struct EnergyRow {
  double t = 0.0;
  NormSample norms;
  double M = 0.0;
  DissipationSample acc;  // time integrals up to t
  LemmaSample lemma;
  double dy_n_L2 = 0.0;
  double dy_psi_L2 = 0.0;
  double max_weight_used = 0.0;
};

/// Time series of norms, M(t), accumulators and lemma integrals.
class EnergyReport {
 public:
  EnergyReport() = default;
  EnergyReport(const WaveOnGrid& wave, const StripGrid& g, BufferOptions buffer = {});

  /// Appends a snapshot; accumulators advance by the trapezoid rule in time.
  /// Rejects t not strictly after the previous row.
  void accumulate(const PerturbState& s);

  const std::vector<EnergyRow>& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }
  const EnergyRow& back() const { return rows_.back(); }

  void write_csv(const std::filesystem::path& path) const;

 private:
  WaveOnGrid wave_;
  WeightField weight_;
  std::vector<EnergyRow> rows_;
  DissipationSample last_integrand_;
  BufferOptions buffer_;
};

/// Header line of energy.csv.
extern const char* const kEnergyCsvHeader;

/// Reads back the columns of an energy.csv file.
std::vector<std::vector<double>> read_energy_csv(const std::filesystem::path& path);

/// ||d_y f||^2 (unweighted, trapezoid/rectangle quadrature).
double dy_l2(const Field& f, const StripGrid& g);

// ---------------------------------------------------------------------------
// Poincare battery

struct PoincareResult {
  double c_p = 0.0;            // constant used, 1/(2 pi)
  double worst_ratio = 0.0;    // max ||f - mean|| / (lambda ||f'||) over the battery
  double extremal_ratio = 0.0; // ratio of the first Fourier mode
  bool within_bound = false;   // worst_ratio <= c_p + tol
  double lambda_max = 0.0;     // largest lambda with s lambda c_p <= 1/16
  bool smallness_holds = false;
  std::size_t samples = 0;
};

struct PoincareOptions {
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  bool include_extremal = true;
};

/// Ratio ||f - mean|| / (lambda ||f'||) with spectral f' and rectangle rule;
/// constant f gives 0.
double poincare_ratio(const std::vector<double>& f, double lambda);

PoincareResult poincare_check(double lambda, std::size_t ny, double s, const PoincareOptions& opt = {});

/// Poincare constant adopted for the smallness condition.
inline constexpr double kPoincareConstant = 0.15915494309189535;  // 1/(2 pi)

/// s * lambda * C_p <= 1/16.
bool smallness_condition(double s, double lambda);
double smallness_lambda_max(double s);

// ---------------------------------------------------------------------------
// Transversal decay

struct YModeSeries {
  std::vector<double> t, dy_n, dy_psi;
};

YModeSeries y_mode_decay(const EnergyReport& report);

/// Least-squares slope of log(values) against t over entries with value >
/// floor, starting at index `from`. Returns the decay rate (positive when
/// decaying).
double exponential_rate(const std::vector<double>& t, const std::vector<double>& values, std::size_t from = 0,
                        double floor = 1e-300);

}  // namespace kswave
