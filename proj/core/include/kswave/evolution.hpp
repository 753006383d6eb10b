#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kswave/energy.hpp"
#include "kswave/field_ops.hpp"

namespace kswave {

struct SchemeConfig {
  double dt = 0.01;
  double t_end = 1.0;
  double theta = 0.5;  // 0.5 Crank-Nicolson, 1 backward Euler
  double cfl_safety = 0.4;
  std::size_t snapshot_stride = 10;
  // Adaptive: dt shrinks to the CFL bound when needed. Fixed: exceeding the
  // bound raises CflViolation.
  bool adaptive_dt = false;
  double blowup_factor = 1e6;
  // n below -negativity_tol * n_minus aborts a primitive run.
  double negativity_tol = 1e-6;

  void validate() const;
};

/// Largest dt allowed by the explicit transport terms, safety factor included.
double cfl_bound(const PerturbState& s, const WaveOnGrid& wave, double cfl_safety);
double cfl_bound(const PrimitiveState& s, double speed, double cfl_safety);

/// One theta-step of u_t = kappa Laplacian(u) in delta form with the
/// approximate factorization used by the steppers; boundary rows are held.
void diffusion_substep(Field& u, double kappa, double dt, double theta, const StripGrid& g);

namespace detail {
class Imex;
}

/// IMEX stepper for the antiderivative system
///   phi_t - s phi_z - Lap phi = N grad psi + (P div phi, 0) + div phi grad psi
///   psi_t - s psi_z - eps Lap psi = -2 eps P psi_z - eps |grad psi|^2 + div phi
/// with zero Dirichlet data at z = +-L_z. s and eps come from the wave.
class PerturbationStepper {
 public:
  PerturbationStepper(const StripGrid& g, WaveOnGrid wave, SchemeConfig cfg);
  ~PerturbationStepper();
  PerturbationStepper(PerturbationStepper&&) noexcept;
  PerturbationStepper& operator=(PerturbationStepper&&) noexcept;

  /// Advances by cfg.dt (or the CFL-limited step in adaptive mode, or `dt`
  /// when given). A state whose t differs from the last output restarts the
  /// multistep history with an Euler step.
  PerturbState step(const PerturbState& s, std::optional<double> dt = std::nullopt);
  std::size_t steps_taken() const noexcept { return steps_; }
  void reset();

 private:
  StripGrid grid_;
  WaveOnGrid wave_;
  SchemeConfig cfg_;
  std::unique_ptr<detail::Imex> imex_;
  std::size_t steps_ = 0;
  double sup0_ = -1.0;
};

/// IMEX stepper for the primitive forms in the co-moving frame:
///   n_t - s n_z - Lap n = div(n p),
///   (n, p):      p_t - s p_z - eps Lap p = -2 eps (p . grad) p + grad n,
///   (n, log c):  L_t - s L_z = eps (Lap L + |grad L|^2) - n,  p = -grad L.
/// z-boundary rows stay at their initial (wave tail) values.
class PrimitiveStepper {
 public:
  PrimitiveStepper(const StripGrid& g, WaveParams params, SchemeConfig cfg, Representation rep);
  ~PrimitiveStepper();
  PrimitiveStepper(PrimitiveStepper&&) noexcept;
  PrimitiveStepper& operator=(PrimitiveStepper&&) noexcept;

  PrimitiveState step(const PrimitiveState& s, std::optional<double> dt = std::nullopt);
  std::size_t steps_taken() const noexcept { return steps_; }
  void reset();

 private:
  StripGrid grid_;
  WaveParams params_;
  SchemeConfig cfg_;
  Representation rep_;
  std::unique_ptr<detail::Imex> imex_;
  std::size_t steps_ = 0;
  double sup0_ = -1.0;
};

// ---------------------------------------------------------------------------
// Runs

enum class RunStatus { completed, blow_up, cfl_violation, negativity, buffer_violation };
const char* to_string(RunStatus s);

/// Deviation of a primitive state from the pure wave.
struct PrimitiveRow {
  double t = 0.0;
  double n_dev = 0.0;       // max |n - N|
  double field_dev = 0.0;   // max |p - (P, 0)| or max |L - log C|
  double min_n = 0.0;
  double curl = 0.0;        // relative discrete curl of p (np form)
  double dy_n_L2 = 0.0;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: nothing is written
  bool write_snapshots = true;
  bool keep_snapshots = false;    // also keep snapshots in memory
  std::string config_text;        // hashed into run.meta
  std::vector<std::pair<std::string, std::string>> meta;
  std::function<void(const PerturbState&)> on_perturb_snapshot;
  std::function<void(const PrimitiveState&)> on_primitive_snapshot;
  BufferOptions buffer;
};

struct Trajectory {
  RunStatus status = RunStatus::completed;
  std::size_t failed_step = 0;
  std::string message;
  std::size_t steps = 0;
  std::vector<double> snapshot_times;
  std::vector<PerturbState> perturb_snapshots;
  std::vector<PrimitiveState> primitive_snapshots;
  EnergyReport energy;
  std::vector<PrimitiveRow> primitive_rows;
  std::optional<PerturbState> final_perturb;
  std::optional<PrimitiveState> final_primitive;

  bool ok() const noexcept { return status == RunStatus::completed; }
};

Trajectory run_perturbation(const PerturbState& init, const WaveOnGrid& wave, const SchemeConfig& cfg,
                            const RunOptions& opt = {});
Trajectory run_primitive(const PrimitiveState& init, const WaveOnGrid& wave, const SchemeConfig& cfg,
                         const RunOptions& opt = {});

PrimitiveRow primitive_row(const PrimitiveState& s, const WaveOnGrid& wave);
void write_primitive_csv(const std::filesystem::path& path, const std::vector<PrimitiveRow>& rows);

/// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_sha1(const std::string& content);

}  // namespace kswave
