#include "kswave/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "kswave/energy.hpp"
#include "kswave/error.hpp"

namespace kswave {

const char* to_string(PerturbationFamily f) {
  switch (f) {
    case PerturbationFamily::gaussian_bump: return "gaussian_bump";
    case PerturbationFamily::y_mode: return "y_mode";
    case PerturbationFamily::custom_file: return "custom_file";
  }
  return "unknown";
}

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::perturbation: return "perturbation";
    case Formulation::primitive_np: return "primitive_np";
    case Formulation::primitive_nc: return "primitive_nc";
    case Formulation::all_three: return "all_three";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '"') quoted = !quoted;
    if (s[k] == '#' && !quoted) return s.substr(0, k);
  }
  return s;
}

struct Value {
  std::string raw;
  int line = 0;
  std::string key;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + what);
  }

  double number() const {
    if (raw.empty()) fail("missing value");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end != raw.c_str() + raw.size() || errno == ERANGE || !std::isfinite(v)) fail("expected a number, got '" + raw + "'");
    return v;
  }

  std::size_t count() const {
    const double v = number();
    if (v < 0 || v != std::floor(v) || v > 1e12) fail("expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  int integer() const {
    const double v = number();
    if (v != std::floor(v) || std::abs(v) > 1e9) fail("expected an integer");
    return static_cast<int>(v);
  }

  bool boolean() const {
    if (raw == "true") return true;
    if (raw == "false") return false;
    fail("expected true or false");
  }

  std::string string() const {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') fail("expected a quoted string");
    const std::string body = raw.substr(1, raw.size() - 2);
    if (body.find('"') != std::string::npos || body.find('\\') != std::string::npos)
      fail("escapes are not supported in strings");
    return body;
  }

  std::vector<double> numbers() const {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') fail("expected an array [a, b, ...]");
    std::vector<double> out;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) {
        if (ss.eof()) break;  // trailing comma
        fail("empty array element");
      }
      Value v{item, line, key};
      out.push_back(v.number());
    }
    return out;
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + fmt(v[k]);
  return out + "]";
}

using Setter = std::function<void(ExperimentConfig&, const Value&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"s", [](ExperimentConfig& c, const Value& v) { c.wave.s = v.number(); }},
      {"eps", [](ExperimentConfig& c, const Value& v) { c.wave.eps = v.number(); }},
      {"c_plus", [](ExperimentConfig& c, const Value& v) { c.wave.c_plus = v.number(); }},
      {"L_z", [](ExperimentConfig& c, const Value& v) { c.L_z = v.number(); }},
      {"nz", [](ExperimentConfig& c, const Value& v) { c.nz = v.count(); }},
      {"lambda", [](ExperimentConfig& c, const Value& v) { c.lambda = v.number(); }},
      {"ny", [](ExperimentConfig& c, const Value& v) { c.ny = v.count(); }},
      {"z_order", [](ExperimentConfig& c, const Value& v) { c.disc.z_order = v.integer(); }},
      {"y_scheme",
       [](ExperimentConfig& c, const Value& v) {
         const std::string s = v.string();
         if (s == "centered")
           c.disc.y = YScheme::centered;
         else if (s == "spectral")
           c.disc.y = YScheme::spectral;
         else
           v.fail("expected \"centered\" or \"spectral\"");
       }},
      {"profile_dz", [](ExperimentConfig& c, const Value& v) { c.profile_dz = v.number(); }},
      {"dt", [](ExperimentConfig& c, const Value& v) { c.scheme.dt = v.number(); }},
      {"t_end", [](ExperimentConfig& c, const Value& v) { c.scheme.t_end = v.number(); }},
      {"theta", [](ExperimentConfig& c, const Value& v) { c.scheme.theta = v.number(); }},
      {"cfl_safety", [](ExperimentConfig& c, const Value& v) { c.scheme.cfl_safety = v.number(); }},
      {"snapshot_stride", [](ExperimentConfig& c, const Value& v) { c.scheme.snapshot_stride = v.count(); }},
      {"adaptive_dt", [](ExperimentConfig& c, const Value& v) { c.scheme.adaptive_dt = v.boolean(); }},
      {"blowup_factor", [](ExperimentConfig& c, const Value& v) { c.scheme.blowup_factor = v.number(); }},
      {"negativity_tol", [](ExperimentConfig& c, const Value& v) { c.scheme.negativity_tol = v.number(); }},
      {"family",
       [](ExperimentConfig& c, const Value& v) {
         const std::string s = v.string();
         if (s == "gaussian_bump")
           c.init.family = PerturbationFamily::gaussian_bump;
         else if (s == "y_mode")
           c.init.family = PerturbationFamily::y_mode;
         else if (s == "custom_file")
           c.init.family = PerturbationFamily::custom_file;
         else
           v.fail("unknown perturbation family '" + s + "'");
       }},
      {"amplitude", [](ExperimentConfig& c, const Value& v) { c.init.amplitude = v.number(); }},
      {"z_center", [](ExperimentConfig& c, const Value& v) { c.init.z_center = v.number(); }},
      {"sigma_z", [](ExperimentConfig& c, const Value& v) { c.init.sigma_z = v.number(); }},
      {"y_mode", [](ExperimentConfig& c, const Value& v) { c.init.y_mode = v.integer(); }},
      {"perturbation_file", [](ExperimentConfig& c, const Value& v) { c.init.file = v.string(); }},
      {"formulation",
       [](ExperimentConfig& c, const Value& v) {
         const std::string s = v.string();
         if (s == "perturbation")
           c.formulation = Formulation::perturbation;
         else if (s == "primitive_np")
           c.formulation = Formulation::primitive_np;
         else if (s == "primitive_nc")
           c.formulation = Formulation::primitive_nc;
         else if (s == "all_three")
           c.formulation = Formulation::all_three;
         else
           v.fail("unknown formulation '" + s + "'");
       }},
      {"out_dir", [](ExperimentConfig& c, const Value& v) { c.out_dir = v.string(); }},
      {"seed", [](ExperimentConfig& c, const Value& v) { c.seed = v.count(); }},
      {"write_snapshots", [](ExperimentConfig& c, const Value& v) { c.write_snapshots = v.boolean(); }},
      {"buffer_fraction", [](ExperimentConfig& c, const Value& v) { c.buffer_fraction = v.number(); }},
      {"cross_tol", [](ExperimentConfig& c, const Value& v) { c.cross_tol = v.number(); }},
      {"sweep_amplitude", [](ExperimentConfig& c, const Value& v) { c.sweep.amplitude = v.numbers(); }},
      {"sweep_eps", [](ExperimentConfig& c, const Value& v) { c.sweep.eps = v.numbers(); }},
      {"sweep_lambda", [](ExperimentConfig& c, const Value& v) { c.sweep.lambda = v.numbers(); }},
      {"sweep_refinement",
       [](ExperimentConfig& c, const Value& v) {
         c.sweep.refinement.clear();
         for (double r : v.numbers()) {
           if (r < 1 || r != std::floor(r)) v.fail("refinement factors must be positive integers");
           c.sweep.refinement.push_back(static_cast<int>(r));
         }
       }},
  };
  return table;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  cfg.source = text;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[')
      throw ConfigError("line " + std::to_string(lineno) + ": tables are not supported; use flat keys");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    it->second(cfg, Value{raw, lineno, key});
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream o;
  o << "s = " << fmt(wave.s) << "\neps = " << fmt(wave.eps) << "\nc_plus = " << fmt(wave.c_plus) << '\n';
  o << "L_z = " << fmt(L_z) << "\nnz = " << nz << "\nlambda = " << fmt(lambda) << "\nny = " << ny << '\n';
  o << "z_order = " << disc.z_order << "\ny_scheme = \"" << (disc.y == YScheme::spectral ? "spectral" : "centered")
    << "\"\n";
  o << "profile_dz = " << fmt(profile_dz) << '\n';
  o << "dt = " << fmt(scheme.dt) << "\nt_end = " << fmt(scheme.t_end) << "\ntheta = " << fmt(scheme.theta)
    << "\ncfl_safety = " << fmt(scheme.cfl_safety) << "\nsnapshot_stride = " << scheme.snapshot_stride
    << "\nadaptive_dt = " << (scheme.adaptive_dt ? "true" : "false") << "\nblowup_factor = " << fmt(scheme.blowup_factor)
    << "\nnegativity_tol = " << fmt(scheme.negativity_tol) << '\n';
  o << "family = \"" << to_string(init.family) << "\"\namplitude = " << fmt(init.amplitude)
    << "\nz_center = " << fmt(init.z_center) << "\nsigma_z = " << fmt(init.sigma_z) << "\ny_mode = " << init.y_mode
    << '\n';
  if (!init.file.empty()) o << "perturbation_file = \"" << init.file.string() << "\"\n";
  o << "formulation = \"" << to_string(formulation) << "\"\nout_dir = \"" << out_dir.string() << "\"\n";
  o << "seed = " << seed << "\nwrite_snapshots = " << (write_snapshots ? "true" : "false")
    << "\nbuffer_fraction = " << fmt(buffer_fraction) << "\ncross_tol = " << fmt(cross_tol) << '\n';
  if (!sweep.amplitude.empty()) o << "sweep_amplitude = " << fmt_array(sweep.amplitude) << '\n';
  if (!sweep.eps.empty()) o << "sweep_eps = " << fmt_array(sweep.eps) << '\n';
  if (!sweep.lambda.empty()) o << "sweep_lambda = " << fmt_array(sweep.lambda) << '\n';
  if (!sweep.refinement.empty())
    o << "sweep_refinement = " << fmt_array(std::vector<double>(sweep.refinement.begin(), sweep.refinement.end()))
      << '\n';
  return o.str();
}

void ExperimentConfig::validate() const {
  try {
    wave.validate();
    scheme.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(L_z > 0.0)) throw ConfigError("L_z must be positive");
  if (nz < 16) throw ConfigError("nz must be at least 16");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (ny < 4 || ny % 2 != 0) throw ConfigError("ny must be even and at least 4");
  if (disc.z_order != 2 && disc.z_order != 4) throw ConfigError("z_order must be 2 or 4");
  if (!(profile_dz > 0.0)) throw ConfigError("profile_dz must be positive");
  if (!(init.amplitude >= 0.0) || !std::isfinite(init.amplitude)) throw ConfigError("amplitude must be non-negative");
  if (!(init.sigma_z > 0.0)) throw ConfigError("sigma_z must be positive");
  if (init.y_mode < 0) throw ConfigError("y_mode must be non-negative");
  if (init.y_mode > static_cast<int>(ny / 2) - 1 && init.family == PerturbationFamily::y_mode)
    throw ConfigError("y_mode must be below ny/2");
  if (init.family == PerturbationFamily::custom_file && init.file.empty())
    throw ConfigError("custom_file needs perturbation_file");
  if (!(buffer_fraction > 0.0 && buffer_fraction < 0.5)) throw ConfigError("buffer_fraction must lie in (0, 0.5)");
  if (!(cross_tol > 0.0)) throw ConfigError("cross_tol must be positive");
  for (double a : sweep.amplitude)
    if (!(a >= 0.0)) throw ConfigError("sweep_amplitude entries must be non-negative");
  for (double e : sweep.eps)
    if (!(e >= 0.0 && e <= 0.5)) throw ConfigError("sweep_eps entries must lie in [0, 0.5]");
  for (double l : sweep.lambda)
    if (!(l > 0.0)) throw ConfigError("sweep_lambda entries must be positive");
  for (int r : sweep.refinement)
    if (r < 1) throw ConfigError("sweep_refinement entries must be at least 1");
  if (wave.s * L_z > 650.0) throw ConfigError("s * L_z too large for double-precision weights");
}

bool ExperimentConfig::smallness_advisory() const { return !smallness_condition(wave.s, lambda); }

std::vector<std::string> ExperimentConfig::advisories() const {
  std::vector<std::string> out;
  if (smallness_advisory()) {
    out.push_back("s * lambda * C_p = " + fmt(wave.s * lambda * kPoincareConstant) +
                  " exceeds 1/16: the stability theorem assumes s * lambda small (lambda <= " +
                  fmt(smallness_lambda_max(wave.s)) + " at this s)");
  }
  return out;
}

StripGrid ExperimentConfig::grid() const { return StripGrid(L_z, nz, lambda, ny, disc); }

}  // namespace kswave
