#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kswave/error.hpp"
#include "kswave/wave_profile.hpp"

namespace kswave {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok, std::size_t line) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw FormatError("profile csv line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  if (pos != tok.size()) throw FormatError("profile csv line " + std::to_string(line) + ": trailing junk");
  return v;
}

}  // namespace

std::filesystem::path profile_meta_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension();
  p += ".meta.json";
  return p;
}

void write_profile(const WaveProfile& w, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw FormatError("cannot open " + csv_path.string() + " for writing");
  out << "z,N,P,C\n";
  for (std::size_t i = 0; i < w.size(); ++i)
    out << fmt17(w.z(i)) << ',' << fmt17(w.N()[i]) << ',' << fmt17(w.P()[i]) << ',' << fmt17(w.C()[i]) << '\n';
  if (!out) throw FormatError("write failed: " + csv_path.string());

  const auto& info = w.info();
  nlohmann::ordered_json meta;
  meta["s"] = w.params().s;
  meta["eps"] = w.params().eps;
  meta["c_plus"] = w.params().c_plus;
  meta["z0"] = w.grid().z0;
  meta["dz"] = w.grid().dz;
  meta["n"] = w.grid().n;
  meta["z_center"] = w.z_center();
  meta["rk_tol"] = info.rk_tol;
  meta["tail_ball"] = info.tail_ball;
  meta["delta"] = info.delta;
  meta["chemical_clamped"] = w.chemical_clamped();
  std::ofstream m(profile_meta_path(csv_path));
  if (!m) throw FormatError("cannot write profile metadata");
  m << meta.dump(2) << '\n';
}

WaveProfile read_profile(const std::filesystem::path& csv_path) {
  std::ifstream meta_in(profile_meta_path(csv_path));
  if (!meta_in) throw FormatError("missing metadata sidecar " + profile_meta_path(csv_path).string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad profile metadata: ") + e.what());
  }
  WaveParams params;
  ZGrid grid;
  double z_center;
  WaveSolveInfo info;
  try {
    params.s = meta.at("s").get<double>();
    params.eps = meta.at("eps").get<double>();
    params.c_plus = meta.at("c_plus").get<double>();
    grid.z0 = meta.at("z0").get<double>();
    grid.dz = meta.at("dz").get<double>();
    grid.n = meta.at("n").get<std::size_t>();
    z_center = meta.at("z_center").get<double>();
    info.rk_tol = meta.value("rk_tol", 0.0);
    info.tail_ball = meta.value("tail_ball", 0.0);
    info.delta = meta.value("delta", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad profile metadata: ") + e.what());
  }
  try {
    params.validate(std::numeric_limits<double>::infinity());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("profile metadata: ") + e.what());
  }
  if (grid.n < 2 || !(grid.dz > 0.0)) throw FormatError("profile metadata: bad grid");

  std::ifstream in(csv_path);
  if (!in) throw FormatError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "z,N,P,C") throw FormatError("profile csv: expected header 'z,N,P,C'");
  WaveProfile::Samples smp;
  ChemicalProfile chem;
  std::size_t lineno = 1;
  const double nm = params.n_minus();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    double v[4];
    int k = 0;
    while (std::getline(ss, tok, ',')) {
      if (k == 4) throw FormatError("profile csv line " + std::to_string(lineno) + ": too many columns");
      v[k++] = parse_double(tok, lineno);
    }
    if (k != 4) throw FormatError("profile csv line " + std::to_string(lineno) + ": expected 4 columns");
    const std::size_t i = smp.N.size();
    if (std::abs(v[0] - grid[i]) > 1e-9 * std::max(1.0, std::abs(grid[i])))
      throw FormatError("profile csv line " + std::to_string(lineno) + ": z does not match the metadata grid");
    if (!(v[1] >= 0.0) || !(v[3] > 0.0) || !std::isfinite(v[2]))
      throw FormatError("profile csv line " + std::to_string(lineno) + ": N < 0, C <= 0 or non-finite P");
    smp.N.push_back(v[1]);
    smp.P.push_back(v[2]);
    // Gaps lose precision through the round trip; they are recomputed here.
    smp.N_gap.push_back(nm - v[1]);
    smp.P_gap.push_back(v[2] + params.s);
    chem.C.push_back(v[3]);
    chem.log_C.push_back(std::log(v[3]));
  }
  if (smp.N.size() != grid.n) throw FormatError("profile csv: row count does not match metadata");
  return WaveProfile(params, grid, std::move(smp), std::move(chem), z_center, info);
}

}  // namespace kswave
