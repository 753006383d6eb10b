#include "kswave/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kswave/error.hpp"

namespace kswave {

namespace {

constexpr std::size_t kHeaderBytes = 64;

void put_double(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.write(buf, 8);
}

double get_double(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw FormatError("snapshot: truncated payload");
  std::uint64_t bits;
  std::memcpy(&bits, buf, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

void write_any(const std::filesystem::path& path, const char* tag, const StripGrid& g, double t,
               std::initializer_list<const Field*> fields) {
  for (const Field* f : fields) check_shape(*f, g);
  char header[kHeaderBytes + 1];
  const int len = std::snprintf(header, sizeof header, "KSWAVE1 %s %zu %zu %.17g", tag, g.nz(), g.ny(), t);
  if (len < 0 || static_cast<std::size_t>(len) >= kHeaderBytes) throw FormatError("snapshot header overflow");
  std::memset(header + len, ' ', kHeaderBytes - static_cast<std::size_t>(len));
  header[kHeaderBytes - 1] = '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(header, kHeaderBytes);
  put_double(out, g.L_z());
  put_double(out, g.lambda());
  for (const Field* f : fields)
    for (double v : *f) put_double(out, v);
  if (!out) throw FormatError("write failed: " + path.string());
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void csv_any(const std::filesystem::path& path, const StripGrid& g, std::size_t max_nodes, const char* names,
             std::initializer_list<const Field*> fields) {
  if (g.size() > max_nodes) throw InvalidArgument("grid too large for CSV export");
  for (const Field* f : fields) check_shape(*f, g);
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "z,y," << names << '\n';
  for (std::size_t i = 0; i < g.nz(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) {
      out << fmt17(g.z(i)) << ',' << fmt17(g.y(j));
      for (const Field* f : fields) out << ',' << fmt17((*f)[g.index(i, j)]);
      out << '\n';
    }
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const PerturbState& s) {
  write_any(path, "PERT", s.grid, s.t, {&s.phi1, &s.phi2, &s.psi});
}

void write_snapshot(const std::filesystem::path& path, const PrimitiveState& s) {
  if (s.rep == Representation::np)
    write_any(path, "NP", s.grid, s.t, {&s.n, &s.p.z, &s.p.y});
  else
    write_any(path, "NC", s.grid, s.t, {&s.n, &s.logc});
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char header[kHeaderBytes];
  if (!in.read(header, kHeaderBytes)) throw FormatError("snapshot: short header");
  if (header[kHeaderBytes - 1] != '\n') throw FormatError("snapshot: header not newline-terminated");
  std::istringstream hs(std::string(header, kHeaderBytes - 1));
  std::string magic;
  Snapshot snap;
  if (!(hs >> magic >> snap.tag >> snap.nz >> snap.ny >> snap.t) || magic != "KSWAVE1")
    throw FormatError("snapshot: bad header");
  std::size_t nfields;
  if (snap.tag == "PERT" || snap.tag == "NP")
    nfields = 3;
  else if (snap.tag == "NC")
    nfields = 2;
  else
    throw FormatError("snapshot: unknown representation tag " + snap.tag);
  if (snap.nz == 0 || snap.ny == 0 || snap.nz > StripGrid::kDefaultNodeBudget / snap.ny)
    throw FormatError("snapshot: implausible dimensions");
  snap.L_z = get_double(in);
  snap.lambda = get_double(in);
  snap.fields.assign(nfields, Field(snap.nz * snap.ny));
  for (auto& f : snap.fields)
    for (double& v : f) v = get_double(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("snapshot: trailing bytes");
  return snap;
}

StripGrid Snapshot::grid(Discretization disc) const { return StripGrid(L_z, nz, lambda, ny, disc); }

PerturbState Snapshot::to_perturb(Discretization disc) const {
  if (tag != "PERT") throw FormatError("snapshot holds " + tag + ", not a perturbation state");
  return {grid(disc), t, fields[0], fields[1], fields[2]};
}

PrimitiveState Snapshot::to_primitive(Discretization disc) const {
  if (tag == "NP") return {grid(disc), t, Representation::np, fields[0], {fields[1], fields[2]}, {}};
  if (tag == "NC") return {grid(disc), t, Representation::nc, fields[0], {}, fields[1]};
  throw FormatError("snapshot holds " + tag + ", not a primitive state");
}

void write_field_csv(const std::filesystem::path& path, const PerturbState& s, std::size_t max_nodes) {
  csv_any(path, s.grid, max_nodes, "phi1,phi2,psi", {&s.phi1, &s.phi2, &s.psi});
}

void write_field_csv(const std::filesystem::path& path, const PrimitiveState& s, std::size_t max_nodes) {
  if (s.rep == Representation::np)
    csv_any(path, s.grid, max_nodes, "n,p1,p2", {&s.n, &s.p.z, &s.p.y});
  else
    csv_any(path, s.grid, max_nodes, "n,logc", {&s.n, &s.logc});
}

}  // namespace kswave
