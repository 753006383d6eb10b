#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "kswave/error.hpp"
#include "kswave/field_io.hpp"

using namespace kswave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "kswave_field_io";
  fs::create_directories(dir);
  return dir / name;
}

PerturbState some_perturbation() {
  const StripGrid g(6.0, 33, 0.25, 8);
  auto s = PerturbState::zero(g, 1.5);
  s.phi1 = sample(g, [](double z, double y) { return std::sin(z) * std::cos(9 * y); });
  s.phi2 = sample(g, [](double z, double y) { return z * y - 1e-300; });
  s.psi = sample(g, [](double z, double) { return std::exp(-z * z) / 3.0; });
  return s;
}

}  // namespace

TEST(Snapshot, PerturbationRoundTripIsBitExact) {
  const auto s = some_perturbation();
  const auto path = scratch("pert.fld");
  write_snapshot(path, s);
  const auto snap = read_snapshot(path);
  EXPECT_EQ(snap.tag, "PERT");
  EXPECT_EQ(snap.nz, 33u);
  EXPECT_EQ(snap.ny, 8u);
  EXPECT_EQ(snap.t, 1.5);
  const auto back = snap.to_perturb();
  EXPECT_TRUE(back.grid.same_as(s.grid));
  EXPECT_EQ(back.phi1, s.phi1);
  EXPECT_EQ(back.phi2, s.phi2);
  EXPECT_EQ(back.psi, s.psi);
  EXPECT_THROW(snap.to_primitive(), FormatError);
}

TEST(Snapshot, PrimitiveRoundTrip) {
  const StripGrid g(6.0, 33, 0.25, 8);
  PrimitiveState np{g, 0.25, Representation::np, sample(g, [](double z, double) { return 1 + z; }),
                    {Field(g.size(), 2.0), Field(g.size(), -3.0)}, {}};
  const auto p1 = scratch("np.fld");
  write_snapshot(p1, np);
  const auto back = read_snapshot(p1).to_primitive();
  EXPECT_EQ(back.rep, Representation::np);
  EXPECT_EQ(back.n, np.n);
  EXPECT_EQ(back.p.y, np.p.y);

  PrimitiveState nc{g, 0.5, Representation::nc, Field(g.size(), 1.0), {}, Field(g.size(), -0.5)};
  const auto p2 = scratch("nc.fld");
  write_snapshot(p2, nc);
  const auto snap = read_snapshot(p2);
  EXPECT_EQ(snap.tag, "NC");
  EXPECT_EQ(snap.to_primitive().logc, nc.logc);
}

TEST(Snapshot, RejectsTruncatedAndForeignFiles) {
  const auto s = some_perturbation();
  const auto path = scratch("trunc.fld");
  write_snapshot(path, s);
  fs::resize_file(path, fs::file_size(path) - 8);
  EXPECT_THROW(read_snapshot(path), FormatError);

  const auto junk = scratch("junk.fld");
  std::ofstream(junk) << "not a snapshot\n";
  EXPECT_THROW(read_snapshot(junk), FormatError);
  EXPECT_THROW(read_snapshot(scratch("missing.fld")), Error);
}

TEST(Snapshot, RejectsTrailingBytes) {
  const auto s = some_perturbation();
  const auto path = scratch("trail.fld");
  write_snapshot(path, s);
  std::ofstream(path, std::ios::app | std::ios::binary) << "xx";
  EXPECT_THROW(read_snapshot(path), FormatError);
}

TEST(FieldCsv, WritesOneRowPerNodeAndRespectsLimit) {
  const auto s = some_perturbation();
  const auto path = scratch("pert.csv");
  write_field_csv(path, s);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "z,y,phi1,phi2,psi");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, s.grid.size());
  EXPECT_THROW(write_field_csv(scratch("big.csv"), s, 100), InvalidArgument);
}
