#pragma once

// File output: energy time series (CSV), field snapshots (legacy VTK ASCII or
// a raw little-endian binary format) and the run manifest.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "viscoflow/energy.hpp"

namespace viscoflow {

inline constexpr const char* version_string = "1.0.0";

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Columns of energy.csv, in order.
inline const std::vector<std::string>& energy_columns() {
  static const std::vector<std::string> c{
      "step",         "t",           "dt",           "kinetic",          "free_energy",    "viscous_diss",
      "slip_diss",    "diff_diss_gamma", "diff_diss_inv", "relax_diss_1", "relax_diss_2",   "relax_diss_3",
      "work",         "residual",    "residual_positive", "energy",      "cfl",            "poisson_sweeps",
      "viscous_iterations", "min_lambda", "argmin_cell", "min_det",      "max_norm"};
  return c;
}

inline std::string energy_row(const EnergyBudget& b, const StepReport& r) {
  const std::vector<std::string> f{std::to_string(r.step),
                                   fmt17(b.t),
                                   fmt17(r.dt),
                                   fmt17(b.kinetic),
                                   fmt17(b.free_energy),
                                   fmt17(b.viscous_diss),
                                   fmt17(b.slip_diss),
                                   fmt17(b.diff_diss_gamma),
                                   fmt17(b.diff_diss_inv),
                                   fmt17(b.relax_diss_1),
                                   fmt17(b.relax_diss_2),
                                   fmt17(b.relax_diss_3),
                                   fmt17(b.work),
                                   fmt17(b.residual),
                                   fmt17(b.residual_positive),
                                   fmt17(b.energy()),
                                   fmt17(r.cfl),
                                   std::to_string(r.poisson_sweeps),
                                   std::to_string(r.viscous_iterations),
                                   fmt17(r.min_lambda),
                                   std::to_string(r.argmin_cell),
                                   fmt17(r.min_det),
                                   fmt17(r.max_norm)};
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
  return out + "\r\n";
}

inline std::string csv_header(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  return out + "\r\n";
}

/// Cell-centered velocity from the staggered field.
inline std::vector<Vec3> cell_velocity(const VelocityField& v, const Grid& g) {
  const FaceLookup look(g, 1.0, 0.0);
  std::vector<Vec3> out(g.cells());
  for (std::size_t id = 0; id < g.cells(); ++id) {
    Index3 q = g.coords(id);
    for (int d = 0; d < 3; ++d) {
      Index3 up = q;
      ++up[d];
      out[id][d] = 0.5 * (v.c[d][id] + look(d, up, true).value(v.c[d]));
    }
  }
  return out;
}

inline void write_vtk(const std::string& path, const SimState& s) {
  const Grid& g = s.grid;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path);
  f << "# vtk DataFile Version 3.0\n";
  f << "viscoflow step " << s.step << " t " << fmt17(s.t) << "\n";
  f << "ASCII\nDATASET STRUCTURED_POINTS\n";
  f << "DIMENSIONS " << g.n[0] << " " << g.n[1] << " " << g.n[2] << "\n";
  f << "ORIGIN " << fmt17(0.5 * g.h[0]) << " " << fmt17(0.5 * g.h[1]) << " " << fmt17(0.5 * g.h[2]) << "\n";
  f << "SPACING " << fmt17(g.h[0]) << " " << fmt17(g.h[1]) << " " << fmt17(g.h[2]) << "\n";
  f << "POINT_DATA " << g.cells() << "\n";
  const char* names[6] = {"B11", "B22", "B33", "B12", "B13", "B23"};
  for (int k = 0; k < 6; ++k) {
    f << "SCALARS " << names[k] << " double 1\nLOOKUP_TABLE default\n";
    for (const SymTensor3& b : s.B) f << fmt17(b.c[k]) << "\n";
  }
  f << "SCALARS lambda_min double 1\nLOOKUP_TABLE default\n";
  for (const SymTensor3& b : s.B) f << fmt17(lambda_min(b)) << "\n";
  f << "VECTORS velocity double\n";
  for (const Vec3& u : cell_velocity(s.v, g)) f << fmt17(u[0]) << " " << fmt17(u[1]) << " " << fmt17(u[2]) << "\n";
  if (!f) throw Error(ErrorKind::io, "write failed: " + path);
}

// Raw snapshot layout (little-endian):
//   char[8] magic "VFLOWRAW", uint32 version = 1, int32 nx, ny, nz,
//   uint32 ncomp = 10, char[8] dtype "float64", then ncomp blocks of
//   nx*ny*nz doubles in cell order: B11 B22 B33 B12 B13 B23 lambda_min
//   and the cell-centered velocity components.
inline constexpr char raw_magic[8] = {'V', 'F', 'L', 'O', 'W', 'R', 'A', 'W'};

struct RawSnapshot {
  Index3 n{};
  std::vector<std::vector<double>> comps;
};

namespace detail {
template <class T>
void put_le(std::ofstream& f, T v) {
  static_assert(std::endian::native == std::endian::little, "raw output assumes a little-endian host");
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get_le(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
}  // namespace detail

inline void write_raw(const std::string& path, const SimState& s) {
  const Grid& g = s.grid;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path);
  f.write(raw_magic, 8);
  detail::put_le<std::uint32_t>(f, 1);
  for (int d = 0; d < 3; ++d) detail::put_le<std::int32_t>(f, g.n[d]);
  detail::put_le<std::uint32_t>(f, 10);
  const char dtype[8] = {'f', 'l', 'o', 'a', 't', '6', '4', '\0'};
  f.write(dtype, 8);
  for (int k = 0; k < 6; ++k)
    for (const SymTensor3& b : s.B) detail::put_le(f, b.c[k]);
  for (const SymTensor3& b : s.B) detail::put_le(f, lambda_min(b));
  const std::vector<Vec3> u = cell_velocity(s.v, g);
  for (int d = 0; d < 3; ++d)
    for (const Vec3& x : u) detail::put_le(f, x[d]);
  if (!f) throw Error(ErrorKind::io, "write failed: " + path);
}

inline RawSnapshot read_raw(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, raw_magic, 8) != 0) throw Error(ErrorKind::io, "not a raw snapshot: " + path);
  if (detail::get_le<std::uint32_t>(f) != 1) throw Error(ErrorKind::io, "unsupported raw version");
  RawSnapshot r;
  for (int d = 0; d < 3; ++d) r.n[d] = detail::get_le<std::int32_t>(f);
  const auto ncomp = detail::get_le<std::uint32_t>(f);
  char dtype[8];
  f.read(dtype, 8);
  if (std::strcmp(dtype, "float64") != 0) throw Error(ErrorKind::io, "unsupported dtype");
  const std::size_t cells = static_cast<std::size_t>(r.n[0]) * r.n[1] * r.n[2];
  r.comps.assign(ncomp, std::vector<double>(cells));
  for (auto& c : r.comps)
    for (double& x : c) x = detail::get_le<double>(f);
  if (!f) throw Error(ErrorKind::io, "truncated raw snapshot: " + path);
  return r;
}

}  // namespace viscoflow
