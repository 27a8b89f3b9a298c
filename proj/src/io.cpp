#include "stnlmc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stnlmc {

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string errors_csv(const std::vector<ErrorReport>& rows, bool timings) {
  std::ostringstream o;
  o << kErrorsHeader << "\n";
  for (const auto& r : rows) {
    o << r.layersX << "," << r.layersT << "," << format_number(r.relL2) << "," << format_number(r.relH1k) << ",";
    if (timings)
      o << format_number(r.assembleSeconds, 4) << "," << format_number(r.localSolveSeconds, 4) << ","
        << format_number(r.coarseSolveSeconds, 4);
    else
      o << "0,0,0";
    o << "\n";
  }
  return o.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string vtk_structured_points(const SpaceGrid& g, const std::vector<double>& values, const std::string& name,
                                  const std::string& title) {
  if (static_cast<int>(values.size()) != g.vertices()) throw std::invalid_argument("vtk: value count mismatch");
  std::ostringstream o;
  o << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  o << "DIMENSIONS " << g.nx + 1 << " " << g.ny + 1 << " 1\n";
  o << "ORIGIN " << format_number(g.domain.x0, 17) << " " << format_number(g.domain.y0, 17) << " 0\n";
  o << "SPACING " << format_number(g.hx(), 17) << " " << format_number(g.hy(), 17) << " 1\n";
  o << "POINT_DATA " << g.vertices() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) o << format_number(v, 12) << "\n";
  return o.str();
}

void snapshot(const BlockField& field, double t, const std::string& path, const std::string& name) {
  const auto& g = field.grid();
  if (t < 0 || t > g.fineTime.T) throw std::invalid_argument("snapshot: time outside [0, T]");
  const int L = g.nearest_level(t);
  write_text(path, vtk_structured_points(g.fine, field.slice(L), name,
                                         name + " at t=" + format_number(g.fineTime.t(L), 12) + " level " + std::to_string(L)));
}

}  // namespace stnlmc
