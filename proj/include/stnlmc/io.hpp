#pragma once

#include "stnlmc/field.hpp"
#include "stnlmc/metrics.hpp"

#include <string>
#include <vector>

namespace stnlmc {

inline constexpr const char* kErrorsHeader =
    "layers_x,layers_t,rel_l2_pct,rel_h1k_pct,assemble_s,local_solve_s,coarse_solve_s";

std::string format_number(double v, int digits = 10);
std::string errors_csv(const std::vector<ErrorReport>& rows, bool timings = true);
void write_text(const std::string& path, const std::string& text);

// Legacy VTK ASCII structured points of a spatial vertex slice.
std::string vtk_structured_points(const SpaceGrid& grid, const std::vector<double>& vertexValues,
                                  const std::string& name, const std::string& title);
// Slice of a field at the fine level nearest to time t.
void snapshot(const BlockField& field, double t, const std::string& path, const std::string& name = "u");

}  // namespace stnlmc
