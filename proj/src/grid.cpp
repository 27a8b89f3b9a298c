#include "stnlmc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stnlmc {

std::vector<int> Region::space_cells(int nxc) const {
  std::vector<int> out;
  out.reserve(cells.count());
  for (int cy = cells.y0; cy <= cells.y1; ++cy)
    for (int cx = cells.x0; cx <= cells.x1; ++cx) out.push_back(cy * nxc + cx);
  return out;
}

int SpaceTimeGrid::nearest_level(double t) const {
  const int L = static_cast<int>(std::lround(t / fineTime.dt()));
  return std::clamp(L, 0, fineTime.nt);
}

SpaceTimeGrid build_grid(int nxc, int nyc, int ntc, int rx, int ry, int rt, Rect domain, double T) {
  if (nxc < 1 || nyc < 1 || ntc < 1 || rx < 1 || ry < 1 || rt < 1)
    throw std::invalid_argument("build_grid: counts must be >= 1");
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0) || !(T > 0.0))
    throw std::invalid_argument("build_grid: domain and T must have positive extent");
  SpaceTimeGrid g;
  g.coarse = {nxc, nyc, domain};
  g.fine = {nxc * rx, nyc * ry, domain};
  g.coarseTime = {ntc, T};
  g.fineTime = {ntc * rt, T};
  g.rx = rx;
  g.ry = ry;
  g.rt = rt;
  return g;
}

CellRange oversample_space(const SpaceTimeGrid& g, int i, int layers) {
  if (i < 0 || i >= g.coarse.cells()) throw std::out_of_range("oversample_space: cell index");
  if (layers < 0) throw std::invalid_argument("oversample_space: negative layer count");
  const int cx = i % g.coarse.nx, cy = i / g.coarse.nx;
  return {std::max(cx - layers, 0), std::min(cx + layers, g.coarse.nx - 1),
          std::max(cy - layers, 0), std::min(cy + layers, g.coarse.ny - 1)};
}

std::pair<int, int> oversample_time(const SpaceTimeGrid& g, int n, int M) {
  if (n < 0 || n >= g.coarseTime.nt) throw std::out_of_range("oversample_time: slab index");
  if (M < 0) throw std::invalid_argument("oversample_time: negative M");
  return {std::max(n - M, 0), n};
}

Region oversample(const SpaceTimeGrid& g, BlockId b, int layersX, int M) {
  const auto [k0, k1] = oversample_time(g, b.n, M);
  return {oversample_space(g, b.i, layersX), k0, k1};
}

}  // namespace stnlmc
