#pragma once

#include <utility>
#include <vector>

namespace stnlmc {

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

struct SpaceGrid {
  int nx = 1, ny = 1;
  Rect domain;
  double hx() const { return (domain.x1 - domain.x0) / nx; }
  double hy() const { return (domain.y1 - domain.y0) / ny; }
  int cells() const { return nx * ny; }
  int vertices() const { return (nx + 1) * (ny + 1); }
  int cell(int ix, int iy) const { return iy * nx + ix; }
  int vertex(int ix, int iy) const { return iy * (nx + 1) + ix; }
  double x(int ix) const { return domain.x0 + ix * hx(); }
  double y(int iy) const { return domain.y0 + iy * hy(); }
};

struct TimeGrid {
  int nt = 1;
  double T = 1.0;
  double dt() const { return T / nt; }
  double t(int k) const { return k == nt ? T : k * dt(); }
};

// Vertex-adjacent layer growth: a layer adds every cell sharing at least a vertex.
inline constexpr bool kVertexAdjacency = true;

// Inclusive rectangle of coarse space cells.
struct CellRange {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  int nx() const { return x1 - x0 + 1; }
  int ny() const { return y1 - y0 + 1; }
  int count() const { return nx() * ny(); }
  bool contains(int cx, int cy) const { return cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1; }
  bool operator==(const CellRange&) const = default;
  auto operator<=>(const CellRange&) const = default;
};

struct BlockId {
  int n = 0;  // coarse slab
  int i = 0;  // coarse space cell
  bool operator==(const BlockId&) const = default;
};

struct Region {
  CellRange cells;
  int k0 = 0, k1 = 0;  // inclusive slab range, window (t_k0, t_{k1+1}]
  std::vector<int> space_cells(int nxc) const;
  int slabs() const { return k1 - k0 + 1; }
};

struct SpaceTimeGrid {
  SpaceGrid coarse, fine;
  TimeGrid coarseTime, fineTime;
  int rx = 1, ry = 1, rt = 1;

  int blocks() const { return coarse.cells() * coarseTime.nt; }
  int block_index(BlockId b) const { return b.n * coarse.cells() + b.i; }
  BlockId block_id(int b) const { return {b / coarse.cells(), b % coarse.cells()}; }
  // Coarse block containing fine cell (ix, iy) in fine interval it.
  BlockId block_of(int ix, int iy, int it) const {
    return {it / rt, coarse.cell(ix / rx, iy / ry)};
  }
  int nearest_level(double t) const;
};

SpaceTimeGrid build_grid(int nxc, int nyc, int ntc, int rx, int ry, int rt, Rect domain, double T);

CellRange oversample_space(const SpaceTimeGrid& g, int i, int layers);
std::pair<int, int> oversample_time(const SpaceTimeGrid& g, int n, int M);
Region oversample(const SpaceTimeGrid& g, BlockId b, int layersX, int M);

}  // namespace stnlmc
