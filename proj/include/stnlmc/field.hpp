#pragma once

#include "stnlmc/grid.hpp"

#include <vector>

namespace stnlmc {

// Conforming nodal field: all fine vertices at all fine levels 0..nt.
struct NodalField {
  const SpaceTimeGrid* grid = nullptr;
  std::vector<double> data;  // level-major, vertices space-major within a level
  explicit NodalField(const SpaceTimeGrid& g);
  int vertices() const { return grid->fine.vertices(); }
  double& at(int gx, int gy, int L) { return data[static_cast<std::size_t>(L) * vertices() + grid->fine.vertex(gx, gy)]; }
  double at(int gx, int gy, int L) const {
    return data[static_cast<std::size_t>(L) * vertices() + grid->fine.vertex(gx, gy)];
  }
};

// Space-time field that is Q1 x P1 inside every coarse block and may jump across block faces:
// each block stores its own nodal values on its closure.
class BlockField {
public:
  explicit BlockField(const SpaceTimeGrid& g);
  static BlockField from_nodal(const NodalField& f);

  const SpaceTimeGrid& grid() const { return *grid_; }
  int nodes_per_block() const { return npb_; }
  double* block(int b) { return data_.data() + static_cast<std::size_t>(b) * npb_; }
  const double* block(int b) const { return data_.data() + static_cast<std::size_t>(b) * npb_; }
  int local(int lx, int ly, int lt) const { return (lt * (grid_->ry + 1) + ly) * (grid_->rx + 1) + lx; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // Values of fine cell (ix, iy, it): [tau*4 + corner].
  void cell_values(int ix, int iy, int it, double out[8]) const;
  // Spatial slice at fine level L: level L > 0 belongs to the slab ending at or after it; values on
  // coarse-cell interfaces are averaged over adjacent blocks.
  std::vector<double> slice(int L) const;

  BlockField& operator-=(const BlockField& o);
  BlockField& operator*=(double c);

private:
  const SpaceTimeGrid* grid_;
  int npb_;
  std::vector<double> data_;
};

}  // namespace stnlmc
