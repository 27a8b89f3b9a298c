#include "stnlmc/field.hpp"

#include <stdexcept>

namespace stnlmc {

NodalField::NodalField(const SpaceTimeGrid& g)
    : grid(&g), data(static_cast<std::size_t>(g.fine.vertices()) * (g.fineTime.nt + 1), 0.0) {}

BlockField::BlockField(const SpaceTimeGrid& g)
    : grid_(&g), npb_((g.rx + 1) * (g.ry + 1) * (g.rt + 1)),
      data_(static_cast<std::size_t>(g.blocks()) * npb_, 0.0) {}

BlockField BlockField::from_nodal(const NodalField& f) {
  const auto& g = *f.grid;
  BlockField out(g);
  for (int b = 0; b < g.blocks(); ++b) {
    const BlockId id = g.block_id(b);
    const int cx = id.i % g.coarse.nx, cy = id.i / g.coarse.nx;
    double* d = out.block(b);
    for (int lt = 0; lt <= g.rt; ++lt)
      for (int ly = 0; ly <= g.ry; ++ly)
        for (int lx = 0; lx <= g.rx; ++lx)
          d[out.local(lx, ly, lt)] = f.at(cx * g.rx + lx, cy * g.ry + ly, id.n * g.rt + lt);
  }
  return out;
}

void BlockField::cell_values(int ix, int iy, int it, double out[8]) const {
  const auto& g = *grid_;
  const BlockId id = g.block_of(ix, iy, it);
  const double* d = block(g.block_index(id));
  const int lx = ix % g.rx, ly = iy % g.ry, lt = it % g.rt;
  for (int tau = 0; tau < 2; ++tau)
    for (int c = 0; c < 4; ++c) out[tau * 4 + c] = d[local(lx + (c & 1), ly + (c >> 1), lt + tau)];
}

std::vector<double> BlockField::slice(int L) const {
  const auto& g = *grid_;
  if (L < 0 || L > g.fineTime.nt) throw std::out_of_range("BlockField::slice: level");
  const int n = L == 0 ? 0 : (L - 1) / g.rt;
  const int lt = L - n * g.rt;
  std::vector<double> sum(g.fine.vertices(), 0.0), cnt(g.fine.vertices(), 0.0);
  for (int i = 0; i < g.coarse.cells(); ++i) {
    const int cx = i % g.coarse.nx, cy = i / g.coarse.nx;
    const double* d = block(g.block_index({n, i}));
    for (int ly = 0; ly <= g.ry; ++ly)
      for (int lx = 0; lx <= g.rx; ++lx) {
        const int v = g.fine.vertex(cx * g.rx + lx, cy * g.ry + ly);
        sum[v] += d[local(lx, ly, lt)];
        cnt[v] += 1.0;
      }
  }
  for (std::size_t v = 0; v < sum.size(); ++v) sum[v] /= cnt[v];
  return sum;
}

BlockField& BlockField::operator-=(const BlockField& o) {
  if (o.data_.size() != data_.size()) throw std::invalid_argument("BlockField: size mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

BlockField& BlockField::operator*=(double c) {
  for (double& v : data_) v *= c;
  return *this;
}

}  // namespace stnlmc
