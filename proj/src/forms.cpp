#include "stnlmc/forms.hpp"

#include <stdexcept>
#include <string>

namespace stnlmc {

CellMatrices cell_matrices(const FormContext& ctx, int ix, int iy, int it) {
  const auto& g = *ctx.grid;
  const double hx = g.fine.hx(), hy = g.fine.hy();
  const double k = ctx.kappa->at(ix, iy, it);
  const auto tk = ctx.pou->tilde_kappa_gauss(ix, iy, it);
  std::array<double, 4> inv{};
  for (int q = 0; q < 4; ++q) {
    if (!(tk[q] > 0.0))
      throw std::runtime_error("kappa-tilde is not positive at a Gauss point of fine cell (" + std::to_string(ix) +
                               ", " + std::to_string(iy) + ", " + std::to_string(it) + ")");
    inv[q] = 1.0 / tk[q];
  }
  CellMatrices m;
  m.stiff = q1::weighted_stiffness(hx, hy, {k, k, k, k});
  m.mass = q1::weighted_mass(hx, hy, q1::kOnes);
  m.invMass = q1::weighted_mass(hx, hy, inv);
  m.wMass = q1::weighted_mass(hx, hy, tk);
  m.wLoad = q1::weighted_load(hx, hy, tk);
  return m;
}

TimeMatrices::TimeMatrices(double dt) {
  for (int a = 0; a < 2; ++a) {
    integral[a] = 0.5 * dt;
    for (int b = 0; b < 2; ++b) {
      mass[a][b] = dt / 6.0 * (a == b ? 2.0 : 1.0);
      deriv[a][b] = (b == 1 ? 0.5 : -0.5);
      stiff[a][b] = (a == b ? 1.0 : -1.0) / dt;
    }
  }
}

FineSpace::FineSpace(const SpaceTimeGrid& grid, Region region, Flavor flavor)
    : grid_(&grid), region_(region), flavor_(flavor) {
  const auto& c = region.cells;
  if (c.x0 < 0 || c.x1 >= grid.coarse.nx || c.y0 < 0 || c.y1 >= grid.coarse.ny || c.x1 < c.x0 || c.y1 < c.y0)
    throw std::invalid_argument("FineSpace: spatial set outside the coarse grid");
  if (region.k0 < 0 || region.k1 >= grid.coarseTime.nt || region.k1 < region.k0)
    throw std::invalid_argument("FineSpace: slab range outside the time grid");
  gx0_ = c.x0 * grid.rx;
  gx1_ = (c.x1 + 1) * grid.rx;
  gy0_ = c.y0 * grid.ry;
  gy1_ = (c.y1 + 1) * grid.ry;
  S_ = (gx1_ - gx0_ - 1) * (gy1_ - gy0_ - 1);
  const int slabs = region.slabs(), rt = grid.rt;
  switch (flavor) {
    case Flavor::Conforming: size_ = slabs * rt * S_; break;
    case Flavor::Broken: size_ = slabs * (rt + 1) * S_; break;
    case Flavor::SlabCausal: size_ = slabs * rt * S_; break;
  }
}

int FineSpace::level_base(int L, int it) const {
  const int rt = grid_->rt;
  const int Ls = region_.k0 * rt;
  switch (flavor_) {
    case Flavor::Conforming:
      if (L <= Ls) return -1;
      return (L - Ls - 1) * S_;
    case Flavor::Broken: {
      const int k = it / rt;
      return ((k - region_.k0) * (rt + 1) + (L - k * rt)) * S_;
    }
    case Flavor::SlabCausal: {
      const int k = it / rt;
      const int l = L - k * rt;
      if (l == 0) return -1;
      return ((k - region_.k0) * rt + l - 1) * S_;
    }
  }
  return -1;
}

int FineSpace::dof(int gx, int gy, int L, int it) const {
  const int s = node(gx, gy);
  if (s < 0) return -1;
  const int base = level_base(L, it);
  return base < 0 ? -1 : base + s;
}

namespace {

void check_same_region(const FineSpace& a, const FineSpace& b) {
  if (a.region().cells != b.region().cells || a.region().k0 != b.region().k0 || a.region().k1 != b.region().k1 ||
      &a.grid() != &b.grid())
    throw std::invalid_argument("form assembly: test and trial spaces live on different regions");
}

}  // namespace

SparseMatrix assemble(const FormContext& ctx, FormWeights w, const FineSpace& test, const FineSpace& trial) {
  check_same_region(test, trial);
  const auto& g = *ctx.grid;
  const TimeMatrices tm(g.fineTime.dt());
  std::vector<Triplet> trip;
  const std::size_t cells = static_cast<std::size_t>(trial.gx1() - trial.gx0()) * (trial.gy1() - trial.gy0()) *
                            (trial.end_interval() - trial.first_interval());
  trip.reserve(cells * 40);
  for (int it = trial.first_interval(); it < trial.end_interval(); ++it)
    for (int iy = trial.gy0(); iy < trial.gy1(); ++iy)
      for (int ix = trial.gx0(); ix < trial.gx1(); ++ix) {
        const CellMatrices cm = cell_matrices(ctx, ix, iy, it);
        int rdof[8], cdof[8];
        for (int tau = 0; tau < 2; ++tau)
          for (int c = 0; c < 4; ++c) {
            rdof[tau * 4 + c] = test.dof(ix + (c & 1), iy + (c >> 1), it + tau, it);
            cdof[tau * 4 + c] = trial.dof(ix + (c & 1), iy + (c >> 1), it + tau, it);
          }
        for (int ta = 0; ta < 2; ++ta)
          for (int a = 0; a < 4; ++a) {
            const int r = rdof[ta * 4 + a];
            if (r < 0) continue;
            for (int tb = 0; tb < 2; ++tb)
              for (int b = 0; b < 4; ++b) {
                const int col = cdof[tb * 4 + b];
                if (col < 0) continue;
                const int ab = a * 4 + b;
                const double v = w.a * tm.mass[ta][tb] * cm.stiff[ab] + w.b * tm.deriv[ta][tb] * cm.mass[ab] +
                                 w.e * tm.stiff[ta][tb] * cm.invMass[ab] + w.s * tm.mass[ta][tb] * cm.wMass[ab];
                if (v != 0.0) trip.emplace_back(r, col, v);
              }
          }
      }
  SparseMatrix A(test.size(), trial.size());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SparseMatrix assemble_a(const FormContext& ctx, const FineSpace& test, const FineSpace& trial) {
  return assemble(ctx, kFormA, test, trial);
}
SparseMatrix assemble_b(const FormContext& ctx, const FineSpace& test, const FineSpace& trial) {
  return assemble(ctx, kFormB, test, trial);
}
SparseMatrix assemble_e(const FormContext& ctx, const FineSpace& test, const FineSpace& trial) {
  return assemble(ctx, kFormE, test, trial);
}
SparseMatrix assemble_s(const FormContext& ctx, const FineSpace& test, const FineSpace& trial) {
  return assemble(ctx, kFormS, test, trial);
}

SparseMatrix assemble_s_aux(const FormContext& ctx, const std::vector<CellSetFunction>& fns, const FineSpace& trial) {
  const auto& g = *ctx.grid;
  const TimeMatrices tm(g.fineTime.dt());
  std::vector<Triplet> trip;
  for (std::size_t r = 0; r < fns.size(); ++r) {
    const auto& fn = fns[r];
    const int cx = fn.block.i % g.coarse.nx, cy = fn.block.i / g.coarse.nx;
    for (int l : *fn.cells) {
      const int ix = cx * g.rx + l % g.rx, iy = cy * g.ry + (l / g.rx) % g.ry;
      const int it = fn.block.n * g.rt + l / (g.rx * g.ry);
      if (it < trial.first_interval() || it >= trial.end_interval()) continue;
      const auto tk = ctx.pou->tilde_kappa_gauss(ix, iy, it);
      const auto load = q1::weighted_load(g.fine.hx(), g.fine.hy(), tk);
      for (int tau = 0; tau < 2; ++tau)
        for (int c = 0; c < 4; ++c) {
          const int col = trial.dof(ix + (c & 1), iy + (c >> 1), it + tau, it);
          if (col >= 0) trip.emplace_back(static_cast<int>(r), col, fn.value * tm.integral[tau] * load[c]);
        }
    }
  }
  SparseMatrix B(static_cast<int>(fns.size()), trial.size());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

Eigen::VectorXd rhs_f(const FormContext& ctx, const FineSpace& test, const SourceFn& f) {
  const auto& g = *ctx.grid;
  const double hx = g.fine.hx(), hy = g.fine.hy(), dt = g.fineTime.dt();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(test.size());
  const double w = 0.125 * hx * hy * dt;
  for (int it = test.first_interval(); it < test.end_interval(); ++it)
    for (int iy = test.gy0(); iy < test.gy1(); ++iy)
      for (int ix = test.gx0(); ix < test.gx1(); ++ix)
        for (int qt = 0; qt < 2; ++qt) {
          const double t = (it + kGauss01[qt]) * dt;
          for (int q = 0; q < 4; ++q) {
            const double xi = q1::gauss_xi(q), eta = q1::gauss_eta(q);
            const double fv = f(g.fine.domain.x0 + (ix + xi) * hx, g.fine.domain.y0 + (iy + eta) * hy, t);
            if (fv == 0.0) continue;
            for (int tau = 0; tau < 2; ++tau) {
              const double nt = tau ? kGauss01[qt] : 1.0 - kGauss01[qt];
              for (int c = 0; c < 4; ++c) {
                const int d = test.dof(ix + (c & 1), iy + (c >> 1), it + tau, it);
                if (d >= 0) r[d] += w * fv * nt * q1::N(c, xi, eta);
              }
            }
          }
        }
  return r;
}

double integrate_cells(const SpaceTimeGrid& g, BlockId block, const std::vector<int>& cells, const SourceFn& f) {
  const double hx = g.fine.hx(), hy = g.fine.hy(), dt = g.fineTime.dt();
  const int cx = block.i % g.coarse.nx, cy = block.i / g.coarse.nx;
  double s = 0.0;
  for (int l : cells) {
    const int ix = cx * g.rx + l % g.rx, iy = cy * g.ry + (l / g.rx) % g.ry;
    const int it = block.n * g.rt + l / (g.rx * g.ry);
    for (int qt = 0; qt < 2; ++qt)
      for (int q = 0; q < 4; ++q)
        s += f(g.fine.domain.x0 + (ix + q1::gauss_xi(q)) * hx, g.fine.domain.y0 + (iy + q1::gauss_eta(q)) * hy,
               (it + kGauss01[qt]) * dt);
  }
  return s * 0.125 * hx * hy * dt;
}

}  // namespace stnlmc
