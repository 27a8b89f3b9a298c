#include "stnlmc/reference.hpp"

#include <functional>
#include <map>
#include <stdexcept>

namespace stnlmc {

namespace {

// Interior vertex index of the full fine mesh, or -1 on the boundary.
struct InteriorNodes {
  int nx, ny;
  int operator()(int gx, int gy) const {
    if (gx <= 0 || gx >= nx || gy <= 0 || gy >= ny) return -1;
    return (gy - 1) * (nx - 1) + gx - 1;
  }
  int size() const { return (nx - 1) * (ny - 1); }
};

SparseMatrix spatial_matrix(const SpaceTimeGrid& g, const InteriorNodes& idx, const std::function<double(int, int)>& kap) {
  const auto K0 = q1::weighted_stiffness(g.fine.hx(), g.fine.hy(), q1::kOnes);
  const auto M0 = q1::weighted_mass(g.fine.hx(), g.fine.hy(), q1::kOnes);
  std::vector<Triplet> trip;
  for (int iy = 0; iy < g.fine.ny; ++iy)
    for (int ix = 0; ix < g.fine.nx; ++ix) {
      const double k = kap ? kap(ix, iy) : 0.0;
      for (int a = 0; a < 4; ++a) {
        const int r = idx(ix + (a & 1), iy + (a >> 1));
        if (r < 0) continue;
        for (int b = 0; b < 4; ++b) {
          const int c = idx(ix + (b & 1), iy + (b >> 1));
          if (c < 0) continue;
          trip.emplace_back(r, c, kap ? k * K0[a * 4 + b] : M0[a * 4 + b]);
        }
      }
    }
  SparseMatrix A(idx.size(), idx.size());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::VectorXd load(const SpaceTimeGrid& g, const InteriorNodes& idx, const SourceFn& f, double t) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(idx.size());
  const double hx = g.fine.hx(), hy = g.fine.hy(), w = 0.25 * hx * hy;
  for (int iy = 0; iy < g.fine.ny; ++iy)
    for (int ix = 0; ix < g.fine.nx; ++ix)
      for (int q = 0; q < 4; ++q) {
        const double xi = q1::gauss_xi(q), eta = q1::gauss_eta(q);
        const double fv = f(g.fine.domain.x0 + (ix + xi) * hx, g.fine.domain.y0 + (iy + eta) * hy, t);
        if (fv == 0.0) continue;
        for (int c = 0; c < 4; ++c) {
          const int d = idx(ix + (c & 1), iy + (c >> 1));
          if (d >= 0) r[d] += w * fv * q1::N(c, xi, eta);
        }
      }
  return r;
}

}  // namespace

ReferenceSolution solve_reference(const SpaceTimeGrid& g, const KappaGrid& kappa, const SourceFn& f, double theta) {
  if (!(theta >= 0.5 && theta <= 1.0)) throw std::invalid_argument("solve_reference: theta must lie in [0.5, 1]");
  const InteriorNodes idx{g.fine.nx, g.fine.ny};
  const double dt = g.fineTime.dt();
  const SparseMatrix M = spatial_matrix(g, idx, {});
  ReferenceSolution sol{NodalField(g), theta, 0};
  const auto& kv = kappa.values();
  sol.fieldHash = std::hash<std::string_view>{}(
      std::string_view(reinterpret_cast<const char*>(kv.data()), kv.size() * sizeof(double)));

  struct Step {
    SparseMatrix A;
    std::unique_ptr<Factorization> F;
  };
  std::map<std::vector<double>, std::shared_ptr<Step>> steps;
  const std::size_t layer = static_cast<std::size_t>(g.fine.nx) * g.fine.ny;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(idx.size());
  Eigen::VectorXd Fk = load(g, idx, f, 0.0);
  for (int k = 0; k < g.fineTime.nt; ++k) {
    std::vector<double> key(kv.begin() + k * layer, kv.begin() + (k + 1) * layer);
    auto it = steps.find(key);
    if (it == steps.end()) {
      auto st = std::make_shared<Step>();
      st->A = spatial_matrix(g, idx, [&](int ix, int iy) { return kappa.at(ix, iy, k); });
      const SparseMatrix L = SparseMatrix(M / dt) + theta * st->A;
      st->F = factorize(L);
      if (steps.size() > 8) steps.clear();
      it = steps.emplace(std::move(key), st).first;
    }
    const Eigen::VectorXd Fk1 = load(g, idx, f, g.fineTime.t(k + 1));
    const Eigen::VectorXd rhs = M * u / dt - (1.0 - theta) * (it->second->A * u) + theta * Fk1 + (1.0 - theta) * Fk;
    u = it->second->F->solve(rhs);
    Fk = Fk1;
    for (int gy = 1; gy < g.fine.ny; ++gy)
      for (int gx = 1; gx < g.fine.nx; ++gx) sol.u.at(gx, gy, k + 1) = u[idx(gx, gy)];
  }
  return sol;
}

}  // namespace stnlmc
