#include <doctest.h>

#include "stnlmc/experiment.hpp"

#include <random>

using namespace stnlmc;

namespace {

Region whole(const SpaceTimeGrid& g) { return Region{CellRange{0, g.coarse.nx - 1, 0, g.coarse.ny - 1}, 0, g.coarseTime.nt - 1}; }

Eigen::VectorXd random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
}

}  // namespace

TEST_CASE("forms: single interior node on a 2x2 mesh") {
  // h = 1/2, dt = 1/8, kappa = 1
  auto p = make_problem(build_grid(1, 1, 1, 2, 2, 8, Rect{}, 1.0), PermeabilityField(1.0), PouMode::Bilinear,
                        PouFreeze::FineInterval, source_function("xyt"));
  const FineSpace V(p->grid, whole(p->grid), Flavor::Conforming);
  REQUIRE(V.spatial_size() == 1);
  REQUIRE(V.size() == 8);
  const SparseMatrix A = assemble_a(p->ctx, V, V);
  // spatial stiffness 4 * 2/3 times temporal hat mass 2 dt / 3
  CHECK(A.coeff(0, 0) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(A.coeff(7, 7) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  CHECK(A.coeff(1, 0) == doctest::Approx(8.0 / 3.0 * (1.0 / 48.0)).epsilon(1e-14));
  const SparseMatrix B = assemble_b(p->ctx, V, V);
  // temporal factor +-1/2 times the nodal mass 4 * (1/4) / 9
  CHECK(B.coeff(0, 1) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
  CHECK(B.coeff(1, 0) == doctest::Approx(-1.0 / 18.0).epsilon(1e-14));
  CHECK(B.coeff(0, 0) == doctest::Approx(0.0).scale(1.0));
  const Eigen::VectorXd load = rhs_f(p->ctx, V, [](double, double, double) { return 1.0; });
  CHECK(load[0] == doctest::Approx(0.25 * 0.125).epsilon(1e-14));
  CHECK(load[7] == doctest::Approx(0.25 * 0.0625).epsilon(1e-14));
}

TEST_CASE("forms: integral of the source over a block") {
  const auto g = build_grid(1, 1, 1, 4, 4, 4, Rect{}, 1.0);
  std::vector<int> all(4 * 4 * 4);
  for (int c = 0; c < static_cast<int>(all.size()); ++c) all[c] = c;
  CHECK(integrate_cells(g, BlockId{0, 0}, all, source_function("xyt")) == doctest::Approx(0.125).epsilon(1e-14));
  const auto g2 = build_grid(2, 2, 2, 2, 2, 2, Rect{}, 2.0);
  std::vector<int> cells(8);
  for (int c = 0; c < 8; ++c) cells[c] = c;
  // block (n=1, i=3): x, y in [1/2, 1], t in [1, 2]: (3/8)(3/8)(3/2)
  CHECK(integrate_cells(g2, BlockId{1, 3}, cells, source_function("xyt")) ==
        doctest::Approx(0.375 * 0.375 * 1.5).epsilon(1e-14));
}

TEST_CASE("forms: algebraic properties on a channelized medium") {
  auto p = make_problem(build_grid(3, 3, 2, 3, 3, 3, Rect{}, 1.0),
                        PermeabilityField(1.0, {Channel{"c", {Box{0.2, 0.8, 0.45, 0.55, 0.0, 0.6}}, 1000.0}}),
                        PouMode::Bilinear, PouFreeze::FineInterval, source_function("xyt"));
  const FineSpace V(p->grid, whole(p->grid), Flavor::Conforming);
  const SparseMatrix A = assemble_a(p->ctx, V, V), B = assemble_b(p->ctx, V, V), E = assemble_e(p->ctx, V, V),
                     S = assemble_s(p->ctx, V, V);
  std::mt19937 rng(11);

  SUBCASE("a, e, s are symmetric") {
    CHECK((Eigen::MatrixXd(A) - Eigen::MatrixXd(A).transpose()).norm() < 1e-12 * Eigen::MatrixXd(A).norm());
    CHECK((Eigen::MatrixXd(E) - Eigen::MatrixXd(E).transpose()).norm() < 1e-12 * Eigen::MatrixXd(E).norm());
    CHECK((Eigen::MatrixXd(S) - Eigen::MatrixXd(S).transpose()).norm() < 1e-12 * Eigen::MatrixXd(S).norm());
  }
  SUBCASE("b is antisymmetric on functions vanishing at both window ends") {
    for (int r = 0; r < 10; ++r) {
      Eigen::VectorXd v = random_vector(V.size(), rng), w = random_vector(V.size(), rng);
      v.tail(V.spatial_size()).setZero();
      w.tail(V.spatial_size()).setZero();
      const double bvw = w.dot(B * v), bwv = v.dot(B * w);
      CHECK(std::abs(bvw + bwv) <= 1e-12 * (std::abs(bvw) + 1.0));
    }
  }
  SUBCASE("b(u,u) is half the squared final-time L2 norm") {
    for (int r = 0; r < 5; ++r) {
      const Eigen::VectorXd v = random_vector(V.size(), rng);
      // final level values only: a field on the last fine interval that is zero at its start
      const auto& g = p->grid;
      const int L = g.fineTime.nt;
      NodalField nf(g);
      for (int gy = 1; gy < g.fine.ny; ++gy)
        for (int gx = 1; gx < g.fine.nx; ++gx) nf.at(gx, gy, L) = v[V.dof(gx, gy, L, L - 1)];
      const BlockField last = BlockField::from_nodal(nf);
      // L2 norm over the last interval of tau * u_T is dt/3 |u_T|^2
      const double uT2 = norm2(p->ctx, last, NormKind::L2) * 3.0 / g.fineTime.dt();
      CHECK(v.dot(B * v) == doctest::Approx(0.5 * uT2).epsilon(1e-12));
    }
  }
  SUBCASE("combined weights reproduce the sum of forms") {
    const SparseMatrix D = assemble(p->ctx, kFormD, V, V);
    CHECK((Eigen::MatrixXd(D) - Eigen::MatrixXd(A + B + E)).norm() < 1e-12 * Eigen::MatrixXd(D).norm());
  }
  SUBCASE("forms agree with the field norms") {
    const Eigen::VectorXd v = random_vector(V.size(), rng);
    NodalField nf(p->grid);
    const auto& g = p->grid;
    for (int L = 1; L <= g.fineTime.nt; ++L)
      for (int gy = 1; gy < g.fine.ny; ++gy)
        for (int gx = 1; gx < g.fine.nx; ++gx) nf.at(gx, gy, L) = v[V.dof(gx, gy, L, L - 1)];
    const BlockField f = BlockField::from_nodal(nf);
    CHECK(v.dot(A * v) == doctest::Approx(norm2(p->ctx, f, NormKind::W)).epsilon(1e-12));
    CHECK(v.dot(E * v) == doctest::Approx(norm2(p->ctx, f, NormKind::E)).epsilon(1e-12));
    CHECK(v.dot(S * v) == doctest::Approx(norm2(p->ctx, f, NormKind::S)).epsilon(1e-12));
  }
}

TEST_CASE("forms: space sizes and dof maps") {
  const auto g = build_grid(4, 4, 3, 2, 2, 2, Rect{}, 1.0);
  const Region r{CellRange{1, 2, 1, 3}, 1, 2};
  const FineSpace conf(g, r, Flavor::Conforming), broken(g, r, Flavor::Broken), causal(g, r, Flavor::SlabCausal);
  CHECK(conf.spatial_size() == 3 * 5);
  CHECK(conf.size() == 2 * 2 * 15);
  CHECK(broken.size() == 2 * 3 * 15);
  CHECK(causal.size() == 2 * 2 * 15);
  // window start level is excluded from the conforming space
  CHECK(conf.dof(3, 3, 2, 2) < 0);
  CHECK(conf.dof(3, 3, 3, 2) == 0 * 15 + conf.node(3, 3));
  // the slab interface level 4 is shared in the conforming space and duplicated in the broken one
  CHECK(conf.dof(3, 3, 4, 3) == conf.dof(3, 3, 4, 4));
  CHECK(broken.dof(3, 3, 4, 3) != broken.dof(3, 3, 4, 4));
  CHECK(causal.dof(3, 3, 4, 4) < 0);
  CHECK(causal.dof(3, 3, 4, 3) >= 0);
  CHECK(conf.node(2, 3) < 0);  // lateral boundary
}
