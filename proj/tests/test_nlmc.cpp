#include <doctest.h>

#include "stnlmc/experiment.hpp"

#include <cmath>
#include <random>

using namespace stnlmc;

namespace {

const std::vector<Channel> kBar = {Channel{"bar", {Box{0.3, 0.7, 0.5, 0.6, 0.0, 0.4}}, 1000.0},
                                   Channel{"post", {Box{0.1, 0.2, 0.1, 0.6, 0.3, 1.0}}, 500.0}};

std::unique_ptr<Problem> problem(int nc, int nt, int r, int rt, std::vector<Channel> ch = kBar,
                                 const std::string& f = "xyt") {
  return make_problem(build_grid(nc, nc, nt, r, r, rt, Rect{}, 1.0), PermeabilityField(1.0, std::move(ch)),
                      PouMode::Bilinear, PouFreeze::FineInterval, source_function(f));
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

double rel_v(const FormContext& ctx, const BlockField& a, const BlockField& b) {
  BlockField d = a;
  d -= b;
  return std::sqrt(norm2(ctx, d, NormKind::V) / norm2(ctx, b, NormKind::V));
}

}  // namespace

TEST_CASE("nlmc: auxiliary basis on the first experiment's medium") {
  auto p = make_problem(preset("exp1"));
  const AuxiliaryBasis aux(p->ctx);
  const auto& g = p->grid;
  // the channel crosses coarse cells 3 and 4 of row 4 during slabs 0..9
  CHECK(aux.size() == 640 + 20);
  CHECK(aux.count(g.block_index({0, g.coarse.cell(3, 4)})) == 2);
  CHECK(aux.count(g.block_index({7, g.coarse.cell(4, 4)})) == 2);
  CHECK(aux.count(g.block_index({0, g.coarse.cell(0, 0)})) == 1);
  const int d = aux.dof(g.block_index({0, g.coarse.cell(3, 4)}), 0);
  CHECK(aux.continuum(d).kind == Continuum::Kind::Matrix);
  CHECK(aux.continuum(d + 1).kind == Continuum::Kind::Channel);
  // constant one pairs to one against every normalized psi
  BlockField one(g);
  for (double& v : one.data()) v = 1.0;
  const Eigen::VectorXd s = pair_aux(aux, one);
  CHECK((s - Eigen::VectorXd::Ones(aux.size())).lpNorm<Eigen::Infinity>() < 1e-12);
  const auto offs = aux.slab_offsets();
  CHECK(offs.size() == 11u);
  CHECK(offs.back() == aux.size());
}

TEST_CASE("nlmc: homogeneous block normalization") {
  auto p = problem(2, 1, 4, 2, {});
  const AuxiliaryBasis aux(p->ctx);
  REQUIRE(aux.size() == 4);
  // kappa-tilde integral over a block of side H = 1/2 and duration 1: (2/H^2)(4/3) H^2 = 8/3
  for (int j = 0; j < 4; ++j) CHECK(aux.psi_value(j) == doctest::Approx(3.0 / 8.0).epsilon(1e-13));
}

TEST_CASE("nlmc: projection onto the auxiliary space") {
  auto p = problem(4, 3, 4, 2);
  const AuxiliaryBasis aux(p->ctx);
  const auto& g = p->grid;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  SUBCASE("idempotent on piecewise constants of single-continuum blocks") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(aux.size());
    BlockField v(g);
    for (int b = 0; b < g.blocks(); ++b) {
      if (aux.count(b) != 1) continue;
      const int j = aux.dof(b, 0);
      c[j] = u(rng);
      double* d = v.block(b);
      for (int k = 0; k < v.nodes_per_block(); ++k) d[k] = c[j] * aux.psi_value(j);
    }
    CHECK((project_aux(aux, v) - c).lpNorm<Eigen::Infinity>() < 1e-12 * c.lpNorm<Eigen::Infinity>());
  }
  SUBCASE("residual is s-orthogonal to every psi for random fields") {
    const FineSpace V(g, Region{CellRange{0, 3, 0, 3}, 0, 2}, Flavor::Conforming);
    std::vector<CellSetFunction> fns;
    for (int j = 0; j < aux.size(); ++j) fns.push_back(aux.function(j));
    const SparseMatrix P = assemble_s_aux(p->ctx, fns, V);
    for (int r = 0; r < 10; ++r) {
      const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(V.size(), [&] { return u(rng); });
      NodalField nf(g);
      for (int L = 1; L <= g.fineTime.nt; ++L)
        for (int gy = 1; gy < g.fine.ny; ++gy)
          for (int gx = 1; gx < g.fine.nx; ++gx) nf.at(gx, gy, L) = x[V.dof(gx, gy, L, L - 1)];
      const Eigen::VectorXd c = project_aux(aux, BlockField::from_nodal(nf));
      const Eigen::VectorXd sv = P * x;  // s(v, psi_j) by assembly
      for (int j = 0; j < aux.size(); ++j) {
        const double spi = c[j] * aux.psi_value(j);  // s(pi v, psi_j)
        CHECK(std::abs(sv[j] - spi) <= 1e-12 * (std::abs(sv[j]) + 1e-3));
      }
    }
  }
}

TEST_CASE("nlmc: local basis sets") {
  auto p = problem(4, 3, 4, 2);
  const AuxiliaryBasis aux(p->ctx);
  const auto& g = p->grid;
  const LocalBasisSet set = solve_local(aux, BlockId{2, g.coarse.cell(1, 2)}, 1, 1);
  CHECK(set.region.k0 == 1);
  CHECK(set.region.cells == CellRange{0, 2, 1, 3});
  CHECK(set.dofs.size() == aux.dofs_in(set.region.cells, 1).size() + aux.dofs_in(set.region.cells, 2).size());
  CHECK(constraint_residual(aux, set) <= 1e-10);
}

TEST_CASE("nlmc: coarse solve and structure") {
  auto p = problem(4, 4, 4, 2);
  const AuxiliaryBasis aux(p->ctx);
  const Eigen::VectorXd b = coarse_rhs(aux, p->f);
  for (int M : {0, 1, 2}) {
    const LocalizedOptions opt{1, M, 1};
    const CoarseSystem cs = assemble_coarse_localized(aux, b, opt);
    const StructureCheck sc = check_coarse_structure(cs, aux);
    CHECK(sc.causal);
    CHECK(sc.banded);
    CHECK(sc.entries > 0);
    const Eigen::VectorXd U = solve_coarse(cs), Um = solve_coarse_monolithic(cs);
    CHECK(rel(U, Um) <= 1e-12);
  }
  SUBCASE("zero source gives zero coarse solution and field") {
    const Eigen::VectorXd z = coarse_rhs(aux, source_function("zero"));
    CHECK(z.norm() == 0.0);
    const LocalizedOptions opt{1, 1, 1};
    const Eigen::VectorXd U = solve_coarse(assemble_coarse_localized(aux, z, opt));
    CHECK(U.norm() == 0.0);
    const BlockField u = downscale_localized(aux, U, opt);
    CHECK(norm2(p->ctx, u, NormKind::L2) == 0.0);
  }
  SUBCASE("the source integrates to 1/8 against the constant") {
    double s = 0.0;
    for (int j = 0; j < aux.size(); ++j) s += b[j] * aux.measure(j);
    CHECK(s == doctest::Approx(0.125).epsilon(1e-13));
  }
}

TEST_CASE("nlmc: explicit basis columns agree with the marching pipeline") {
  auto p = problem(4, 3, 2, 2);
  const AuxiliaryBasis aux(p->ctx);
  const auto& g = p->grid;
  const Eigen::VectorXd b = coarse_rhs(aux, p->f);
  for (auto [lx, M] : {std::pair{1, 1}, std::pair{2, 0}}) {
    std::vector<LocalBasisSet> sets;
    double res = 0.0;
    for (int n = 0; n < g.coarseTime.nt; ++n)
      for (int i = 0; i < g.coarse.cells(); ++i) {
        sets.push_back(solve_local(aux, BlockId{n, i}, lx, M));
        res = std::max(res, constraint_residual(aux, sets.back()));
      }
    CHECK(res <= 1e-10);
    const CoarseSystem explicitCs = assemble_coarse(aux, sets, b, M);
    const LocalizedOptions opt{lx, M, 1};
    LocalizedStats st;
    const CoarseSystem marchCs = assemble_coarse_localized(aux, b, opt, &st);
    CHECK(Eigen::MatrixXd(explicitCs.A - marchCs.A).norm() <= 1e-11 * Eigen::MatrixXd(marchCs.A).norm());
    const Eigen::VectorXd U = solve_coarse(marchCs);
    const BlockField u1 = downscale(aux, sets, U), u2 = downscale_localized(aux, U, opt, &st);
    CHECK(rel_v(p->ctx, u1, u2) <= 1e-10);
    CHECK(st.maxConstraintResidual <= 1e-10);
  }
}

TEST_CASE("nlmc: full-domain oversampling reproduces the global method") {
  auto p = problem(4, 3, 4, 2);
  const AuxiliaryBasis aux(p->ctx);
  const Eigen::VectorXd b = coarse_rhs(aux, p->f);
  const GlobalSolution glo = solve_global_field(aux, b);
  const LocalizedOptions opt{4, 3, 1};
  const Eigen::VectorXd U = solve_coarse(assemble_coarse_localized(aux, b, opt));
  CHECK(rel(U, glo.U) <= 1e-9);
  CHECK(rel_v(p->ctx, downscale_localized(aux, U, opt), glo.field) <= 1e-8);

  SUBCASE("explicit global columns") {
    const LocalBasisSet all = solve_global(aux);
    CHECK(constraint_residual(aux, all) <= 1e-10);
    CHECK(static_cast<int>(all.dofs.size()) == aux.size());
    // global coarse matrix from the multiplier columns solves to the same coefficients
    Eigen::MatrixXd A(aux.size(), aux.size());
    for (int r = 0; r < aux.size(); ++r)
      for (int c = 0; c < aux.size(); ++c) A(r, c) = all.lambda(r, c) * aux.psi_value(r);
    CHECK(rel(A.lu().solve(b), glo.U) <= 1e-9);
  }
}

TEST_CASE("nlmc: global solve memory guard") {
  auto p = problem(4, 3, 4, 2);
  const AuxiliaryBasis aux(p->ctx);
  CHECK_THROWS(solve_global(aux, 1000));
}

TEST_CASE("nlmc: spatial decay of a basis column in a homogeneous medium") {
  auto p = problem(9, 1, 4, 2, {});
  const AuxiliaryBasis aux(p->ctx);
  const auto e = spatial_decay(aux, BlockId{0, p->grid.coarse.cell(4, 4)}, 4);
  REQUIRE(e.size() == 5u);
  for (std::size_t k = 1; k + 1 < e.size(); ++k) CHECK(e[k + 1] < e[k]);
  const LogLinearFit fit = fit_log_linear(e, 1);
  CHECK(fit.slope < 0.0);
  CHECK(fit.r2 >= 0.9);
}
