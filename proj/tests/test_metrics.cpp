#include <doctest.h>

#include "stnlmc/experiment.hpp"

#include <cmath>
#include <random>

using namespace stnlmc;

namespace {

std::unique_ptr<Problem> small_problem(std::vector<Channel> channels = {}) {
  return make_problem(build_grid(2, 2, 2, 4, 4, 3, Rect{}, 1.0), PermeabilityField(1.0, std::move(channels)),
                      PouMode::Bilinear, PouFreeze::FineInterval, source_function("xyt"));
}

BlockField nodal_function(const SpaceTimeGrid& g, double (*fn)(double, double, double)) {
  NodalField u(g);
  for (int L = 0; L <= g.fineTime.nt; ++L)
    for (int gy = 0; gy <= g.fine.ny; ++gy)
      for (int gx = 0; gx <= g.fine.nx; ++gx) u.at(gx, gy, L) = fn(g.fine.x(gx), g.fine.y(gy), g.fineTime.t(L));
  return BlockField::from_nodal(u);
}

}  // namespace

TEST_CASE("metrics: V norm splits into W and time-derivative parts") {
  auto p = small_problem({Channel{"c", {Box{0.3, 0.6, 0.4, 0.55, 0.0, 0.7}}, 500.0}});
  BlockField f(p->grid);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : f.data()) v = u(rng);
  const double V = norm2(p->ctx, f, NormKind::V), W = norm2(p->ctx, f, NormKind::W), E = norm2(p->ctx, f, NormKind::E);
  CHECK(V == doctest::Approx(W + E).epsilon(1e-13));
  CHECK(W > 0.0);
  CHECK(E > 0.0);
}

TEST_CASE("metrics: norms of simple fields") {
  SUBCASE("constant one has unit L2 norm and no gradient") {
    auto p = small_problem();
    BlockField one(p->grid);
    for (double& v : one.data()) v = 1.0;
    CHECK(norm2(p->ctx, one, NormKind::L2) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(norm2(p->ctx, one, NormKind::W) == doctest::Approx(0.0));
    CHECK(norm2(p->ctx, one, NormKind::E) == doctest::Approx(0.0));
  }
  SUBCASE("u = x has W energy equal to the integral of kappa") {
    auto p = small_problem({Channel{"c", {Box{0.25, 0.5, 0.0, 1.0, 0.0, 0.5}}, 9.0}});
    const auto& g = p->grid;
    const BlockField x = nodal_function(g, [](double x, double, double) { return x; });
    double intKappa = 0.0;
    const double vol = g.fine.hx() * g.fine.hy() * g.fineTime.dt();
    for (int it = 0; it < g.fineTime.nt; ++it)
      for (int iy = 0; iy < g.fine.ny; ++iy)
        for (int ix = 0; ix < g.fine.nx; ++ix) intKappa += p->kappa->at(ix, iy, it) * vol;
    CHECK(norm2(p->ctx, x, NormKind::W) == doctest::Approx(intKappa).epsilon(1e-12));
    CHECK(intKappa == doctest::Approx(1.0 + 8.0 * 0.25 * 0.5).epsilon(1e-12));
  }
  SUBCASE("u = x*y*t in L2") {
    auto p = small_problem();
    const BlockField f = nodal_function(p->grid, [](double x, double y, double t) { return x * y * t; });
    // Q1 x P1 interpolant of a multilinear function is exact; integral of (xyt)^2 = 1/27
    CHECK(norm2(p->ctx, f, NormKind::L2) == doctest::Approx(1.0 / 27.0).epsilon(1e-12));
  }
}

TEST_CASE("metrics: relative errors") {
  auto p = small_problem();
  const BlockField ref = nodal_function(p->grid, [](double x, double y, double t) { return x * (1 - x) * y * t; });
  const ErrorReport same = relative_errors(p->ctx, ref, ref);
  CHECK(same.relL2 == doctest::Approx(0.0));
  CHECK(same.relH1k == doctest::Approx(0.0));
  const ErrorReport zero = relative_errors(p->ctx, ref, BlockField(p->grid));
  CHECK(zero.relL2 == doctest::Approx(100.0));
  CHECK(zero.relH1k == doctest::Approx(100.0));
  BlockField half = ref;
  half *= 0.5;
  const ErrorReport h = relative_errors(p->ctx, ref, half, true);
  CHECK(h.relL2 == doctest::Approx(50.0));
  CHECK(h.relH1k == doctest::Approx(50.0));
}

TEST_CASE("metrics: log-linear fit") {
  std::vector<double> v;
  for (int k = 0; k < 6; ++k) v.push_back(3.0 * std::exp(-0.7 * k));
  v[0] = 100.0;  // excluded by first = 1
  const LogLinearFit fit = fit_log_linear(v, 1);
  CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  const LogLinearFit noisy = fit_log_linear({1.0, 0.3, 0.2, 0.02, 0.01}, 0);
  CHECK(noisy.slope < 0.0);
  CHECK(noisy.r2 < 1.0);
}
