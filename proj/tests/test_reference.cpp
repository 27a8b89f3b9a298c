#include <doctest.h>

#include "stnlmc/experiment.hpp"

#include <cmath>

using namespace stnlmc;

namespace {

double l2(const NodalField& u) {
  double s = 0.0;
  for (double v : u.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("reference: zero source gives the zero solution") {
  const auto g = build_grid(2, 2, 2, 4, 4, 4, Rect{}, 1.0);
  const KappaGrid k(PermeabilityField(1.0), g);
  const auto ref = solve_reference(g, k, source_function("zero"));
  CHECK(l2(ref.u) == 0.0);
}

TEST_CASE("reference: linear in the source, zero on the boundary and at t = 0") {
  const auto g = build_grid(2, 2, 2, 4, 4, 4, Rect{}, 1.0);
  const KappaGrid k(PermeabilityField(1.0, {Channel{"c", {Box{0.2, 0.7, 0.4, 0.6, 0.0, 0.5}}, 100.0}}), g);
  const auto a = solve_reference(g, k, source_function("xyt"));
  const auto b = solve_reference(g, k, [](double x, double y, double t) { return 3.0 * x * y * t; });
  double diff = 0.0;
  for (std::size_t i = 0; i < a.u.data.size(); ++i) diff = std::max(diff, std::abs(3.0 * a.u.data[i] - b.u.data[i]));
  CHECK(diff <= 1e-12 * l2(b.u));
  CHECK(l2(a.u) > 0.0);
  for (int gx = 0; gx <= g.fine.nx; ++gx) {
    CHECK(a.u.at(gx, 0, 5) == 0.0);
    CHECK(a.u.at(gx, g.fine.ny, 7) == 0.0);
    CHECK(a.u.at(gx, 3, 0) == 0.0);
  }
}

TEST_CASE("reference: Crank-Nicolson converges at second order") {
  // u = t sin(pi x) sin(pi y), kappa = 1, dt proportional to h
  std::vector<double> err;
  for (int r : {4, 8, 16}) {
    const auto g = build_grid(1, 1, 1, r, r, r, Rect{}, 1.0);
    const KappaGrid k(PermeabilityField(1.0), g);
    const auto ref = solve_reference(g, k, source_function("manufactured"), 0.5);
    err.push_back(l2_error_exact(ref.u, manufactured_exact));
  }
  const double order = std::log2(err[1] / err[2]);
  CHECK(err[2] < err[1]);
  CHECK(err[1] < err[0]);
  CHECK(order >= 1.8);
}

TEST_CASE("reference: backward Euler is exact in time for a solution linear in t") {
  // only the spatial error and the source quadrature remain, so refining dt alone barely moves the error
  std::vector<double> err;
  for (int nt : {4, 16}) {
    const auto g = build_grid(1, 1, 1, 16, 16, nt, Rect{}, 1.0);
    const KappaGrid k(PermeabilityField(1.0), g);
    err.push_back(l2_error_exact(solve_reference(g, k, source_function("manufactured"), 1.0).u, manufactured_exact));
  }
  CHECK(err[0] > 0.0);
  CHECK(err[1] == doctest::Approx(err[0]).epsilon(1e-2));
}
