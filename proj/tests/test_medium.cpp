#include <doctest.h>

#include "stnlmc/experiment.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace stnlmc;

TEST_CASE("medium: permeability field lookup") {
  const PermeabilityField field(1.0, {Channel{"a", {Box{0.2, 0.4, 0.0, 1.0, 0.0, 0.5}}, 100.0},
                                      Channel{"b", {Box{0.3, 0.6, 0.4, 0.6, 0.0, 1.0}}, 1000.0}});
  CHECK(field.value_at(0.1, 0.5, 0.2) == 1.0);
  CHECK(field.value_at(0.25, 0.1, 0.2) == 100.0);
  CHECK(field.value_at(0.35, 0.5, 0.2) == 1000.0);  // later channel wins on overlap
  CHECK(field.value_at(0.25, 0.1, 0.7) == 1.0);
  CHECK(field.value_at(0.2, 0.1, 0.5) == 100.0);  // boxes are closed
  CHECK(field.kappa_min() == 1.0);
  CHECK(field.kappa_max() == 1000.0);
  CHECK_THROWS_AS(PermeabilityField(0.0), std::invalid_argument);
  CHECK_THROWS_AS(PermeabilityField(1.0, {Channel{"bad", {Box{0.5, 0.4, 0, 1, 0, 1}}, 10.0}}), std::invalid_argument);
}

TEST_CASE("medium: kappa sampled at fine cell midpoints") {
  const auto g = build_grid(2, 2, 1, 4, 4, 4, Rect{}, 1.0);
  const PermeabilityField field(2.0, {Channel{"c", {Box{0.0, 0.25, 0.0, 0.125, 0.0, 0.5}}, 50.0}});
  const KappaGrid k(field, g);
  CHECK(k.at(0, 0, 0) == 50.0);
  CHECK(k.at(1, 0, 1) == 50.0);
  CHECK(k.at(2, 0, 0) == 2.0);
  CHECK(k.at(0, 1, 0) == 2.0);
  CHECK(k.at(0, 0, 2) == 2.0);
  CHECK(k.is_channel(0, 0, 0));
  CHECK_FALSE(k.is_channel(0, 0, 3));
}

TEST_CASE("medium: bilinear partition of unity and kappa tilde") {
  const double H = 1.0 / 8;
  const auto g = build_grid(8, 8, 1, 2, 2, 1, Rect{}, 1.0);
  const KappaGrid k(PermeabilityField(1.0), g);
  const PartitionOfUnity pou(k, PouMode::Bilinear);
  // Sum of |grad chi|^2 of the four hats on a cell at reference point (x, y)
  auto oracle = [&](double x, double y) { return 2.0 / (H * H) * ((1 - x) * (1 - x) + x * x + (1 - y) * (1 - y) + y * y); };
  // Coarse cell centre is the upper corner of its first fine cell
  CHECK(pou.tilde_kappa_at(2, 2, 0, 1.0, 1.0) == doctest::Approx(128.0).epsilon(1e-13));
  CHECK(pou.tilde_kappa_at(2, 2, 0, 0.0, 0.0) == doctest::Approx(256.0).epsilon(1e-13));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    const int ix = static_cast<int>(rng() % 16), iy = static_cast<int>(rng() % 16);
    const double xi = u(rng), eta = u(rng);
    const double x = ((ix % 2) + xi) / 2.0, y = ((iy % 2) + eta) / 2.0;
    CHECK(pou.grad_sq_sum(ix, iy, 0, xi, eta) == doctest::Approx(oracle(x, y)).epsilon(1e-12));
    const auto e = pou.eval(ix, iy, 0, xi, eta);
    double sum = 0.0, gx = 0.0, gy = 0.0;
    for (int c = 0; c < 4; ++c) {
      sum += e.value[c];
      gx += e.grad[c][0];
      gy += e.grad[c][1];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(gx) < 1e-12);
    CHECK(std::abs(gy) < 1e-12);
  }
}

TEST_CASE("medium: multiscale partition of unity") {
  SUBCASE("equals the bilinear one for constant permeability") {
    const auto g = build_grid(3, 3, 2, 6, 6, 2, Rect{}, 1.0);
    const KappaGrid k(PermeabilityField(5.0), g);
    const PartitionOfUnity bil(k, PouMode::Bilinear), ms(k, PouMode::Multiscale);
    for (int it = 0; it < g.fineTime.nt; ++it)
      for (int iy = 0; iy < g.fine.ny; iy += 2)
        for (int ix = 0; ix < g.fine.nx; ix += 3) {
          const auto a = bil.eval(ix, iy, it, 0.3, 0.8), b = ms.eval(ix, iy, it, 0.3, 0.8);
          for (int c = 0; c < 4; ++c) {
            CHECK(std::abs(a.value[c] - b.value[c]) < 1e-10);
            CHECK(std::abs(a.grad[c][0] - b.grad[c][0]) < 1e-8);
            CHECK(std::abs(a.grad[c][1] - b.grad[c][1]) < 1e-8);
          }
        }
  }
  SUBCASE("flat across a high-contrast channel") {
    // Vertical channel through the middle coarse cell; fine columns 23 and 24 of 48.
    const auto g = build_grid(3, 3, 1, 16, 16, 1, Rect{}, 1.0);
    const KappaGrid k(PermeabilityField(1.0, {Channel{"c", {Box{23.0 / 48, 25.0 / 48, 0.0, 1.0, 0.0, 1.0}}, 1e4}}), g);
    const PartitionOfUnity ms(k, PouMode::Multiscale);
    double inChannel = 0.0, inMatrix = 0.0;
    int nc = 0, nm = 0;
    for (int iy = 18; iy < 30; ++iy)
      for (int ix = 16; ix < 32; ++ix) {
        const auto e = ms.eval(ix, iy, 0, 0.5, 0.5);
        double s = 0.0, sum = 0.0;
        for (int c = 0; c < 4; ++c) {
          s += e.grad[c][0] * e.grad[c][0];
          sum += e.value[c];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        if (k.is_channel(ix, iy, 0)) {
          inChannel += s;
          ++nc;
        } else {
          inMatrix += s;
          ++nm;
        }
      }
    REQUIRE(nc > 0);
    CHECK(inChannel / nc < 1e-3 * (inMatrix / nm));
  }
}

TEST_CASE("medium: continuum extraction") {
  const auto g = build_grid(1, 1, 1, 4, 4, 2, Rect{}, 1.0);
  SUBCASE("two separate channel pieces and the matrix") {
    const KappaGrid k(PermeabilityField(1.0, {Channel{"a", {Box{0.0, 0.25, 0.0, 0.5, 0.0, 1.0}}, 100.0},
                                              Channel{"b", {Box{0.75, 1.0, 0.75, 1.0, 0.0, 0.5}}, 100.0}}),
                      g);
    const PartitionOfUnity pou(k, PouMode::Bilinear);
    std::vector<std::int32_t> labels;
    const auto cs = extract_continua(k, pou, BlockId{0, 0}, &labels);
    REQUIRE(cs.size() == 3u);
    CHECK(cs[0].kind == Continuum::Kind::Matrix);
    CHECK(cs[1].kind == Continuum::Kind::Channel);
    CHECK(cs[2].kind == Continuum::Kind::Channel);
    // a: 1 column x 2 rows x 2 levels; b: 1 x 1 x 1
    CHECK(cs[1].cells.size() == 4u);
    CHECK(cs[2].cells.size() == 1u);
    CHECK(cs[0].cells.size() == 32u - 5u);
    CHECK(labels[0] == 1);
    CHECK(labels[(0 * 4 + 3) * 4 + 3] == 2);
    CHECK(labels[(1 * 4 + 3) * 4 + 3] == 0);
    double total = 0.0;
    for (const auto& c : cs) total += c.measure;
    // integral of kappa tilde over the block, summed cell by cell
    double oracle = 0.0;
    for (int it = 0; it < 2; ++it)
      for (int iy = 0; iy < 4; ++iy)
        for (int ix = 0; ix < 4; ++ix) oracle += cell_weighted_measure(k, pou, ix, iy, it);
    CHECK(total == doctest::Approx(oracle).epsilon(1e-13));
  }
  SUBCASE("homogeneous block: one continuum with the analytic weighted measure") {
    const KappaGrid k(PermeabilityField(3.0), g);
    const PartitionOfUnity pou(k, PouMode::Bilinear);
    const auto cs = extract_continua(k, pou, BlockId{0, 0});
    REQUIRE(cs.size() == 1u);
    // kappa * 2/H^2 * (2/3 + 2/3) * H^2 * T with H = T = 1
    CHECK(cs[0].measure == doctest::Approx(3.0 * 8.0 / 3.0).epsilon(1e-13));
  }
  SUBCASE("channel pieces touching only at a corner stay separate under face connectivity") {
    const KappaGrid k(PermeabilityField(1.0, {Channel{"a", {Box{0.0, 0.25, 0.0, 0.25, 0.0, 1.0}}, 100.0},
                                              Channel{"b", {Box{0.25, 0.5, 0.25, 0.5, 0.0, 1.0}}, 100.0}}),
                      g);
    const PartitionOfUnity pou(k, PouMode::Bilinear);
    CHECK(extract_continua(k, pou, BlockId{0, 0}).size() == 3u);
  }
  SUBCASE("fully channelized block has no matrix continuum") {
    const KappaGrid k(PermeabilityField(1.0, {Channel{"a", {Box{0.0, 1.0, 0.0, 1.0, 0.0, 1.0}}, 10.0}}), g);
    const PartitionOfUnity pou(k, PouMode::Bilinear);
    const auto cs = extract_continua(k, pou, BlockId{0, 0});
    REQUIRE(cs.size() == 1u);
    CHECK(cs[0].kind == Continuum::Kind::Channel);
  }
}
