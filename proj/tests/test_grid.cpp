#include <doctest.h>

#include "stnlmc/grid.hpp"

#include <stdexcept>

using namespace stnlmc;

TEST_CASE("grid: refinement sizes and block lookup") {
  const auto g = build_grid(8, 8, 10, 8, 8, 10, Rect{}, 1.0);
  CHECK(g.fine.nx == 64);
  CHECK(g.fine.ny == 64);
  CHECK(g.fineTime.nt == 100);
  CHECK(g.blocks() == 640);
  CHECK(g.fine.hx() == doctest::Approx(1.0 / 64));
  const BlockId b = g.block_of(17, 63, 99);
  CHECK(b.n == 9);
  CHECK(b.i == g.coarse.cell(2, 7));
  CHECK(g.block_id(g.block_index(BlockId{3, 21})) == BlockId{3, 21});
}

TEST_CASE("grid: invalid sizes are rejected") {
  CHECK_THROWS_AS(build_grid(0, 8, 10, 8, 8, 10, Rect{}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(8, 8, 10, 8, 0, 10, Rect{}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(8, 8, 10, 8, 8, 10, Rect{0, 1, 0, 1}, -1.0), std::invalid_argument);
}

TEST_CASE("grid: spatial oversampling") {
  const auto g = build_grid(8, 8, 10, 2, 2, 2, Rect{}, 1.0);
  SUBCASE("interior cell, one layer gives a 3x3 block") {
    const CellRange r = oversample_space(g, g.coarse.cell(4, 4), 1);
    CHECK(r == CellRange{3, 5, 3, 5});
    CHECK(r.count() == 9);
  }
  SUBCASE("zero layers is the cell itself") {
    CHECK(oversample_space(g, g.coarse.cell(2, 6), 0) == CellRange{2, 2, 6, 6});
  }
  SUBCASE("clipped at the domain boundary") {
    CHECK(oversample_space(g, g.coarse.cell(0, 0), 2) == CellRange{0, 2, 0, 2});
    CHECK(oversample_space(g, g.coarse.cell(7, 3), 3) == CellRange{4, 7, 0, 6});
  }
  SUBCASE("monotone in the layer count") {
    for (int i = 0; i < g.coarse.cells(); ++i)
      for (int l = 0; l < 8; ++l) {
        const CellRange a = oversample_space(g, i, l), b = oversample_space(g, i, l + 1);
        CHECK(b.x0 <= a.x0);
        CHECK(b.x1 >= a.x1);
        CHECK(b.y0 <= a.y0);
        CHECK(b.y1 >= a.y1);
      }
  }
  SUBCASE("symmetric for interior cells") {
    const int cx = 4, cy = 3;
    const CellRange r = oversample_space(g, g.coarse.cell(cx, cy), 2);
    CHECK(cx - r.x0 == r.x1 - cx);
    CHECK(cy - r.y0 == r.y1 - cy);
  }
}

TEST_CASE("grid: temporal oversampling") {
  const auto g = build_grid(4, 4, 10, 2, 2, 2, Rect{}, 1.0);
  CHECK(oversample_time(g, 0, 0) == std::pair{0, 0});
  CHECK(oversample_time(g, 5, 2) == std::pair{3, 5});
  CHECK(oversample_time(g, 1, 4) == std::pair{0, 1});
  const Region r = oversample(g, BlockId{6, g.coarse.cell(1, 1)}, 1, 3);
  CHECK(r.k0 == 3);
  CHECK(r.k1 == 6);
  CHECK(r.cells == CellRange{0, 2, 0, 2});
  CHECK(r.space_cells(g.coarse.nx).size() == 9u);
}

TEST_CASE("grid: nearest fine level") {
  const auto g = build_grid(8, 8, 10, 8, 8, 10, Rect{}, 1.0);
  CHECK(g.nearest_level(0.0) == 0);
  CHECK(g.nearest_level(0.499) == 50);
  CHECK(g.nearest_level(1.0) == 100);
  CHECK(g.nearest_level(0.25) == 25);
}
