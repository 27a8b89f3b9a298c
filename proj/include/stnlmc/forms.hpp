#pragma once

#include "stnlmc/grid.hpp"
#include "stnlmc/linsolve.hpp"
#include "stnlmc/medium.hpp"
#include "stnlmc/q1.hpp"

#include <functional>

namespace stnlmc {

using SourceFn = std::function<double(double x, double y, double t)>;

struct FormContext {
  const SpaceTimeGrid* grid;
  const KappaGrid* kappa;
  const PartitionOfUnity* pou;
};

// Spatial element matrices of one fine space-time cell (kappa constant, kappa-tilde at Gauss points).
struct CellMatrices {
  q1::Mat4 stiff;     // kappa grad.grad
  q1::Mat4 mass;      // plain mass
  q1::Mat4 invMass;   // kappa-tilde^{-1} mass
  q1::Mat4 wMass;     // kappa-tilde mass
  std::array<double, 4> wLoad;  // kappa-tilde load (integral of kappa-tilde N)
};
CellMatrices cell_matrices(const FormContext& ctx, int ix, int iy, int it);

// Temporal 2x2 matrices on one fine interval of length dt, index [test][trial].
struct TimeMatrices {
  double mass[2][2], deriv[2][2], stiff[2][2], integral[2];
  explicit TimeMatrices(double dt);
};

enum class Flavor {
  Conforming,  // continuous in time, zero at window start, zero lateral boundary
  Broken,      // continuous within each coarse slab, independent copies at slab interfaces
  SlabCausal,  // broken, and zero at the start of every coarse slab
};

class FineSpace {
public:
  FineSpace(const SpaceTimeGrid& grid, Region region, Flavor flavor);
  const SpaceTimeGrid& grid() const { return *grid_; }
  const Region& region() const { return region_; }
  Flavor flavor() const { return flavor_; }
  int size() const { return size_; }
  int spatial_size() const { return S_; }
  // Fine node range of the spatial set (boundary nodes included).
  int gx0() const { return gx0_; }
  int gx1() const { return gx1_; }
  int gy0() const { return gy0_; }
  int gy1() const { return gy1_; }
  int first_interval() const { return region_.k0 * grid_->rt; }
  int end_interval() const { return (region_.k1 + 1) * grid_->rt; }
  // Interior spatial node index or -1.
  int node(int gx, int gy) const {
    if (gx <= gx0_ || gx >= gx1_ || gy <= gy0_ || gy >= gy1_) return -1;
    return (gy - gy0_ - 1) * (gx1_ - gx0_ - 1) + (gx - gx0_ - 1);
  }
  // Dof of the basis function at node (gx, gy), fine level L, as seen from fine interval it
  // (it == L-1 or it == L); -1 if that function is not in the space.
  int dof(int gx, int gy, int L, int it) const;
  // Level offset of a dof for a spatial node index s: dof = level_base(L, it) + s.
  int level_base(int L, int it) const;

private:
  const SpaceTimeGrid* grid_;
  Region region_;
  Flavor flavor_;
  int gx0_, gx1_, gy0_, gy1_, S_, size_;
};

struct FormWeights {
  double a = 0.0, b = 0.0, e = 0.0, s = 0.0;
};
inline constexpr FormWeights kFormA{1, 0, 0, 0};
inline constexpr FormWeights kFormB{0, 1, 0, 0};
inline constexpr FormWeights kFormE{0, 0, 1, 0};
inline constexpr FormWeights kFormS{0, 0, 0, 1};
inline constexpr FormWeights kFormC{1, 1, 0, 0};
inline constexpr FormWeights kFormD{1, 1, 1, 0};

// Matrix of w_a a + w_b b + w_e e + w_s s over (test dof x trial dof).
SparseMatrix assemble(const FormContext& ctx, FormWeights w, const FineSpace& test, const FineSpace& trial);
SparseMatrix assemble_a(const FormContext& ctx, const FineSpace& test, const FineSpace& trial);
SparseMatrix assemble_b(const FormContext& ctx, const FineSpace& test, const FineSpace& trial);
SparseMatrix assemble_e(const FormContext& ctx, const FineSpace& test, const FineSpace& trial);
SparseMatrix assemble_s(const FormContext& ctx, const FineSpace& test, const FineSpace& trial);

// Piecewise constant function: value on a set of fine cells of one block.
struct CellSetFunction {
  BlockId block;
  const std::vector<int>* cells;  // local cell indices within the block
  double value;
};

// Rows: one per function, entry = s(function, trial basis).
SparseMatrix assemble_s_aux(const FormContext& ctx, const std::vector<CellSetFunction>& fns, const FineSpace& trial);

Eigen::VectorXd rhs_f(const FormContext& ctx, const FineSpace& test, const SourceFn& f);

// Integral of f over a set of fine cells of one block (2-point Gauss per axis).
double integrate_cells(const SpaceTimeGrid& grid, BlockId block, const std::vector<int>& cells, const SourceFn& f);

}  // namespace stnlmc
