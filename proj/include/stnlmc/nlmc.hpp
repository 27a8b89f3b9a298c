#pragma once

#include "stnlmc/field.hpp"
#include "stnlmc/forms.hpp"

#include <map>
#include <memory>

namespace stnlmc {

class AuxiliaryBasis {
public:
  AuxiliaryBasis(const FormContext& ctx, int threads = 1);
  const FormContext& context() const { return ctx_; }
  int size() const { return offset_.back(); }
  int count(int block) const { return offset_[block + 1] - offset_[block]; }
  int offset(int block) const { return offset_[block]; }
  int dof(int block, int j) const { return offset_[block] + j; }
  int block_of(int dof) const;
  int slab_of(int dof) const { return block_of(dof) / ctx_.grid->coarse.cells(); }
  const std::vector<Continuum>& continua(int block) const { return continua_[block]; }
  const std::vector<std::int32_t>& labels(int block) const { return labels_[block]; }
  const Continuum& continuum(int dof) const;
  double measure(int dof) const { return continuum(dof).measure; }
  double psi_value(int dof) const { return 1.0 / measure(dof); }
  CellSetFunction function(int dof) const;
  // Dofs of blocks (k, i) with i in X, ascending.
  std::vector<int> dofs_in(const CellRange& X, int k) const;
  // First dof of each slab plus the total: size nt + 1.
  std::vector<int> slab_offsets() const;

private:
  FormContext ctx_;
  std::vector<std::vector<Continuum>> continua_;
  std::vector<std::vector<std::int32_t>> labels_;
  std::vector<int> offset_;
};

AuxiliaryBasis build_aux(const FormContext& ctx, int threads = 1);

// Coefficients of pi v in the psi basis: c_j = m_j s(v, psi_j).
Eigen::VectorXd project_aux(const AuxiliaryBasis& aux, const BlockField& v);
// s(v, psi_j) for every auxiliary dof.
Eigen::VectorXd pair_aux(const AuxiliaryBasis& aux, const BlockField& v);
// b_j = integral of f psi_j.
Eigen::VectorXd coarse_rhs(const AuxiliaryBasis& aux, const SourceFn& f);

// Operator of one coarse slab over a spatial cell rectangle: trial = conforming in time within the
// slab with the start level moved to the coupling block C, test = slab-causal.
//   K = [D  -B^T; B  0]   (or K = D when unconstrained)
struct SlabOperator {
  int S = 0, rt = 0, p = 0;
  bool constrained = true;
  SparseMatrix D, C, B, B0;
  std::unique_ptr<Factorization> F;
  int phi_size() const { return rt * S; }
  int size() const { return phi_size() + (constrained ? p : 0); }
};

struct SlabStats {
  double assembleSeconds = 0.0, factorSeconds = 0.0, solveSeconds = 0.0;
  long factorizations = 0, solves = 0;
  void add(const SlabStats& o);
};

std::shared_ptr<SlabOperator> build_slab_operator(const AuxiliaryBasis& aux, const CellRange& X, int k,
                                                  bool constrained, SlabStats* stats = nullptr);

// Reuses slab operators over one spatial rectangle whenever the permeability inside the slab
// repeats (which makes the operators identical).
class SlabCache {
public:
  SlabCache(const AuxiliaryBasis& aux, CellRange X, bool constrained, SlabStats* stats);
  const SlabOperator& get(int k);
  const std::vector<int>& dofs(int k);
  // Drops operators not needed by slabs in [k0, k1].
  void retain(int k0, int k1);

private:
  const AuxiliaryBasis* aux_;
  CellRange X_;
  bool constrained_;
  SlabStats* stats_;
  std::map<std::vector<double>, std::shared_ptr<SlabOperator>> byPattern_;
  std::map<int, std::vector<double>> signature_;
  std::map<int, std::vector<int>> dofs_;
  const std::vector<double>& signature(int k);
};

struct ForwardStep {
  Eigen::VectorXd y;  // phi (rt*S) then multipliers
  double constraintResidual = 0.0;
};
// One constrained slab solve from start values x with constraint values U.
ForwardStep slab_forward(const SlabOperator& op, const Eigen::VectorXd& x, const Eigen::VectorXd& U);

struct LocalBasisSet {
  BlockId block;
  Region region;
  std::vector<int> dofs;   // auxiliary dofs of the region, ascending
  Eigen::MatrixXd phi;     // conforming region space x dofs
  Eigen::MatrixXd lambda;  // multiplier of each region constraint x dofs
};

LocalBasisSet solve_local(const AuxiliaryBasis& aux, BlockId block, int layersX, int M);
// Global downscale columns (whole domain and window); refuses above maxEntries stored values.
LocalBasisSet solve_global(const AuxiliaryBasis& aux, std::size_t maxEntries = 50'000'000);
// Max |s(column, psi_m) - delta| over the set.
double constraint_residual(const AuxiliaryBasis& aux, const LocalBasisSet& set);

// Column of one auxiliary dof in a region (conforming region space).
Eigen::VectorXd solve_column(const AuxiliaryBasis& aux, const Region& region, int dof);

struct CoarseSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
  int M = 0;
  std::vector<int> slabOffset;
};

CoarseSystem assemble_coarse(const AuxiliaryBasis& aux, const std::vector<LocalBasisSet>& sets,
                             const Eigen::VectorXd& b, int M);
BlockField downscale(const AuxiliaryBasis& aux, const std::vector<LocalBasisSet>& sets, const Eigen::VectorXd& U);

Eigen::VectorXd solve_coarse(const CoarseSystem& cs);             // causal slab marching
Eigen::VectorXd solve_coarse_monolithic(const CoarseSystem& cs);  // one factorization of A

struct StructureCheck {
  bool causal = true, banded = true;
  long entries = 0;
};
StructureCheck check_coarse_structure(const CoarseSystem& cs, const AuxiliaryBasis& aux);

// Localized method without explicit basis columns: coarse rows from adjoint slab marches and
// the downscaled field from one forward march per region.
struct LocalizedOptions {
  int layersX = 1, M = 1, threads = 1;
};
struct LocalizedStats {
  SlabStats slabs;
  double coarseSeconds = 0.0;
  double maxConstraintResidual = 0.0;
  long regions = 0;
};

CoarseSystem assemble_coarse_localized(const AuxiliaryBasis& aux, const Eigen::VectorXd& b,
                                       const LocalizedOptions& opt, LocalizedStats* stats = nullptr);
BlockField downscale_localized(const AuxiliaryBasis& aux, const Eigen::VectorXd& U, const LocalizedOptions& opt,
                               LocalizedStats* stats = nullptr);

struct GlobalSolution {
  Eigen::VectorXd U;
  BlockField field;
};
// Global method: multipliers are fixed by the coarse equations, so one unconstrained march suffices.
GlobalSolution solve_global_field(const AuxiliaryBasis& aux, const Eigen::VectorXd& b, SlabStats* stats = nullptr);

// Energy of a column of a region per layer: spatial rings around the block's cell, or slabs.
std::vector<double> decay_profile(const AuxiliaryBasis& aux, const Region& region, const Eigen::VectorXd& column,
                                  const std::function<int(int, int, int)>& layerOf, int layers);
std::vector<double> spatial_decay(const AuxiliaryBasis& aux, BlockId block, int layersX);
std::vector<double> temporal_decay(const AuxiliaryBasis& aux, BlockId block, int layersX, int M);

}  // namespace stnlmc
