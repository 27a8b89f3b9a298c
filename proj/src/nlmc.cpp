#include "stnlmc/nlmc.hpp"

#include "stnlmc/metrics.hpp"
#include "stnlmc/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace stnlmc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string block_name(BlockId b) { return "(n=" + std::to_string(b.n) + ", i=" + std::to_string(b.i) + ")"; }

CellRange full_range(const SpaceTimeGrid& g) { return {0, g.coarse.nx - 1, 0, g.coarse.ny - 1}; }

// Writes slab n of a region march into the blocks (n, i), i in cells.
void fill_blocks(BlockField& field, const FineSpace& space, const std::vector<int>& cells, int n,
                 const Eigen::VectorXd& start, const Eigen::VectorXd& y) {
  const auto& g = space.grid();
  const int S = space.spatial_size();
  for (int i : cells) {
    const int cx = i % g.coarse.nx, cy = i / g.coarse.nx;
    double* d = field.block(g.block_index({n, i}));
    for (int lt = 0; lt <= g.rt; ++lt)
      for (int ly = 0; ly <= g.ry; ++ly)
        for (int lx = 0; lx <= g.rx; ++lx) {
          const int s = space.node(cx * g.rx + lx, cy * g.ry + ly);
          d[field.local(lx, ly, lt)] = s < 0 ? 0.0 : (lt == 0 ? start[s] : y[(lt - 1) * S + s]);
        }
  }
}

}  // namespace

void SlabStats::add(const SlabStats& o) {
  assembleSeconds += o.assembleSeconds;
  factorSeconds += o.factorSeconds;
  solveSeconds += o.solveSeconds;
  factorizations += o.factorizations;
  solves += o.solves;
}

// ---------------------------------------------------------------------------------------------
// Auxiliary basis

AuxiliaryBasis::AuxiliaryBasis(const FormContext& ctx, int threads) : ctx_(ctx) {
  const auto& g = *ctx.grid;
  const int nb = g.blocks();
  continua_.resize(nb);
  labels_.resize(nb);
  parallel_for(nb, threads, [&](int b) {
    continua_[b] = extract_continua(*ctx.kappa, *ctx.pou, g.block_id(b), &labels_[b]);
  });
  offset_.assign(nb + 1, 0);
  for (int b = 0; b < nb; ++b) offset_[b + 1] = offset_[b] + static_cast<int>(continua_[b].size());
}

AuxiliaryBasis build_aux(const FormContext& ctx, int threads) { return AuxiliaryBasis(ctx, threads); }

int AuxiliaryBasis::block_of(int dof) const {
  if (dof < 0 || dof >= size()) throw std::out_of_range("auxiliary dof index");
  return static_cast<int>(std::upper_bound(offset_.begin(), offset_.end(), dof) - offset_.begin()) - 1;
}

const Continuum& AuxiliaryBasis::continuum(int dof) const {
  const int b = block_of(dof);
  return continua_[b][dof - offset_[b]];
}

CellSetFunction AuxiliaryBasis::function(int dof) const {
  const auto& c = continuum(dof);
  return {c.block, &c.cells, 1.0 / c.measure};
}

std::vector<int> AuxiliaryBasis::dofs_in(const CellRange& X, int k) const {
  const auto& g = *ctx_.grid;
  std::vector<int> out;
  for (int cy = X.y0; cy <= X.y1; ++cy)
    for (int cx = X.x0; cx <= X.x1; ++cx) {
      const int b = g.block_index({k, g.coarse.cell(cx, cy)});
      for (int d = offset_[b]; d < offset_[b + 1]; ++d) out.push_back(d);
    }
  return out;
}

std::vector<int> AuxiliaryBasis::slab_offsets() const {
  const auto& g = *ctx_.grid;
  std::vector<int> off(g.coarseTime.nt + 1);
  for (int n = 0; n <= g.coarseTime.nt; ++n) off[n] = offset_[n * g.coarse.cells()];
  return off;
}

Eigen::VectorXd pair_aux(const AuxiliaryBasis& aux, const BlockField& v) {
  const auto& ctx = aux.context();
  const auto& g = *ctx.grid;
  const TimeMatrices tm(g.fineTime.dt());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(aux.size());
  double vals[8];
  for (int b = 0; b < g.blocks(); ++b) {
    const BlockId id = g.block_id(b);
    const int cx = id.i % g.coarse.nx, cy = id.i / g.coarse.nx;
    const auto& labels = aux.labels(b);
    for (std::size_t l = 0; l < labels.size(); ++l) {
      const int L = static_cast<int>(l);
      const int ix = cx * g.rx + L % g.rx, iy = cy * g.ry + (L / g.rx) % g.ry, it = id.n * g.rt + L / (g.rx * g.ry);
      v.cell_values(ix, iy, it, vals);
      const auto load = q1::weighted_load(g.fine.hx(), g.fine.hy(), ctx.pou->tilde_kappa_gauss(ix, iy, it));
      double s = 0.0;
      for (int tau = 0; tau < 2; ++tau)
        for (int c = 0; c < 4; ++c) s += vals[tau * 4 + c] * tm.integral[tau] * load[c];
      out[aux.dof(b, labels[l])] += s;
    }
  }
  for (int j = 0; j < aux.size(); ++j) out[j] *= aux.psi_value(j);
  return out;
}

Eigen::VectorXd project_aux(const AuxiliaryBasis& aux, const BlockField& v) {
  Eigen::VectorXd c = pair_aux(aux, v);
  for (int j = 0; j < aux.size(); ++j) c[j] *= aux.measure(j);
  return c;
}

Eigen::VectorXd coarse_rhs(const AuxiliaryBasis& aux, const SourceFn& f) {
  Eigen::VectorXd b(aux.size());
  for (int j = 0; j < aux.size(); ++j) {
    const auto& c = aux.continuum(j);
    b[j] = aux.psi_value(j) * integrate_cells(*aux.context().grid, c.block, c.cells, f);
  }
  return b;
}

// ---------------------------------------------------------------------------------------------
// Slab operators

std::shared_ptr<SlabOperator> build_slab_operator(const AuxiliaryBasis& aux, const CellRange& X, int k,
                                                  bool constrained, SlabStats* stats) {
  const auto& ctx = aux.context();
  const auto& g = *ctx.grid;
  auto t0 = std::chrono::steady_clock::now();
  const Region r{X, k, k};
  const FineSpace test(g, r, Flavor::SlabCausal), trial(g, r, Flavor::Broken);
  auto op = std::make_shared<SlabOperator>();
  op->S = test.spatial_size();
  op->rt = g.rt;
  op->constrained = constrained;
  const int S = op->S, P = op->phi_size();
  const SparseMatrix M = assemble(ctx, kFormD, test, trial);
  op->C = M.leftCols(S);
  op->D = M.rightCols(P);
  const auto dofs = aux.dofs_in(X, k);
  std::vector<CellSetFunction> fns;
  for (int d : dofs) fns.push_back(aux.function(d));
  const SparseMatrix Bf = assemble_s_aux(ctx, fns, trial);
  op->B0 = Bf.leftCols(S);
  op->B = Bf.rightCols(P);
  op->p = static_cast<int>(dofs.size());

  SparseMatrix K;
  if (constrained) {
    std::vector<Triplet> trip;
    trip.reserve(op->D.nonZeros() + 2 * op->B.nonZeros());
    for (int c = 0; c < op->D.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(op->D, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < op->B.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(op->B, c); it; ++it) {
        trip.emplace_back(P + it.row(), it.col(), it.value());
        trip.emplace_back(it.col(), P + it.row(), -it.value());
      }
    K.resize(op->size(), op->size());
    K.setFromTriplets(trip.begin(), trip.end());
  } else {
    K = op->D;
  }
  auto t1 = std::chrono::steady_clock::now();
  try {
    op->F = factorize(K);
  } catch (const SingularMatrixError& e) {
    throw std::runtime_error("singular slab saddle system for cells [" + std::to_string(X.x0) + ".." +
                             std::to_string(X.x1) + "]x[" + std::to_string(X.y0) + ".." + std::to_string(X.y1) +
                             "], slab " + std::to_string(k) + ": " + e.what());
  }
  if (stats) {
    stats->assembleSeconds += std::chrono::duration<double>(t1 - t0).count();
    stats->factorSeconds += seconds_since(t1);
    ++stats->factorizations;
  }
  return op;
}

SlabCache::SlabCache(const AuxiliaryBasis& aux, CellRange X, bool constrained, SlabStats* stats)
    : aux_(&aux), X_(X), constrained_(constrained), stats_(stats) {}

const std::vector<double>& SlabCache::signature(int k) {
  auto it = signature_.find(k);
  if (it != signature_.end()) return it->second;
  const auto& g = *aux_->context().grid;
  const auto& kappa = *aux_->context().kappa;
  std::vector<double> sig;
  sig.reserve(static_cast<std::size_t>(X_.nx() * g.rx) * X_.ny() * g.ry * g.rt);
  for (int it2 = k * g.rt; it2 < (k + 1) * g.rt; ++it2)
    for (int iy = X_.y0 * g.ry; iy < (X_.y1 + 1) * g.ry; ++iy)
      for (int ix = X_.x0 * g.rx; ix < (X_.x1 + 1) * g.rx; ++ix) sig.push_back(kappa.at(ix, iy, it2));
  return signature_.emplace(k, std::move(sig)).first->second;
}

const SlabOperator& SlabCache::get(int k) {
  const auto& sig = signature(k);
  auto it = byPattern_.find(sig);
  if (it == byPattern_.end()) it = byPattern_.emplace(sig, build_slab_operator(*aux_, X_, k, constrained_, stats_)).first;
  return *it->second;
}

const std::vector<int>& SlabCache::dofs(int k) {
  auto it = dofs_.find(k);
  if (it == dofs_.end()) it = dofs_.emplace(k, aux_->dofs_in(X_, k)).first;
  return it->second;
}

void SlabCache::retain(int k0, int k1) {
  std::set<const std::vector<double>*> keep;
  std::vector<std::vector<double>> keys;
  for (int k = k0; k <= k1; ++k) keys.push_back(signature(k));
  for (auto it = byPattern_.begin(); it != byPattern_.end();) {
    if (std::find(keys.begin(), keys.end(), it->first) == keys.end())
      it = byPattern_.erase(it);
    else
      ++it;
  }
  for (auto it = signature_.begin(); it != signature_.end();) it = it->first < k0 ? signature_.erase(it) : std::next(it);
  for (auto it = dofs_.begin(); it != dofs_.end();) it = it->first < k0 ? dofs_.erase(it) : std::next(it);
}

ForwardStep slab_forward(const SlabOperator& op, const Eigen::VectorXd& x, const Eigen::VectorXd& U) {
  const int P = op.phi_size();
  Eigen::VectorXd rhs(op.size());
  rhs.head(P) = -(op.C * x);
  if (op.constrained) rhs.tail(op.p) = U - op.B0 * x;
  ForwardStep fs;
  fs.y = op.F->solve(rhs);
  if (op.constrained && op.p > 0)
    fs.constraintResidual = (op.B * fs.y.head(P) + op.B0 * x - U).lpNorm<Eigen::Infinity>();
  return fs;
}

// ---------------------------------------------------------------------------------------------
// Explicit basis columns

namespace {

LocalBasisSet solve_region(const AuxiliaryBasis& aux, BlockId block, const Region& region) {
  const auto& g = *aux.context().grid;
  const FineSpace space(g, region, Flavor::Conforming);
  const int S = space.spatial_size(), P = g.rt * S;
  LocalBasisSet set;
  set.block = block;
  set.region = region;
  SlabCache cache(aux, region.cells, true, nullptr);
  std::vector<int> slabStart;  // position of each slab's dofs in set.dofs
  for (int k = region.k0; k <= region.k1; ++k) {
    slabStart.push_back(static_cast<int>(set.dofs.size()));
    const auto& d = cache.dofs(k);
    set.dofs.insert(set.dofs.end(), d.begin(), d.end());
  }
  slabStart.push_back(static_cast<int>(set.dofs.size()));
  const int nd = static_cast<int>(set.dofs.size());
  set.phi = Eigen::MatrixXd::Zero(space.size(), nd);
  set.lambda = Eigen::MatrixXd::Zero(nd, nd);
  for (int k = region.k0; k <= region.k1; ++k) {
    const int c0 = slabStart[k - region.k0], nc = slabStart[k - region.k0 + 1] - c0;
    if (nc == 0) continue;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(S, nc);
    for (int kk = k; kk <= region.k1; ++kk) {
      const auto& op = cache.get(kk);
      Eigen::MatrixXd rhs(op.size(), nc);
      rhs.topRows(P) = -(op.C * X);
      rhs.bottomRows(op.p) = -(op.B0 * X);
      if (kk == k) rhs.bottomRows(op.p) += Eigen::MatrixXd::Identity(op.p, nc);
      const Eigen::MatrixXd Y = op.F->solve_many(rhs);
      set.phi.block((kk - region.k0) * P, c0, P, nc) = Y.topRows(P);
      set.lambda.block(slabStart[kk - region.k0], c0, op.p, nc) = Y.bottomRows(op.p);
      X = Y.middleRows((g.rt - 1) * S, S);
    }
  }
  return set;
}

}  // namespace

LocalBasisSet solve_local(const AuxiliaryBasis& aux, BlockId block, int layersX, int M) {
  try {
    return solve_region(aux, block, oversample(*aux.context().grid, block, layersX, M));
  } catch (const std::exception& e) {
    throw std::runtime_error("local solve failed for block " + block_name(block) + ": " + e.what());
  }
}

LocalBasisSet solve_global(const AuxiliaryBasis& aux, std::size_t maxEntries) {
  const auto& g = *aux.context().grid;
  const Region region{full_range(g), 0, g.coarseTime.nt - 1};
  const FineSpace space(g, region, Flavor::Conforming);
  if (static_cast<std::size_t>(space.size()) * aux.size() > maxEntries)
    throw std::length_error("solve_global: " + std::to_string(space.size()) + " x " + std::to_string(aux.size()) +
                            " column storage exceeds the configured limit");
  return solve_region(aux, {0, 0}, region);
}

double constraint_residual(const AuxiliaryBasis& aux, const LocalBasisSet& set) {
  const auto& ctx = aux.context();
  const FineSpace space(*ctx.grid, set.region, Flavor::Conforming);
  std::vector<CellSetFunction> fns;
  for (int d : set.dofs) fns.push_back(aux.function(d));
  const SparseMatrix B = assemble_s_aux(ctx, fns, space);
  const Eigen::MatrixXd R = B * set.phi - Eigen::MatrixXd::Identity(set.dofs.size(), set.dofs.size());
  return R.size() ? R.lpNorm<Eigen::Infinity>() : 0.0;
}

Eigen::VectorXd solve_column(const AuxiliaryBasis& aux, const Region& region, int dof) {
  const auto& g = *aux.context().grid;
  const int k = aux.slab_of(dof);
  const int i = aux.block_of(dof) % g.coarse.cells();
  if (k < region.k0 || k > region.k1 || !region.cells.contains(i % g.coarse.nx, i / g.coarse.nx))
    throw std::invalid_argument("solve_column: dof outside the region");
  const FineSpace space(g, region, Flavor::Conforming);
  const int S = space.spatial_size(), P = g.rt * S;
  Eigen::VectorXd col = Eigen::VectorXd::Zero(space.size());
  SlabCache cache(aux, region.cells, true, nullptr);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(S);
  for (int kk = k; kk <= region.k1; ++kk) {
    const auto& op = cache.get(kk);
    Eigen::VectorXd U = Eigen::VectorXd::Zero(op.p);
    if (kk == k) {
      const auto& d = cache.dofs(kk);
      U[std::find(d.begin(), d.end(), dof) - d.begin()] = 1.0;
    }
    const auto fs = slab_forward(op, x, U);
    col.segment((kk - region.k0) * P, P) = fs.y.head(P);
    x = fs.y.segment((g.rt - 1) * S, S);
  }
  return col;
}

// ---------------------------------------------------------------------------------------------
// Coarse system

CoarseSystem assemble_coarse(const AuxiliaryBasis& aux, const std::vector<LocalBasisSet>& sets,
                             const Eigen::VectorXd& b, int M) {
  const auto& g = *aux.context().grid;
  std::vector<Triplet> trip;
  for (const auto& set : sets) {
    const int blk = g.block_index(set.block);
    for (int r = 0; r < static_cast<int>(set.dofs.size()); ++r) {
      const int j = set.dofs[r];
      if (aux.block_of(j) != blk) continue;
      for (int c = 0; c < static_cast<int>(set.dofs.size()); ++c)
        trip.emplace_back(j, set.dofs[c], set.lambda(r, c) * aux.psi_value(j));
    }
  }
  CoarseSystem cs;
  cs.A.resize(aux.size(), aux.size());
  cs.A.setFromTriplets(trip.begin(), trip.end());
  cs.b = b;
  cs.M = M;
  cs.slabOffset = aux.slab_offsets();
  return cs;
}

BlockField downscale(const AuxiliaryBasis& aux, const std::vector<LocalBasisSet>& sets, const Eigen::VectorXd& U) {
  const auto& g = *aux.context().grid;
  BlockField out(g);
  for (const auto& set : sets) {
    Eigen::VectorXd Ul(set.dofs.size());
    for (std::size_t c = 0; c < set.dofs.size(); ++c) Ul[c] = U[set.dofs[c]];
    const Eigen::VectorXd phi = set.phi * Ul;
    const FineSpace space(g, set.region, Flavor::Conforming);
    const int n = set.block.n, cx = set.block.i % g.coarse.nx, cy = set.block.i / g.coarse.nx;
    double* d = out.block(g.block_index(set.block));
    for (int lt = 0; lt <= g.rt; ++lt)
      for (int ly = 0; ly <= g.ry; ++ly)
        for (int lx = 0; lx <= g.rx; ++lx) {
          const int dof = space.dof(cx * g.rx + lx, cy * g.ry + ly, n * g.rt + lt, n * g.rt);
          d[out.local(lx, ly, lt)] = dof < 0 ? 0.0 : phi[dof];
        }
  }
  return out;
}

Eigen::VectorXd solve_coarse(const CoarseSystem& cs) {
  const int nt = static_cast<int>(cs.slabOffset.size()) - 1;
  Eigen::VectorXd U = Eigen::VectorXd::Zero(cs.A.rows());
  for (int n = 0; n < nt; ++n) {
    const int o = cs.slabOffset[n], sz = cs.slabOffset[n + 1] - o;
    if (sz == 0) continue;
    const Eigen::VectorXd r = cs.b.segment(o, sz) - (cs.A * U).segment(o, sz);
    const SparseMatrix Ann = cs.A.block(o, o, sz, sz);
    try {
      const auto F = factorize(Ann);
      U.segment(o, sz) = F->solve(Eigen::VectorXd(r));
    } catch (const SingularMatrixError& e) {
      throw std::runtime_error("singular coarse slab block " + std::to_string(n) + ": " + e.what());
    }
  }
  return U;
}

Eigen::VectorXd solve_coarse_monolithic(const CoarseSystem& cs) { return factorize(cs.A)->solve(cs.b); }

StructureCheck check_coarse_structure(const CoarseSystem& cs, const AuxiliaryBasis& aux) {
  StructureCheck sc;
  for (int c = 0; c < cs.A.outerSize(); ++c) {
    const int sc_ = aux.slab_of(c);
    for (SparseMatrix::InnerIterator it(cs.A, c); it; ++it) {
      const int sr = aux.slab_of(static_cast<int>(it.row()));
      ++sc.entries;
      if (sc_ > sr) sc.causal = false;
      if (sr - sc_ > cs.M) sc.banded = false;
    }
  }
  return sc;
}

// ---------------------------------------------------------------------------------------------
// Localized pipeline

namespace {

struct Group {
  CellRange X;
  std::vector<int> cells;
};

std::vector<Group> region_groups(const SpaceTimeGrid& g, int layersX) {
  std::map<CellRange, std::vector<int>> m;
  for (int i = 0; i < g.coarse.cells(); ++i) m[oversample_space(g, i, layersX)].push_back(i);
  std::vector<Group> out;
  for (auto& [X, cells] : m) out.push_back({X, std::move(cells)});
  return out;
}

}  // namespace

CoarseSystem assemble_coarse_localized(const AuxiliaryBasis& aux, const Eigen::VectorXd& b,
                                       const LocalizedOptions& opt, LocalizedStats* stats) {
  const auto& g = *aux.context().grid;
  const int nt = g.coarseTime.nt, rt = g.rt;
  const auto groups = region_groups(g, opt.layersX);
  std::vector<std::vector<Triplet>> trip(groups.size());
  std::vector<SlabStats> gstats(groups.size());
  parallel_for(static_cast<int>(groups.size()), opt.threads, [&](int gi) {
    const auto& grp = groups[gi];
    SlabCache cache(aux, grp.X, true, &gstats[gi]);
    for (int n = 0; n < nt; ++n) {
      const int k0 = std::max(n - opt.M, 0);
      std::vector<int> rows;
      for (int i : grp.cells) {
        const int blk = g.block_index({n, i});
        for (int j = 0; j < aux.count(blk); ++j) rows.push_back(aux.dof(blk, j));
      }
      const int R = static_cast<int>(rows.size());
      Eigen::MatrixXd Cm;
      {
        const auto& op = cache.get(n);
        const auto& dn = cache.dofs(n);
        Cm = Eigen::MatrixXd::Zero(op.size(), R);
        for (int r = 0; r < R; ++r)
          Cm(op.phi_size() + (std::find(dn.begin(), dn.end(), rows[r]) - dn.begin()), r) = 1.0;
      }
      for (int k = n; k >= k0; --k) {
        const auto& op = cache.get(k);
        const auto& dk = cache.dofs(k);
        const int P = op.phi_size(), S = op.S;
        auto t0 = std::chrono::steady_clock::now();
        const Eigen::MatrixXd Z = op.F->solve_many(Cm, true);
        gstats[gi].solveSeconds += seconds_since(t0);
        gstats[gi].solves += R;
        for (int r = 0; r < R; ++r) {
          const double w = aux.psi_value(rows[r]);
          for (int q = 0; q < op.p; ++q) trip[gi].emplace_back(rows[r], dk[q], Z(P + q, r) * w);
        }
        if (k > k0) {
          const Eigen::MatrixXd Q = -(op.C.transpose() * Z.topRows(P)) - op.B0.transpose() * Z.bottomRows(op.p);
          const auto& prev = cache.get(k - 1);
          Cm = Eigen::MatrixXd::Zero(prev.size(), R);
          Cm.middleRows((rt - 1) * S, S) = Q;
        }
      }
      cache.retain(std::max(n + 1 - opt.M, 0), std::min(n + 1, nt - 1));
    }
  });
  std::vector<Triplet> all;
  for (auto& t : trip) all.insert(all.end(), t.begin(), t.end());
  CoarseSystem cs;
  cs.A.resize(aux.size(), aux.size());
  cs.A.setFromTriplets(all.begin(), all.end());
  cs.b = b;
  cs.M = opt.M;
  cs.slabOffset = aux.slab_offsets();
  if (stats) {
    for (const auto& s : gstats) stats->slabs.add(s);
    stats->regions += static_cast<long>(groups.size()) * nt;
  }
  return cs;
}

BlockField downscale_localized(const AuxiliaryBasis& aux, const Eigen::VectorXd& U, const LocalizedOptions& opt,
                               LocalizedStats* stats) {
  const auto& g = *aux.context().grid;
  const int nt = g.coarseTime.nt, rt = g.rt;
  const auto groups = region_groups(g, opt.layersX);
  BlockField out(g);
  std::vector<SlabStats> gstats(groups.size());
  std::vector<double> gres(groups.size(), 0.0);
  parallel_for(static_cast<int>(groups.size()), opt.threads, [&](int gi) {
    const auto& grp = groups[gi];
    SlabCache cache(aux, grp.X, true, &gstats[gi]);
    const FineSpace space(g, Region{grp.X, 0, 0}, Flavor::Conforming);
    const int S = space.spatial_size();
    for (int n = 0; n < nt; ++n) {
      const int k0 = std::max(n - opt.M, 0);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(S);
      for (int k = k0; k <= n; ++k) {
        const auto& op = cache.get(k);
        const auto& dk = cache.dofs(k);
        Eigen::VectorXd Uk(dk.size());
        for (std::size_t q = 0; q < dk.size(); ++q) Uk[q] = U[dk[q]];
        auto t0 = std::chrono::steady_clock::now();
        const auto fs = slab_forward(op, x, Uk);
        gstats[gi].solveSeconds += seconds_since(t0);
        ++gstats[gi].solves;
        gres[gi] = std::max(gres[gi], fs.constraintResidual);
        if (k == n) fill_blocks(out, space, grp.cells, n, x, fs.y);
        x = fs.y.segment((rt - 1) * S, S);
      }
      cache.retain(std::max(n + 1 - opt.M, 0), std::min(n + 1, nt - 1));
    }
  });
  if (stats) {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      stats->slabs.add(gstats[gi]);
      stats->maxConstraintResidual = std::max(stats->maxConstraintResidual, gres[gi]);
    }
  }
  return out;
}

GlobalSolution solve_global_field(const AuxiliaryBasis& aux, const Eigen::VectorXd& b, SlabStats* stats) {
  const auto& g = *aux.context().grid;
  const int nt = g.coarseTime.nt, rt = g.rt;
  const CellRange X = full_range(g);
  const FineSpace space(g, Region{X, 0, 0}, Flavor::Conforming);
  const int S = space.spatial_size();
  std::vector<int> cells(g.coarse.cells());
  for (int i = 0; i < g.coarse.cells(); ++i) cells[i] = i;
  SlabCache cache(aux, X, false, stats);
  GlobalSolution sol{Eigen::VectorXd::Zero(aux.size()), BlockField(g)};
  Eigen::VectorXd x = Eigen::VectorXd::Zero(S);
  for (int k = 0; k < nt; ++k) {
    const auto& op = cache.get(k);
    const auto& dk = cache.dofs(k);
    Eigen::VectorXd lam(dk.size());
    for (std::size_t q = 0; q < dk.size(); ++q) lam[q] = b[dk[q]] * aux.measure(dk[q]);
    const Eigen::VectorXd rhs = -(op.C * x) + op.B.transpose() * lam;
    auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd y = op.F->solve(rhs);
    if (stats) {
      stats->solveSeconds += seconds_since(t0);
      ++stats->solves;
    }
    const Eigen::VectorXd Uk = op.B * y + op.B0 * x;
    for (std::size_t q = 0; q < dk.size(); ++q) sol.U[dk[q]] = Uk[q];
    fill_blocks(sol.field, space, cells, k, x, y);
    x = y.segment((rt - 1) * S, S);
    cache.retain(std::min(k + 1, nt - 1), std::min(k + 1, nt - 1));
  }
  return sol;
}

// ---------------------------------------------------------------------------------------------
// Decay diagnostics

std::vector<double> decay_profile(const AuxiliaryBasis& aux, const Region& region, const Eigen::VectorXd& column,
                                  const std::function<int(int, int, int)>& layerOf, int layers) {
  const FineSpace space(*aux.context().grid, region, Flavor::Conforming);
  return layer_energies(aux.context(), space, column, NormKind::V, layerOf, layers);
}

std::vector<double> spatial_decay(const AuxiliaryBasis& aux, BlockId block, int layersX) {
  const auto& g = *aux.context().grid;
  const Region region = oversample(g, block, layersX, 0);
  const Eigen::VectorXd col = solve_column(aux, region, aux.dof(g.block_index(block), 0));
  const int bx = block.i % g.coarse.nx, by = block.i / g.coarse.nx;
  return decay_profile(aux, region, col, [&](int ix, int iy, int) {
    return std::max(std::abs(ix / g.rx - bx), std::abs(iy / g.ry - by));
  }, layersX + 1);
}

std::vector<double> temporal_decay(const AuxiliaryBasis& aux, BlockId block, int layersX, int M) {
  const auto& g = *aux.context().grid;
  const Region region = oversample(g, block, layersX, M);
  const int src = g.block_index({region.k0, block.i});
  const Eigen::VectorXd col = solve_column(aux, region, aux.dof(src, 0));
  return decay_profile(aux, region, col, [&](int, int, int it) { return it / g.rt - region.k0; }, region.slabs());
}

}  // namespace stnlmc
