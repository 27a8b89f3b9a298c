#include "stnlmc/experiment.hpp"

#include "stnlmc/io.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stnlmc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SpaceTimeGrid grid_of(const ExperimentConfig& cfg) {
  return build_grid(cfg.coarseX, cfg.coarseY, cfg.coarseT, cfg.refineX, cfg.refineY, cfg.refineT, cfg.domain, cfg.T);
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

std::string path_in(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

}  // namespace

double manufactured_exact(double x, double y, double t) {
  return t * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
}

SourceFn source_function(const std::string& name) {
  if (name == "xyt") return [](double x, double y, double t) { return x * y * t; };
  if (name == "zero") return [](double, double, double) { return 0.0; };
  if (name == "manufactured")
    return [](double x, double y, double t) {
      const double pi = std::numbers::pi;
      return std::sin(pi * x) * std::sin(pi * y) * (1.0 + 2.0 * pi * pi * t);
    };
  throw ConfigError("unknown source '" + name + "'");
}

std::unique_ptr<Problem> make_problem(const SpaceTimeGrid& grid, const PermeabilityField& field, PouMode mode,
                                      PouFreeze freeze, SourceFn f) {
  auto p = std::make_unique<Problem>();
  p->grid = grid;
  p->kappa = std::make_unique<KappaGrid>(field, p->grid);
  p->pou = std::make_unique<PartitionOfUnity>(*p->kappa, mode, freeze);
  p->ctx = {&p->grid, p->kappa.get(), p->pou.get()};
  p->f = std::move(f);
  return p;
}

std::unique_ptr<Problem> make_problem(const ExperimentConfig& cfg) {
  return make_problem(grid_of(cfg), cfg.field(), cfg.pou, cfg.pouFreeze, source_function(cfg.source));
}

TableRun run_table(const ExperimentConfig& cfg, bool writeFiles) {
  cfg.validate();
  auto prob = make_problem(cfg);
  const auto& g = prob->grid;
  spdlog::info("grid: coarse {}x{}x{}, fine {}x{}x{}", g.coarse.nx, g.coarse.ny, g.coarseTime.nt, g.fine.nx, g.fine.ny,
               g.fineTime.nt);
  auto t0 = std::chrono::steady_clock::now();
  const AuxiliaryBasis aux(prob->ctx, cfg.threads);
  const Eigen::VectorXd b = coarse_rhs(aux, prob->f);
  const double auxSeconds = seconds_since(t0);
  spdlog::info("auxiliary basis: {} dofs ({:.2f} s)", aux.size(), auxSeconds);

  t0 = std::chrono::steady_clock::now();
  const auto ref = solve_reference(g, *prob->kappa, prob->f, cfg.theta);
  const BlockField refField = BlockField::from_nodal(ref.u);
  spdlog::info("reference solve: {:.2f} s", seconds_since(t0));
  if (writeFiles) {
    ensure_dir(cfg.outDir);
    for (double t : cfg.snapshots)
      snapshot(refField, t, path_in(cfg.outDir, "reference_t" + format_number(t, 6) + ".vtk"), "u_ref");
  }

  TableRun run;
  for (const auto& lp : cfg.layers) {
    LocalizedOptions opt{lp.x, lp.t, cfg.threads};
    LocalizedStats st;
    const auto cs = assemble_coarse_localized(aux, b, opt, &st);
    run.structure.push_back(check_coarse_structure(cs, aux));
    t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd U = solve_coarse(cs);
    const double coarseSeconds = seconds_since(t0);
    const BlockField ums = downscale_localized(aux, U, opt, &st);
    ErrorReport r = relative_errors(prob->ctx, refField, ums, cfg.fullH1);
    r.layersX = lp.x;
    r.layersT = lp.t;
    r.assembleSeconds = auxSeconds + st.slabs.assembleSeconds;
    r.localSolveSeconds = st.slabs.factorSeconds + st.slabs.solveSeconds;
    r.coarseSolveSeconds = coarseSeconds;
    run.rows.push_back(r);
    run.maxConstraintResidual = std::max(run.maxConstraintResidual, st.maxConstraintResidual);
    spdlog::info("layers {}/{}: L2 {:.4f}%  H1k {:.4f}%  (assemble {:.1f} s, factor {:.1f} s, solve {:.1f} s, "
                 "{} factorizations, coarse {:.2f} s, constraint residual {:.2e})",
                 lp.x, lp.t, r.relL2, r.relH1k, st.slabs.assembleSeconds, st.slabs.factorSeconds, st.slabs.solveSeconds,
                 st.slabs.factorizations, coarseSeconds, st.maxConstraintResidual);
    if (writeFiles) {
      for (double t : cfg.snapshots)
        snapshot(ums, t,
                 path_in(cfg.outDir, "ms_l" + std::to_string(lp.x) + "_" + std::to_string(lp.t) + "_t" +
                                         format_number(t, 6) + ".vtk"),
                 "u_ms");
      write_text(path_in(cfg.outDir, "errors.csv"), errors_csv(run.rows, cfg.timings));
    }
  }
  return run;
}

double l2_error_exact(const NodalField& u, const SourceFn& exact) {
  const auto& g = *u.grid;
  const double hx = g.fine.hx(), hy = g.fine.hy(), dt = g.fineTime.dt();
  const double gp[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double s = 0.0;
  for (int it = 0; it < g.fineTime.nt; ++it)
    for (int iy = 0; iy < g.fine.ny; ++iy)
      for (int ix = 0; ix < g.fine.nx; ++ix)
        for (int a = 0; a < 3; ++a)
          for (int bq = 0; bq < 3; ++bq)
            for (int c = 0; c < 3; ++c) {
              const double xi = gp[a], eta = gp[bq], tau = gp[c];
              double v = 0.0;
              for (int k = 0; k < 4; ++k) {
                const double n = q1::N(k, xi, eta);
                v += n * ((1 - tau) * u.at(ix + (k & 1), iy + (k >> 1), it) + tau * u.at(ix + (k & 1), iy + (k >> 1), it + 1));
              }
              const double e = v - exact(g.fine.domain.x0 + (ix + xi) * hx, g.fine.domain.y0 + (iy + eta) * hy,
                                         (it + tau) * dt);
              s += gw[a] * gw[bq] * gw[c] * e * e;
            }
  return std::sqrt(s * hx * hy * dt);
}

std::vector<ManufacturedRow> run_manufactured(const ExperimentConfig& cfg, bool writeFiles) {
  cfg.validate();
  std::vector<ManufacturedRow> rows;
  const PermeabilityField field = cfg.field();
  for (int r = 0; r < cfg.refinements; ++r) {
    const int m = 1 << r;
    const auto g = build_grid(cfg.coarseX, cfg.coarseY, cfg.coarseT, cfg.refineX * m, cfg.refineY * m,
                              cfg.refineT * m, cfg.domain, cfg.T);
    const KappaGrid kappa(field, g);
    const auto ref = solve_reference(g, kappa, source_function(cfg.source), cfg.theta);
    const double err = l2_error_exact(ref.u, manufactured_exact);
    const double order = rows.empty() ? std::nan("") : std::log2(rows.back().l2Error / err);
    rows.push_back({g.fine.hx(), g.fineTime.dt(), err, order});
    spdlog::info("manufactured: h={} dt={} L2 error={:.6e} order={:.3f}", g.fine.hx(), g.fineTime.dt(), err, order);
  }
  if (writeFiles) {
    ensure_dir(cfg.outDir);
    std::ostringstream o;
    o << "h,dt,l2_error,order\n";
    for (const auto& r : rows)
      o << format_number(r.h) << "," << format_number(r.dt) << "," << format_number(r.l2Error) << ","
        << (std::isnan(r.order) ? std::string("") : format_number(r.order)) << "\n";
    write_text(path_in(cfg.outDir, "manufactured.csv"), o.str());
  }
  return rows;
}

OracleRun run_oracle(const ExperimentConfig& cfg, bool writeFiles) {
  cfg.validate();
  auto prob = make_problem(cfg);
  const AuxiliaryBasis aux(prob->ctx, cfg.threads);
  const Eigen::VectorXd b = coarse_rhs(aux, prob->f);
  OracleRun out;
  out.coarseDofs = aux.size();
  auto t0 = std::chrono::steady_clock::now();
  const auto glo = solve_global_field(aux, b);
  spdlog::info("global solve: {:.2f} s", seconds_since(t0));
  const auto lp = cfg.layers.front();
  LocalizedOptions opt{lp.x, lp.t, cfg.threads};
  LocalizedStats st;
  t0 = std::chrono::steady_clock::now();
  const auto cs = assemble_coarse_localized(aux, b, opt, &st);
  const Eigen::VectorXd U = solve_coarse(cs);
  BlockField diff = downscale_localized(aux, U, opt, &st);
  spdlog::info("localized solve: {:.2f} s", seconds_since(t0));
  diff -= glo.field;
  out.relVDiff = std::sqrt(norm2(prob->ctx, diff, NormKind::V) / norm2(prob->ctx, glo.field, NormKind::V));
  out.relUDiff = (U - glo.U).norm() / glo.U.norm();
  out.maxConstraintResidual = st.maxConstraintResidual;
  spdlog::info("oracle: relative V difference {:.3e}, relative U difference {:.3e}, constraint residual {:.2e}",
               out.relVDiff, out.relUDiff, out.maxConstraintResidual);
  if (writeFiles) {
    ensure_dir(cfg.outDir);
    write_text(path_in(cfg.outDir, "oracle.csv"),
               "coarse_dofs,rel_v_diff,rel_u_diff,max_constraint_residual\n" + std::to_string(out.coarseDofs) + "," +
                   format_number(out.relVDiff) + "," + format_number(out.relUDiff) + "," +
                   format_number(out.maxConstraintResidual) + "\n");
  }
  return out;
}

ScalingRun run_scaling(const PermeabilityField& field, const SourceFn& f, int c0, int fineX, int fineT,
                       double theta) {
  ScalingRun out;
  for (int c : {c0, 2 * c0}) {
    const int slabs = c * c;
    if (fineX % c != 0 || fineT % slabs != 0) throw std::invalid_argument("fine grid does not nest the coarse grids");
    auto prob = make_problem(build_grid(c, c, slabs, fineX / c, fineX / c, fineT / slabs, Rect{}, 1.0), field,
                             PouMode::Bilinear, PouFreeze::FineInterval, f);
    const AuxiliaryBasis aux(prob->ctx);
    const auto glo = solve_global_field(aux, coarse_rhs(aux, prob->f));
    const BlockField ref = BlockField::from_nodal(solve_reference(prob->grid, *prob->kappa, prob->f, theta).u);
    BlockField diff = glo.field;
    diff -= ref;
    const double relV = std::sqrt(norm2(prob->ctx, diff, NormKind::V) / norm2(prob->ctx, ref, NormKind::V));
    out.levels.push_back({c, slabs, relV});
    spdlog::info("scaling: H=1/{} with {} slabs, relative V error {:.4e}", c, slabs, relV);
  }
  out.order = std::log2(out.levels[0].relV / out.levels[1].relV);
  spdlog::info("scaling: observed order {:.3f}", out.order);
  return out;
}

DecayRun run_decay(const ExperimentConfig& cfg, bool writeFiles) {
  cfg.validate();
  auto prob = make_problem(cfg);
  const AuxiliaryBasis aux(prob->ctx, cfg.threads);
  const auto lp = cfg.layers.front();
  DecayRun out;
  for (const auto& blk : cfg.decayBlocks) {
    auto es = spatial_decay(aux, blk, lp.x);
    out.entries.push_back({"space", blk, es, fit_log_linear(es, 1)});
    auto et = temporal_decay(aux, blk, lp.x, lp.t);
    out.entries.push_back({"time", blk, et, fit_log_linear(et, 1)});
  }
  for (const auto& e : out.entries)
    spdlog::info("decay {} block (n={}, i={}): slope {:.3f}, R2 {:.4f}", e.kind, e.block.n, e.block.i, e.fit.slope,
                 e.fit.r2);
  if (writeFiles) {
    ensure_dir(cfg.outDir);
    std::ostringstream o, f;
    o << "kind,slab,cell,layer,energy\n";
    f << "kind,slab,cell,slope,r2\n";
    for (const auto& e : out.entries) {
      for (std::size_t k = 0; k < e.energies.size(); ++k)
        o << e.kind << "," << e.block.n << "," << e.block.i << "," << k << "," << format_number(e.energies[k]) << "\n";
      f << e.kind << "," << e.block.n << "," << e.block.i << "," << format_number(e.fit.slope) << ","
        << format_number(e.fit.r2) << "\n";
    }
    write_text(path_in(cfg.outDir, "decay.csv"), o.str());
    write_text(path_in(cfg.outDir, "decay_fit.csv"), f.str());
  }
  return out;
}

int run(const ExperimentConfig& cfg) {
  if (cfg.study == "table") run_table(cfg);
  else if (cfg.study == "manufactured") run_manufactured(cfg);
  else if (cfg.study == "oracle") run_oracle(cfg);
  else if (cfg.study == "decay") run_decay(cfg);
  else throw ConfigError("unknown study '" + cfg.study + "'");
  return 0;
}

}  // namespace stnlmc
