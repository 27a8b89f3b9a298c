#pragma once

#include "stnlmc/config.hpp"
#include "stnlmc/metrics.hpp"
#include "stnlmc/nlmc.hpp"
#include "stnlmc/reference.hpp"

#include <memory>

namespace stnlmc {

SourceFn source_function(const std::string& name);
double manufactured_exact(double x, double y, double t);

// Grid, sampled permeability and partition of unity with stable addresses.
struct Problem {
  SpaceTimeGrid grid;
  std::unique_ptr<KappaGrid> kappa;
  std::unique_ptr<PartitionOfUnity> pou;
  FormContext ctx;
  SourceFn f;
};
std::unique_ptr<Problem> make_problem(const ExperimentConfig& cfg);
std::unique_ptr<Problem> make_problem(const SpaceTimeGrid& grid, const PermeabilityField& field, PouMode mode,
                                      PouFreeze freeze, SourceFn f);

struct TableRun {
  std::vector<ErrorReport> rows;
  double maxConstraintResidual = 0.0;
  std::vector<StructureCheck> structure;
};
TableRun run_table(const ExperimentConfig& cfg, bool writeFiles = true);

struct ManufacturedRow {
  double h, dt, l2Error, order;
};
std::vector<ManufacturedRow> run_manufactured(const ExperimentConfig& cfg, bool writeFiles = true);

struct OracleRun {
  double relVDiff = 0.0, relUDiff = 0.0, maxConstraintResidual = 0.0;
  int coarseDofs = 0;
};
OracleRun run_oracle(const ExperimentConfig& cfg, bool writeFiles = true);

struct DecayRun {
  struct Entry {
    std::string kind;  // space | time
    BlockId block;
    std::vector<double> energies;
    LogLinearFit fit;
  };
  std::vector<Entry> entries;
};
DecayRun run_decay(const ExperimentConfig& cfg, bool writeFiles = true);

// Global-method error against the reference with the coarse time step tied to H^2: the coarse grid goes
// from c0 x c0 x c0^2 to 2c0 x 2c0 x 4c0^2 on a fixed fine grid of fineX^2 x fineT cells.
struct ScalingRun {
  struct Level {
    int coarse = 0, slabs = 0;
    double relV = 0.0;
  };
  std::vector<Level> levels;
  double order = 0.0;
};
ScalingRun run_scaling(const PermeabilityField& field, const SourceFn& f, int c0, int fineX, int fineT,
                       double theta = 0.5);

// Dispatches on cfg.study; returns a process exit status.
int run(const ExperimentConfig& cfg);

// Space-time L2 error of a nodal field against an analytic function (3-point Gauss per axis).
double l2_error_exact(const NodalField& u, const SourceFn& exact);

}  // namespace stnlmc
