#pragma once

#include "stnlmc/grid.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace stnlmc {

struct Box {
  double x0, x1, y0, y1, t0, t1;
  bool contains(double x, double y, double t) const;
};

struct Channel {
  std::string name;
  std::vector<Box> boxes;
  double value = 1.0;
};

class PermeabilityField {
public:
  explicit PermeabilityField(double matrixValue = 1.0, std::vector<Channel> channels = {});
  double matrix_value() const { return matrix_; }
  const std::vector<Channel>& channels() const { return channels_; }
  double kappa_min() const { return kmin_; }
  double kappa_max() const { return kmax_; }
  // Value of the last channel whose box union contains the point, else the matrix value.
  double value_at(double x, double y, double t) const;

private:
  double matrix_;
  std::vector<Channel> channels_;
  double kmin_, kmax_;
};

// Permeability sampled at fine space-time cell midpoints.
class KappaGrid {
public:
  KappaGrid(const PermeabilityField& field, const SpaceTimeGrid& grid);
  const SpaceTimeGrid& grid() const { return *grid_; }
  double matrix_value() const { return matrix_; }
  double at(int ix, int iy, int it) const { return v_[index(ix, iy, it)]; }
  bool is_channel(int ix, int iy, int it) const { return at(ix, iy, it) > matrix_; }
  std::size_t index(int ix, int iy, int it) const {
    return (static_cast<std::size_t>(it) * grid_->fine.ny + iy) * grid_->fine.nx + ix;
  }
  const std::vector<double>& values() const { return v_; }

private:
  const SpaceTimeGrid* grid_;
  double matrix_;
  std::vector<double> v_;
};

double kappa_at(const KappaGrid& kappa, int ix, int iy, int it);

enum class PouMode { Bilinear, Multiscale };
enum class PouFreeze { FineInterval, CoarseSlab };

// Two-point Gauss abscissae on [0, 1].
inline constexpr std::array<double, 2> kGauss01 = {0.21132486540518711775, 0.78867513459481288225};

// Partition of unity over coarse space nodes. Point queries take a fine cell and local
// coordinates (xi, eta) in [0,1]^2 within that fine cell.
class PartitionOfUnity {
public:
  PartitionOfUnity(const KappaGrid& kappa, PouMode mode, PouFreeze freeze = PouFreeze::FineInterval);
  PouMode mode() const { return mode_; }

  struct Eval {
    std::array<int, 4> node;  // coarse vertex indices: (0,0),(1,0),(0,1),(1,1) corners of the coarse cell
    std::array<double, 4> value;
    std::array<std::array<double, 2>, 4> grad;
  };
  Eval eval(int ix, int iy, int it, double xi, double eta) const;
  double grad_sq_sum(int ix, int iy, int it, double xi, double eta) const;
  // Sum over active nodes of |grad chi|^2 at the four spatial Gauss points of a fine cell,
  // ordered q = 2*b + a for abscissae (kGauss01[a], kGauss01[b]).
  const double* gauss_grad_sq(int ix, int iy, int it) const;
  // kappa * gauss_grad_sq
  std::array<double, 4> tilde_kappa_gauss(int ix, int iy, int it) const;
  double tilde_kappa_at(int ix, int iy, int it, double xi, double eta) const;

private:
  const KappaGrid* kappa_;
  const SpaceTimeGrid* grid_;
  PouMode mode_;
  PouFreeze freeze_;
  std::vector<double> bilinearTable_;  // per fine position in coarse cell, 4 Gauss values
  // Multiscale data: per (coarse cell, fine interval) pattern index; per pattern nodal values
  // of the four corner functions on the coarse cell's fine nodes, plus Gauss tables.
  std::vector<int> pattern_;
  std::vector<std::vector<double>> nodal_;
  std::vector<std::vector<double>> msTable_;

  void build_multiscale();
  int pattern_of(int ix, int iy, int it) const;
};

struct Continuum {
  enum class Kind { Matrix, Channel };
  BlockId block;
  Kind kind = Kind::Matrix;
  std::vector<int> cells;  // local cell index (lt*ry + ly)*rx + lx within the block
  double measure = 0.0;    // kappa-tilde weighted space-time measure
};

// Continua of one block; matrix continuum first when present, then channel components
// in scan order. labels (optional) receives the continuum index of every local cell.
std::vector<Continuum> extract_continua(const KappaGrid& kappa, const PartitionOfUnity& pou, BlockId block,
                                        std::vector<std::int32_t>* labels = nullptr);

// Kappa-tilde weighted measure of one fine space-time cell (two-point Gauss).
double cell_weighted_measure(const KappaGrid& kappa, const PartitionOfUnity& pou, int ix, int iy, int it);

}  // namespace stnlmc
