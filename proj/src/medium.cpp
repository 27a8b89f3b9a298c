#include "stnlmc/medium.hpp"

#include "stnlmc/q1.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace stnlmc {

namespace {
constexpr double kBoxTol = 1e-12;
}

bool Box::contains(double x, double y, double t) const {
  return x >= x0 - kBoxTol && x <= x1 + kBoxTol && y >= y0 - kBoxTol && y <= y1 + kBoxTol &&
         t >= t0 - kBoxTol && t <= t1 + kBoxTol;
}

PermeabilityField::PermeabilityField(double matrixValue, std::vector<Channel> channels)
    : matrix_(matrixValue), channels_(std::move(channels)), kmin_(matrixValue), kmax_(matrixValue) {
  if (!(matrix_ > 0.0)) throw std::invalid_argument("permeability: matrix value must be positive");
  for (const auto& c : channels_) {
    if (!(c.value > 0.0)) throw std::invalid_argument("permeability: channel value must be positive");
    for (const auto& b : c.boxes)
      if (!(b.x1 > b.x0 && b.y1 > b.y0 && b.t1 > b.t0))
        throw std::invalid_argument("permeability: box with non-positive extent in channel " + c.name);
    kmin_ = std::min(kmin_, c.value);
    kmax_ = std::max(kmax_, c.value);
  }
}

double PermeabilityField::value_at(double x, double y, double t) const {
  double v = matrix_;
  for (const auto& c : channels_)
    for (const auto& b : c.boxes)
      if (b.contains(x, y, t)) {
        v = c.value;
        break;
      }
  return v;
}

KappaGrid::KappaGrid(const PermeabilityField& field, const SpaceTimeGrid& grid)
    : grid_(&grid), matrix_(field.matrix_value()) {
  const auto& f = grid.fine;
  const auto& ft = grid.fineTime;
  v_.resize(static_cast<std::size_t>(f.nx) * f.ny * ft.nt);
  for (int it = 0; it < ft.nt; ++it) {
    const double t = (it + 0.5) * ft.dt();
    for (int iy = 0; iy < f.ny; ++iy) {
      const double y = f.domain.y0 + (iy + 0.5) * f.hy();
      for (int ix = 0; ix < f.nx; ++ix)
        v_[index(ix, iy, it)] = field.value_at(f.domain.x0 + (ix + 0.5) * f.hx(), y, t);
    }
  }
}

double kappa_at(const KappaGrid& kappa, int ix, int iy, int it) { return kappa.at(ix, iy, it); }

PartitionOfUnity::PartitionOfUnity(const KappaGrid& kappa, PouMode mode, PouFreeze freeze)
    : kappa_(&kappa), grid_(&kappa.grid()), mode_(mode), freeze_(freeze) {
  const auto& g = *grid_;
  bilinearTable_.resize(static_cast<std::size_t>(g.rx) * g.ry * 4);
  const double Hx = g.coarse.hx(), Hy = g.coarse.hy();
  for (int ly = 0; ly < g.ry; ++ly)
    for (int lx = 0; lx < g.rx; ++lx)
      for (int q = 0; q < 4; ++q) {
        const double X = (lx + q1::gauss_xi(q)) / g.rx, Y = (ly + q1::gauss_eta(q)) / g.ry;
        double s = 0.0;
        for (int c = 0; c < 4; ++c) {
          const auto d = q1::dN(c, X, Y, Hx, Hy);
          s += d[0] * d[0] + d[1] * d[1];
        }
        bilinearTable_[(ly * g.rx + lx) * 4 + q] = s;
      }
  if (mode_ == PouMode::Multiscale) build_multiscale();
}

int PartitionOfUnity::pattern_of(int ix, int iy, int it) const {
  const auto& g = *grid_;
  const int c = g.coarse.cell(ix / g.rx, iy / g.ry);
  return pattern_[static_cast<std::size_t>(c) * g.fineTime.nt + it];
}

void PartitionOfUnity::build_multiscale() {
  const auto& g = *grid_;
  const int rx = g.rx, ry = g.ry, nnx = rx + 1, nny = ry + 1;
  const double hx = g.fine.hx(), hy = g.fine.hy();
  const int nft = g.fineTime.nt;
  pattern_.assign(static_cast<std::size_t>(g.coarse.cells()) * nft, -1);
  std::map<std::vector<double>, int> known;

  const auto K0 = q1::weighted_stiffness(hx, hy, q1::kOnes);
  std::vector<int> interior(nnx * nny, -1);
  int nI = 0;
  for (int jy = 1; jy < nny - 1; ++jy)
    for (int jx = 1; jx < nnx - 1; ++jx) interior[jy * nnx + jx] = nI++;

  for (int c = 0; c < g.coarse.cells(); ++c) {
    const int cx = c % g.coarse.nx, cy = c / g.coarse.nx;
    for (int it = 0; it < nft; ++it) {
      int src = it;
      if (freeze_ == PouFreeze::CoarseSlab) src = std::min((it / g.rt) * g.rt + g.rt / 2, nft - 1);
      std::vector<double> key(static_cast<std::size_t>(rx) * ry);
      for (int ly = 0; ly < ry; ++ly)
        for (int lx = 0; lx < rx; ++lx) key[ly * rx + lx] = kappa_->at(cx * rx + lx, cy * ry + ly, src);
      auto [pos, inserted] = known.try_emplace(key, static_cast<int>(nodal_.size()));
      pattern_[static_cast<std::size_t>(c) * nft + it] = pos->second;
      if (!inserted) continue;

      // Local harmonic extension of the affine corner traces, one solve per corner function.
      std::vector<Eigen::Triplet<double>> trip;
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nI, 4);
      std::vector<double> nod(4 * static_cast<std::size_t>(nnx) * nny);
      for (int jy = 0; jy < nny; ++jy)
        for (int jx = 0; jx < nnx; ++jx)
          for (int corner = 0; corner < 4; ++corner)
            nod[corner * nnx * nny + jy * nnx + jx] =
                q1::N(corner, static_cast<double>(jx) / rx, static_cast<double>(jy) / ry);
      for (int ly = 0; ly < ry; ++ly)
        for (int lx = 0; lx < rx; ++lx) {
          const double k = key[ly * rx + lx];
          int ln[4];
          for (int a = 0; a < 4; ++a) ln[a] = (ly + (a >> 1)) * nnx + lx + (a & 1);
          for (int a = 0; a < 4; ++a) {
            const int ia = interior[ln[a]];
            if (ia < 0) continue;
            for (int b = 0; b < 4; ++b) {
              const double v = k * K0[a * 4 + b];
              const int ib = interior[ln[b]];
              if (ib >= 0)
                trip.emplace_back(ia, ib, v);
              else
                for (int corner = 0; corner < 4; ++corner)
                  rhs(ia, corner) -= v * nod[corner * nnx * nny + ln[b]];
            }
          }
        }
      if (nI > 0) {
        Eigen::SparseMatrix<double> A(nI, nI);
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
        if (ldlt.info() != Eigen::Success)
          throw std::runtime_error("multiscale partition of unity: singular local solve in coarse cell " +
                                   std::to_string(c) + ", fine interval " + std::to_string(it));
        const Eigen::MatrixXd sol = ldlt.solve(rhs);
        for (int jy = 1; jy < nny - 1; ++jy)
          for (int jx = 1; jx < nnx - 1; ++jx)
            for (int corner = 0; corner < 4; ++corner)
              nod[corner * nnx * nny + jy * nnx + jx] = sol(interior[jy * nnx + jx], corner);
      }
      nodal_.push_back(std::move(nod));

      std::vector<double> table(static_cast<std::size_t>(rx) * ry * 4);
      const auto& nv = nodal_.back();
      for (int ly = 0; ly < ry; ++ly)
        for (int lx = 0; lx < rx; ++lx)
          for (int q = 0; q < 4; ++q) {
            double s = 0.0;
            for (int corner = 0; corner < 4; ++corner) {
              double gx = 0.0, gy = 0.0;
              for (int a = 0; a < 4; ++a) {
                const double v = nv[corner * nnx * nny + (ly + (a >> 1)) * nnx + lx + (a & 1)];
                const auto d = q1::dN(a, q1::gauss_xi(q), q1::gauss_eta(q), hx, hy);
                gx += v * d[0];
                gy += v * d[1];
              }
              s += gx * gx + gy * gy;
            }
            table[(ly * rx + lx) * 4 + q] = s;
          }
      msTable_.push_back(std::move(table));
    }
  }
  spdlog::debug("multiscale partition of unity: {} distinct local patterns", nodal_.size());
}

PartitionOfUnity::Eval PartitionOfUnity::eval(int ix, int iy, int it, double xi, double eta) const {
  const auto& g = *grid_;
  const int cx = ix / g.rx, cy = iy / g.ry, lx = ix % g.rx, ly = iy % g.ry;
  Eval e;
  for (int c = 0; c < 4; ++c) e.node[c] = g.coarse.vertex(cx + (c & 1), cy + (c >> 1));
  if (mode_ == PouMode::Bilinear) {
    const double X = (lx + xi) / g.rx, Y = (ly + eta) / g.ry;
    for (int c = 0; c < 4; ++c) {
      e.value[c] = q1::N(c, X, Y);
      e.grad[c] = q1::dN(c, X, Y, g.coarse.hx(), g.coarse.hy());
    }
    return e;
  }
  const int nnx = g.rx + 1, nny = g.ry + 1;
  const auto& nv = nodal_[pattern_of(ix, iy, it)];
  for (int c = 0; c < 4; ++c) {
    double v = 0.0, gx = 0.0, gy = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double nval = nv[c * nnx * nny + (ly + (a >> 1)) * nnx + lx + (a & 1)];
      const auto d = q1::dN(a, xi, eta, g.fine.hx(), g.fine.hy());
      v += nval * q1::N(a, xi, eta);
      gx += nval * d[0];
      gy += nval * d[1];
    }
    e.value[c] = v;
    e.grad[c] = {gx, gy};
  }
  return e;
}

double PartitionOfUnity::grad_sq_sum(int ix, int iy, int it, double xi, double eta) const {
  const auto e = eval(ix, iy, it, xi, eta);
  double s = 0.0;
  for (const auto& d : e.grad) s += d[0] * d[0] + d[1] * d[1];
  return s;
}

const double* PartitionOfUnity::gauss_grad_sq(int ix, int iy, int it) const {
  const auto& g = *grid_;
  const std::size_t pos = static_cast<std::size_t>((iy % g.ry) * g.rx + ix % g.rx) * 4;
  if (mode_ == PouMode::Bilinear) return bilinearTable_.data() + pos;
  return msTable_[pattern_of(ix, iy, it)].data() + pos;
}

std::array<double, 4> PartitionOfUnity::tilde_kappa_gauss(int ix, int iy, int it) const {
  const double k = kappa_->at(ix, iy, it);
  const double* s = gauss_grad_sq(ix, iy, it);
  return {k * s[0], k * s[1], k * s[2], k * s[3]};
}

double PartitionOfUnity::tilde_kappa_at(int ix, int iy, int it, double xi, double eta) const {
  return kappa_->at(ix, iy, it) * grad_sq_sum(ix, iy, it, xi, eta);
}

double cell_weighted_measure(const KappaGrid& kappa, const PartitionOfUnity& pou, int ix, int iy, int it) {
  const auto& g = kappa.grid();
  const auto tk = pou.tilde_kappa_gauss(ix, iy, it);
  return 0.25 * g.fine.hx() * g.fine.hy() * g.fineTime.dt() * (tk[0] + tk[1] + tk[2] + tk[3]);
}

std::vector<Continuum> extract_continua(const KappaGrid& kappa, const PartitionOfUnity& pou, BlockId block,
                                        std::vector<std::int32_t>* labelsOut) {
  const auto& g = kappa.grid();
  if (block.n < 0 || block.n >= g.coarseTime.nt || block.i < 0 || block.i >= g.coarse.cells())
    throw std::out_of_range("extract_continua: block index");
  const int rx = g.rx, ry = g.ry, rt = g.rt;
  const int cx = block.i % g.coarse.nx, cy = block.i / g.coarse.nx;
  const int ncell = rx * ry * rt;
  auto gx = [&](int l) { return cx * rx + l % rx; };
  auto gy = [&](int l) { return cy * ry + (l / rx) % ry; };
  auto gt = [&](int l) { return block.n * rt + l / (rx * ry); };

  std::vector<std::int32_t> label(ncell, -1);
  bool hasMatrix = false;
  for (int l = 0; l < ncell; ++l)
    if (!kappa.is_channel(gx(l), gy(l), gt(l))) hasMatrix = true;

  std::vector<Continuum> out;
  if (hasMatrix) {
    Continuum m;
    m.block = block;
    m.kind = Continuum::Kind::Matrix;
    for (int l = 0; l < ncell; ++l)
      if (!kappa.is_channel(gx(l), gy(l), gt(l))) {
        label[l] = 0;
        m.cells.push_back(l);
      }
    out.push_back(std::move(m));
  }
  std::vector<int> stack;
  for (int seed = 0; seed < ncell; ++seed) {
    if (label[seed] >= 0) continue;
    const int id = static_cast<int>(out.size());
    Continuum c;
    c.block = block;
    c.kind = Continuum::Kind::Channel;
    label[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const int l = stack.back();
      stack.pop_back();
      c.cells.push_back(l);
      const int lx = l % rx, ly = (l / rx) % ry, lt = l / (rx * ry);
      const int nb[6][3] = {{lx - 1, ly, lt}, {lx + 1, ly, lt}, {lx, ly - 1, lt},
                            {lx, ly + 1, lt}, {lx, ly, lt - 1}, {lx, ly, lt + 1}};
      for (const auto& p : nb) {
        if (p[0] < 0 || p[0] >= rx || p[1] < 0 || p[1] >= ry || p[2] < 0 || p[2] >= rt) continue;
        const int m = (p[2] * ry + p[1]) * rx + p[0];
        if (label[m] >= 0) continue;
        label[m] = id;
        stack.push_back(m);
      }
    }
    std::sort(c.cells.begin(), c.cells.end());
    out.push_back(std::move(c));
  }
  if (!hasMatrix)
    spdlog::info("block (n={}, i={}) is fully covered by channels; matrix continuum omitted", block.n, block.i);

  for (auto& c : out) {
    double m = 0.0;
    for (int l : c.cells) m += cell_weighted_measure(kappa, pou, gx(l), gy(l), gt(l));
    if (!(m > 0.0))
      throw std::runtime_error("extract_continua: zero weighted measure in block (n=" + std::to_string(block.n) +
                               ", i=" + std::to_string(block.i) + ")");
    c.measure = m;
  }
  if (labelsOut) *labelsOut = std::move(label);
  return out;
}

}  // namespace stnlmc
