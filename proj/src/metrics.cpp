#include "stnlmc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace stnlmc {

double cell_energy(const FormContext& ctx, int ix, int iy, int it, const double v[8], NormKind kind) {
  const CellMatrices cm = cell_matrices(ctx, ix, iy, it);
  const TimeMatrices tm(ctx.grid->fineTime.dt());
  double s = 0.0;
  for (int ta = 0; ta < 2; ++ta)
    for (int a = 0; a < 4; ++a)
      for (int tb = 0; tb < 2; ++tb)
        for (int b = 0; b < 4; ++b) {
          const int ab = a * 4 + b;
          double m = 0.0;
          switch (kind) {
            case NormKind::L2: m = tm.mass[ta][tb] * cm.mass[ab]; break;
            case NormKind::S: m = tm.mass[ta][tb] * cm.wMass[ab]; break;
            case NormKind::W: m = tm.mass[ta][tb] * cm.stiff[ab]; break;
            case NormKind::E: m = tm.stiff[ta][tb] * cm.invMass[ab]; break;
            case NormKind::V: m = tm.mass[ta][tb] * cm.stiff[ab] + tm.stiff[ta][tb] * cm.invMass[ab]; break;
          }
          s += v[ta * 4 + a] * m * v[tb * 4 + b];
        }
  return s;
}

double norm2(const FormContext& ctx, const BlockField& f, NormKind kind,
             const std::function<bool(int, int, int)>& cellFilter) {
  const auto& g = *ctx.grid;
  double s = 0.0;
  double v[8];
  for (int it = 0; it < g.fineTime.nt; ++it)
    for (int iy = 0; iy < g.fine.ny; ++iy)
      for (int ix = 0; ix < g.fine.nx; ++ix) {
        if (cellFilter && !cellFilter(ix, iy, it)) continue;
        f.cell_values(ix, iy, it, v);
        bool zero = true;
        for (double x : v) zero = zero && x == 0.0;
        if (!zero) s += cell_energy(ctx, ix, iy, it, v, kind);
      }
  return s;
}

double norm(const FormContext& ctx, const BlockField& f, NormKind kind) { return std::sqrt(norm2(ctx, f, kind)); }

std::vector<double> layer_energies(const FormContext& ctx, const FineSpace& space, const Eigen::VectorXd& vec,
                                   NormKind kind, const std::function<int(int, int, int)>& layerOf, int layers) {
  if (vec.size() != space.size()) throw std::invalid_argument("layer_energies: vector size mismatch");
  std::vector<double> out(layers, 0.0);
  double v[8];
  for (int it = space.first_interval(); it < space.end_interval(); ++it)
    for (int iy = space.gy0(); iy < space.gy1(); ++iy)
      for (int ix = space.gx0(); ix < space.gx1(); ++ix) {
        const int layer = layerOf(ix, iy, it);
        if (layer < 0 || layer >= layers) continue;
        for (int tau = 0; tau < 2; ++tau)
          for (int c = 0; c < 4; ++c) {
            const int d = space.dof(ix + (c & 1), iy + (c >> 1), it + tau, it);
            v[tau * 4 + c] = d < 0 ? 0.0 : vec[d];
          }
        out[layer] += cell_energy(ctx, ix, iy, it, v, kind);
      }
  return out;
}

ErrorReport relative_errors(const FormContext& ctx, const BlockField& reference, const BlockField& multiscale,
                            bool fullH1) {
  BlockField diff = reference;
  diff -= multiscale;
  const double refL2 = norm2(ctx, reference, NormKind::L2);
  const double refW = norm2(ctx, reference, NormKind::W);
  if (!(refL2 > 0.0)) throw std::invalid_argument("relative_errors: zero reference norm");
  const double dL2 = norm2(ctx, diff, NormKind::L2);
  const double dW = norm2(ctx, diff, NormKind::W);
  ErrorReport r;
  r.relL2 = 100.0 * std::sqrt(dL2 / refL2);
  r.relH1k = fullH1 ? 100.0 * std::sqrt((dW + dL2) / (refW + refL2)) : 100.0 * std::sqrt(dW / refW);
  return r;
}

LogLinearFit fit_log_linear(const std::vector<double>& values, std::size_t first) {
  const std::size_t n = values.size() > first ? values.size() - first : 0;
  LogLinearFit fit;
  if (n < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < values.size(); ++k) {
    const double x = static_cast<double>(k), y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  fit.slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / dn;
  const double mean = sy / dn;
  double ssTot = 0, ssRes = 0;
  for (std::size_t k = first; k < values.size(); ++k) {
    const double y = std::log(values[k]);
    const double yh = fit.intercept + fit.slope * static_cast<double>(k);
    ssTot += (y - mean) * (y - mean);
    ssRes += (y - yh) * (y - yh);
  }
  fit.r2 = ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
  return fit;
}

}  // namespace stnlmc
