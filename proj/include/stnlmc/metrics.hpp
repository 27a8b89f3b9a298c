#pragma once

#include "stnlmc/field.hpp"
#include "stnlmc/forms.hpp"

#include <functional>
#include <vector>

namespace stnlmc {

enum class NormKind { L2, S, W, V, E };  // E: the kappa-tilde^{-1} time-derivative part of V

// Squared energy of one fine cell from its 8 nodal values [tau*4 + corner].
double cell_energy(const FormContext& ctx, int ix, int iy, int it, const double v[8], NormKind kind);

// Squared norm over all cells (or those accepted by the filter).
double norm2(const FormContext& ctx, const BlockField& f, NormKind kind,
             const std::function<bool(int, int, int)>& cellFilter = {});
double norm(const FormContext& ctx, const BlockField& f, NormKind kind);

// Squared energies of a vector of a fine space, grouped by layer index (layerOf < 0 skips the cell).
std::vector<double> layer_energies(const FormContext& ctx, const FineSpace& space, const Eigen::VectorXd& v,
                                   NormKind kind, const std::function<int(int, int, int)>& layerOf, int layers);

struct ErrorReport {
  int layersX = 0, layersT = 0;
  double relL2 = 0.0;   // percent
  double relH1k = 0.0;  // percent
  double assembleSeconds = 0.0, localSolveSeconds = 0.0, coarseSolveSeconds = 0.0;
};

// 100 |ref - ms| / |ref| in L2 and in the kappa-weighted gradient norm (W); fullH1 adds the L2 part.
ErrorReport relative_errors(const FormContext& ctx, const BlockField& reference, const BlockField& multiscale,
                            bool fullH1 = false);

struct LogLinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
// Least-squares fit of log(values[k]) against k for k in [first, values.size()).
LogLinearFit fit_log_linear(const std::vector<double>& values, std::size_t first = 0);

}  // namespace stnlmc
