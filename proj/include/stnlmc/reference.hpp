#pragma once

#include "stnlmc/field.hpp"
#include "stnlmc/forms.hpp"

namespace stnlmc {

struct ReferenceSolution {
  NodalField u;
  double theta = 0.5;
  std::size_t fieldHash = 0;
};

// Theta scheme on the fine Q1 mesh: (M/dt + theta A_k) u_{k+1} = (M/dt - (1-theta) A_k) u_k + fbar_k,
// A_k with kappa frozen on fine interval k, fbar_k = theta F(t_{k+1}) + (1-theta) F(t_k).
ReferenceSolution solve_reference(const SpaceTimeGrid& grid, const KappaGrid& kappa, const SourceFn& f,
                                  double theta = 0.5);

}  // namespace stnlmc
