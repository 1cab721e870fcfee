#pragma once

#include <string>

#include "sgldv/truncation.hpp"

namespace sgldv {

struct CheegerResult {
  double rho = 0.0;
  bool heuristic = false;  // 2D cut families give an upper bound
  std::string cut;         // description of the minimizing cut
};

// Minimum of boundary density over the smaller side's mass. 1D cuts: every
// threshold and interval with node endpoints, plus unions of two or three
// intervals over candidate endpoints (density local minima and quantiles).
// 2D cuts: axis-aligned half-planes and disks.
CheegerResult cheeger_constant(const GridDensity& density);

}  // namespace sgldv
