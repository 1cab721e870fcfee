#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sgldv/discretized_kernel.hpp"

namespace sgldv {

struct ConductanceResult {
  double phi = 0.0;
  bool exhaustive = false;  // false: minimum over a cut family, an upper bound
  std::vector<int> argmin;  // states in the minimizing set
  std::string family;
};

inline constexpr int kExhaustiveStates = 20;

// Stationary law by power iteration on the lazy chain.
Vector stationary_distribution(const DiscretizedKernel& kernel, double tol = 1e-14,
                               int max_iter = 1000000);

void validate_stochastic(const DiscretizedKernel& kernel, double tol = 1e-10);

// phi = min_A flow(A -> A^c) / min(pi(A), pi(A^c)). Exhaustive up to
// kExhaustiveStates states; otherwise intervals of the state order (1D) or
// axis-aligned half-planes (2D).
ConductanceResult conductance(const DiscretizedKernel& kernel);

// Brute force over every nonempty proper subset; for cross-checks.
ConductanceResult conductance_exhaustive(const DiscretizedKernel& kernel, const Vector& pi);

}  // namespace sgldv
