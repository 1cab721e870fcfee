#pragma once

#include <cstdint>
#include <vector>

#include "sgldv/rng.hpp"
#include "sgldv/targets.hpp"

namespace sgldv {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1000000;

// Sorted distinct component indices.
struct MiniBatch {
  std::vector<int> indices;
  int size() const { return static_cast<int>(indices.size()); }
};

// All size-B subsets of [0, n) in lexicographic order, each with weight 1/count.
struct BatchEnumeration {
  int n = 0;
  int B = 0;
  std::vector<MiniBatch> batches;
  double weight() const { return 1.0 / static_cast<double>(batches.size()); }
};

// binomial(n, k) in floating point (exact below 2^53).
double binomial(int n, int k);

// Uniform size-B subset by partial Fisher-Yates. B == n returns the full batch
// without consuming randomness.
MiniBatch draw_batch(int n, int B, RngStream& rng);

void validate_batch(const MiniBatch& batch, int n);

Vector stochastic_grad(const TargetModel& model, const Vector& x, const MiniBatch& batch);

BatchEnumeration enumerate_batches(int n, int B, std::uint64_t cap = kDefaultEnumerationCap);

struct MgfCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool exact = true;
  double std_error = 0.0;  // Monte Carlo standard error when not exact
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12); }
};

// lhs = E_I exp(<a, g(x, I) - grad f(x)>), rhs = exp(M^2 |a|^2 / B), M = L R + G.
MgfCheck mgf_bound_check(const TargetModel& model, const Vector& x, const Vector& a, double R,
                         int B, std::uint64_t cap = kDefaultEnumerationCap,
                         std::uint64_t mc_seed = 0);

}  // namespace sgldv
