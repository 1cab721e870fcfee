#include "sgldv/stochastic_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgldv/errors.hpp"

namespace sgldv {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

MiniBatch draw_batch(int n, int B, RngStream& rng) {
  if (B < 1 || B > n) throw InvalidParameter("batch size must satisfy 1 <= B <= n");
  MiniBatch batch;
  batch.indices.resize(n);
  std::iota(batch.indices.begin(), batch.indices.end(), 0);
  if (B == n) return batch;
  for (int k = 0; k < B; ++k) {
    const int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - k)));
    std::swap(batch.indices[k], batch.indices[j]);
  }
  batch.indices.resize(B);
  std::sort(batch.indices.begin(), batch.indices.end());
  return batch;
}

void validate_batch(const MiniBatch& batch, int n) {
  if (batch.indices.empty() || batch.size() > n) throw InvalidParameter("batch size out of range");
  for (std::size_t k = 0; k < batch.indices.size(); ++k) {
    if (batch.indices[k] < 0 || batch.indices[k] >= n) throw InvalidParameter("batch index out of range");
    if (k > 0 && batch.indices[k] <= batch.indices[k - 1])
      throw InvalidParameter("batch indices must be sorted and distinct");
  }
}

Vector stochastic_grad(const TargetModel& model, const Vector& x, const MiniBatch& batch) {
  validate_batch(batch, model.n());
  return model.mean_grad(batch.indices, x);
}

BatchEnumeration enumerate_batches(int n, int B, std::uint64_t cap) {
  if (B < 1 || B > n) throw InvalidParameter("batch size must satisfy 1 <= B <= n");
  const double count = binomial(n, B);
  if (count > static_cast<double>(cap))
    throw EnumerationTooLarge("binomial(" + std::to_string(n) + ", " + std::to_string(B) +
                              ") exceeds the enumeration cap");
  BatchEnumeration e;
  e.n = n;
  e.B = B;
  e.batches.reserve(static_cast<std::size_t>(count));
  std::vector<int> idx(B);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    e.batches.push_back(MiniBatch{idx});
    int k = B - 1;
    while (k >= 0 && idx[k] == n - B + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < B; ++j) idx[j] = idx[j - 1] + 1;
  }
  return e;
}

MgfCheck mgf_bound_check(const TargetModel& model, const Vector& x, const Vector& a, double R,
                         int B, std::uint64_t cap, std::uint64_t mc_seed) {
  if (x.norm() > R) throw InvalidParameter("mgf_bound_check requires |x| <= R");
  const auto& c = model.constants();
  const double M = c.L * R + c.G;
  MgfCheck out;
  out.rhs = std::exp(M * M * a.squaredNorm() / B);
  const Vector full = model.grad(x);
  try {
    const BatchEnumeration e = enumerate_batches(model.n(), B, cap);
    double s = 0.0;
    for (const auto& batch : e.batches) s += std::exp(a.dot(stochastic_grad(model, x, batch) - full));
    out.lhs = s * e.weight();
  } catch (const EnumerationTooLarge&) {
    constexpr int kDraws = 1000000;
    RngStream rng(mc_seed, 0);
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < kDraws; ++k) {
      const double v = std::exp(a.dot(stochastic_grad(model, x, draw_batch(model.n(), B, rng)) - full));
      s += v;
      s2 += v * v;
    }
    out.exact = false;
    out.lhs = s / kDraws;
    out.std_error = std::sqrt(std::max(0.0, s2 / kDraws - out.lhs * out.lhs) / kDraws);
  }
  return out;
}

}  // namespace sgldv
