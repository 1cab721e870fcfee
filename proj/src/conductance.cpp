#include "sgldv/conductance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgldv/errors.hpp"

namespace sgldv {

void validate_stochastic(const DiscretizedKernel& kernel, double tol) {
  if (kernel.size() < 2) throw InvalidKernel("kernel needs at least two states");
  if (kernel.min_entry() < -tol) throw InvalidKernel("kernel has negative entries");
  if (kernel.max_row_sum_error() > tol) throw InvalidKernel("kernel rows do not sum to 1");
}

Vector stationary_distribution(const DiscretizedKernel& kernel, double tol, int max_iter) {
  const int n = kernel.size();
  const auto& rp = kernel.row_ptr();
  const auto& cols = kernel.cols();
  const auto& vals = kernel.values();
  Vector pi = Vector::Constant(n, 1.0 / n), next(n);
  for (int it = 0; it < max_iter; ++it) {
    // Lazy averaging guards against periodic chains.
    next = 0.5 * pi;
    for (int i = 0; i < n; ++i)
      for (int k = rp[i]; k < rp[i + 1]; ++k) next[cols[k]] += 0.5 * pi[i] * vals[k];
    next /= next.sum();
    const double change = (next - pi).lpNorm<1>();
    pi.swap(next);
    if (change < tol) return pi;
  }
  throw NoConvergence("stationary distribution did not converge");
}

namespace {

double cut_ratio(double flow, double mass) {
  const double denom = std::min(mass, 1.0 - mass);
  return denom > 0 ? flow / denom : std::numeric_limits<double>::infinity();
}

ConductanceResult intervals_1d(const DiscretizedKernel& kernel, const Vector& pi) {
  const int n = kernel.size();
  const auto& rp = kernel.row_ptr();
  const auto& cols = kernel.cols();
  const auto& vals = kernel.values();
  // Prefix sums within each row, and within each column of pi_i T_ij.
  std::vector<double> row_prefix(vals.size() + n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    row_prefix[rp[i] + i] = 0.0;
    for (int k = rp[i]; k < rp[i + 1]; ++k) {
      s += vals[k];
      row_prefix[k + i + 1] = s;
    }
  }
  std::vector<int> cp(n + 1, 0);
  for (int c : cols) ++cp[c + 1];
  for (int j = 0; j < n; ++j) cp[j + 1] += cp[j];
  std::vector<int> crow(cols.size());
  std::vector<double> cval(cols.size());
  {
    std::vector<int> fill(cp.begin(), cp.end() - 1);
    for (int i = 0; i < n; ++i)
      for (int k = rp[i]; k < rp[i + 1]; ++k) {
        const int pos = fill[cols[k]]++;
        crow[pos] = i;
        cval[pos] = pi[i] * vals[k];
      }
  }
  std::vector<double> col_prefix(cval.size() + n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    col_prefix[cp[j] + j] = 0.0;
    for (int k = cp[j]; k < cp[j + 1]; ++k) {
      s += cval[k];
      col_prefix[k + j + 1] = s;
    }
  }
  // Sum of row b over columns in [a, b).
  auto row_range = [&](int b, int a) {
    const auto begin = cols.begin() + rp[b], end = cols.begin() + rp[b + 1];
    const int lo = static_cast<int>(std::lower_bound(begin, end, a) - cols.begin());
    const int hi = static_cast<int>(std::lower_bound(begin, end, b) - cols.begin());
    return row_prefix[hi + b] - row_prefix[lo + b];
  };
  auto col_range = [&](int b, int a) {
    const auto begin = crow.begin() + cp[b], end = crow.begin() + cp[b + 1];
    const int lo = static_cast<int>(std::lower_bound(begin, end, a) - crow.begin());
    const int hi = static_cast<int>(std::lower_bound(begin, end, b) - crow.begin());
    return col_prefix[hi + b] - col_prefix[lo + b];
  };
  ConductanceResult best;
  best.phi = std::numeric_limits<double>::infinity();
  best.family = "intervals";
  int best_a = 0, best_b = 0;
  for (int a = 0; a < n; ++a) {
    double flow = 0.0, mass = 0.0;
    for (int b = a; b < n; ++b) {
      if (a == 0 && b == n - 1) break;
      flow += pi[b] * (1.0 - kernel.at(b, b) - row_range(b, a)) - col_range(b, a);
      mass += pi[b];
      const double ratio = cut_ratio(std::max(flow, 0.0), mass);
      if (ratio < best.phi) {
        best.phi = ratio;
        best_a = a;
        best_b = b;
      }
    }
  }
  for (int s = best_a; s <= best_b; ++s) best.argmin.push_back(s);
  return best;
}

double set_flow(const DiscretizedKernel& kernel, const Vector& pi, const std::vector<char>& in) {
  double flow = 0.0;
  const auto& rp = kernel.row_ptr();
  for (int i = 0; i < kernel.size(); ++i) {
    if (!in[i]) continue;
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      if (!in[kernel.cols()[k]]) flow += pi[i] * kernel.values()[k];
  }
  return flow;
}

ConductanceResult half_planes_2d(const DiscretizedKernel& kernel, const Vector& pi) {
  ConductanceResult best;
  best.phi = std::numeric_limits<double>::infinity();
  best.family = "half-planes";
  const auto& states = kernel.states();
  for (int axis = 0; axis < 2; ++axis) {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& s : states) {
      lo = std::min(lo, s.cell[axis]);
      hi = std::max(hi, s.cell[axis]);
    }
    std::vector<char> in(states.size());
    for (int t = lo; t < hi; ++t) {
      double mass = 0.0;
      for (std::size_t k = 0; k < states.size(); ++k) {
        in[k] = states[k].cell[axis] <= t;
        if (in[k]) mass += pi[static_cast<Eigen::Index>(k)];
      }
      const double ratio = cut_ratio(set_flow(kernel, pi, in), mass);
      if (ratio < best.phi) {
        best.phi = ratio;
        best.argmin.clear();
        for (std::size_t k = 0; k < states.size(); ++k)
          if (in[k]) best.argmin.push_back(static_cast<int>(k));
      }
    }
  }
  return best;
}

}  // namespace

ConductanceResult conductance_exhaustive(const DiscretizedKernel& kernel, const Vector& pi) {
  const int n = kernel.size();
  if (n > 30) throw InvalidParameter("exhaustive conductance is limited to 30 states");
  ConductanceResult best;
  best.phi = std::numeric_limits<double>::infinity();
  best.exhaustive = true;
  best.family = "all subsets";
  const Matrix T = kernel.dense();
  // Subsets excluding the last state; stationarity makes flows symmetric.
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    double flow = 0.0, mass = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      mass += pi[i];
      for (int j = 0; j < n; ++j)
        if (!(j < n - 1 && (mask >> j & 1))) flow += pi[i] * T(i, j);
    }
    const double ratio = cut_ratio(flow, mass);
    if (ratio < best.phi) {
      best.phi = ratio;
      best.argmin.clear();
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) best.argmin.push_back(i);
    }
  }
  return best;
}

ConductanceResult conductance(const DiscretizedKernel& kernel) {
  validate_stochastic(kernel);
  const Vector pi = kernel.stationary() ? *kernel.stationary() : stationary_distribution(kernel);
  if (pi.size() != kernel.size()) throw InvalidKernel("stationary vector size mismatch");
  if (kernel.size() <= kExhaustiveStates) return conductance_exhaustive(kernel, pi);
  const bool two_d = !kernel.states().empty() && kernel.states().front().cell.size() == 2;
  return two_d ? half_planes_2d(kernel, pi) : intervals_1d(kernel, pi);
}

}  // namespace sgldv
