#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sgldv/conductance.hpp"
#include "sgldv/errors.hpp"
#include "sgldv/rng.hpp"
#include "sgldv/targets.hpp"

using namespace sgldv;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  int i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Lazy birth-death chain with up/down probabilities p, q on n states.
Matrix birth_death(int n, double p, double q) {
  Matrix T = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) T(i, i + 1) = p;
    if (i > 0) T(i, i - 1) = q;
    T(i, i) = 1.0 - T.row(i).sum();
  }
  return T;
}

}  // namespace

TEST_CASE("two-state chain has the analytic conductance") {
  Matrix T(2, 2);
  T << 0.7, 0.3, 0.1, 0.9;
  const auto k = DiscretizedKernel::from_dense(T);
  const Vector pi = stationary_distribution(k);
  CHECK(pi[0] == doctest::Approx(0.25).epsilon(1e-12));
  const auto c = conductance(k);
  CHECK(c.exhaustive);
  // Flow 0.25 * 0.3 over min(0.25, 0.75).
  CHECK(c.phi == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("interval search equals exhaustive search on birth-death chains") {
  const int n = kExhaustiveStates + 1;
  const auto k = DiscretizedKernel::from_dense(birth_death(n, 0.2, 0.3));
  const Vector pi = stationary_distribution(k);
  const auto ex = conductance_exhaustive(k, pi);
  const auto c = conductance(k);
  CHECK_FALSE(c.exhaustive);
  CHECK(c.phi == doctest::Approx(ex.phi).epsilon(1e-12));
}

TEST_CASE("large chains use the interval family and never exceed 1") {
  const auto k = DiscretizedKernel::from_dense(birth_death(200, 0.25, 0.25));
  const auto c = conductance(k);
  CHECK_FALSE(c.exhaustive);
  CHECK(c.phi > 0);
  CHECK(c.phi <= 1.0);
  // Uniform stationary law: the best cut halves the chain, flow 0.25/200 over 1/2.
  CHECK(c.phi == doctest::Approx(0.25 / 200 / 0.5).epsilon(1e-9));
}

TEST_CASE("random reversible chains: property checks") {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(6));
    Matrix W = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) W(i, j) = W(j, i) = rng.uniform() < 0.5 ? rng.uniform() : 0.0;
    for (int i = 0; i + 1 < n; ++i) W(i, i + 1) = W(i + 1, i) = 0.1 + rng.uniform();
    // T_ij = W_ij / (2 d_i) with holding 1/2 is reversible with pi proportional to d.
    const Vector d = W.rowwise().sum();
    Matrix T = (0.5 * d.cwiseInverse()).asDiagonal() * W;
    for (int i = 0; i < n; ++i) T(i, i) = 0.5;
    const auto k = DiscretizedKernel::from_dense(T);
    const Vector pi = stationary_distribution(k);
    const Vector expect = d / d.sum();
    CHECK((pi - expect).cwiseAbs().maxCoeff() < 1e-10);
    const auto c = conductance(k);
    CHECK(c.exhaustive);
    CHECK(c.phi <= 1.0);
    // No random subset beats the exhaustive minimum.
    const Matrix D = k.dense();
    for (int s = 0; s < 50; ++s) {
      std::vector<char> in(n);
      double mass = 0.0, flow = 0.0;
      int members = 0;
      for (int i = 0; i < n; ++i) members += (in[i] = rng.uniform() < 0.5);
      for (int i = 0; i < n; ++i) {
        if (!in[i]) continue;
        mass += pi[i];
        for (int j = 0; j < n; ++j)
          if (!in[j]) flow += pi[i] * D(i, j);
      }
      if (members > 0 && members < n) CHECK(c.phi <= flow / std::min(mass, 1 - mass) + 1e-12);
    }
  }
}

TEST_CASE("non-stochastic kernels are rejected") {
  Matrix T(2, 2);
  T << 0.5, 0.6, 0.5, 0.5;
  CHECK_THROWS_AS(validate_stochastic(DiscretizedKernel::from_dense(T)), InvalidKernel);
  T << 1.2, -0.2, 0.5, 0.5;
  CHECK_THROWS_AS(validate_stochastic(DiscretizedKernel::from_dense(T)), InvalidKernel);
}

TEST_CASE("conductance of a discretized double-well kernel is positive") {
  const auto t = make_double_well(2.0, column({0.5, -0.5, 0.3, -0.3, 0.1, -0.1}));
  KernelParams p;
  p.eta = 0.01;
  p.B = 2;
  p.R = 4.5;
  p.r = 0.5;
  const KernelEngine e(t, p);
  const auto k = build_discretized_kernel(e, Grid::covering(1, 4.5, 101), KernelKind::Metropolized);
  const auto c = conductance(k);
  CHECK(c.phi > 0);
  CHECK(c.phi < 0.05);
  // The stationary law of the Metropolized kernel is the target cell masses.
  CHECK((stationary_distribution(k) - *k.stationary()).cwiseAbs().maxCoeff() < 1e-8);
}
