#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "sgldv/errors.hpp"
#include "sgldv/rng.hpp"
#include "sgldv/stochastic_gradient.hpp"

using namespace sgldv;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  int i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

TargetModel shifted_double_well() { return make_double_well(2.0, column({0.5, -0.5, 0.3, -0.3, 0.1, -0.1})); }

}  // namespace

TEST_CASE("binomial coefficients") {
  CHECK(binomial(6, 2) == 15.0);
  CHECK(binomial(10, 0) == 1.0);
  CHECK(binomial(52, 5) == 2598960.0);
  CHECK(binomial(3, 5) == 0.0);
}

TEST_CASE("draw_batch returns sorted distinct indices") {
  RngStream rng(1, 0);
  for (int k = 0; k < 500; ++k) {
    const auto b = draw_batch(9, 4, rng);
    REQUIRE(b.size() == 4);
    CHECK(std::is_sorted(b.indices.begin(), b.indices.end()));
    CHECK(std::set<int>(b.indices.begin(), b.indices.end()).size() == 4);
    for (int i : b.indices) CHECK((i >= 0 && i < 9));
  }
}

TEST_CASE("draw_batch is uniform over subsets") {
  RngStream rng(2, 0);
  std::map<std::vector<int>, int> counts;
  const int draws = 150000;
  for (int k = 0; k < draws; ++k) ++counts[draw_batch(6, 2, rng).indices];
  CHECK(counts.size() == 15);
  const double expect = draws / 15.0;
  double chi2 = 0.0;
  for (const auto& [b, c] : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 36.1);  // 99.9% quantile of chi-square with 14 dof
}

TEST_CASE("full batch consumes no randomness") {
  RngStream a(3, 0), b(3, 0);
  const auto full = draw_batch(5, 5, a);
  CHECK(full.indices == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(a.uniform() == b.uniform());
}

TEST_CASE("validate_batch rejects bad batches") {
  CHECK_THROWS_AS(validate_batch(MiniBatch{{0, 0}}, 3), InvalidParameter);
  CHECK_THROWS_AS(validate_batch(MiniBatch{{0, 3}}, 3), InvalidParameter);
  CHECK_THROWS_AS(validate_batch(MiniBatch{{}}, 3), InvalidParameter);
  CHECK_NOTHROW(validate_batch(MiniBatch{{0, 2}}, 3));
}

TEST_CASE("enumeration lists every subset once in lexicographic order") {
  const auto e = enumerate_batches(5, 3);
  CHECK(e.batches.size() == 10);
  CHECK(e.batches.front().indices == std::vector<int>{0, 1, 2});
  CHECK(e.batches.back().indices == std::vector<int>{2, 3, 4});
  for (std::size_t i = 1; i < e.batches.size(); ++i) CHECK(e.batches[i - 1].indices < e.batches[i].indices);
  CHECK(e.weight() == doctest::Approx(0.1));
  CHECK_THROWS_AS(enumerate_batches(40, 20, 1000), EnumerationTooLarge);
}

TEST_CASE("stochastic gradient is unbiased over the enumeration") {
  const auto t = shifted_double_well();
  const auto e = enumerate_batches(t.n(), 2);
  RngStream rng(4, 0);
  for (int k = 0; k < 20; ++k) {
    const Vector x = uniform_in_ball(rng, 1, 5.0);
    Vector mean = Vector::Zero(1);
    for (const auto& b : e.batches) mean += stochastic_grad(t, x, b) * e.weight();
    CHECK(mean[0] == doctest::Approx(t.grad(x)[0]).epsilon(1e-13));
  }
}

TEST_CASE("MGF bound holds exactly and is tight at B = n") {
  const auto t = shifted_double_well();
  RngStream rng(5, 0);
  const double R = 10.0;
  for (int k = 0; k < 100; ++k) {
    const Vector x = uniform_in_ball(rng, 1, R);
    Vector a(1);
    a[0] = (rng.uniform() - 0.5) * 0.05;
    for (int B = 1; B <= t.n(); ++B) {
      const auto chk = mgf_bound_check(t, x, a, R, B);
      CHECK(chk.exact);
      CHECK(chk.holds());
      if (B == t.n()) CHECK(chk.lhs == 1.0);
    }
  }
}

TEST_CASE("MGF bound falls back to Monte Carlo past the enumeration cap") {
  const auto t = shifted_double_well();
  Vector x(1), a(1);
  x[0] = 1.0;
  a[0] = 0.01;
  const auto chk = mgf_bound_check(t, x, a, 10.0, 3, 5, 9);
  CHECK_FALSE(chk.exact);
  CHECK(chk.std_error > 0);
  CHECK(chk.holds());
}
