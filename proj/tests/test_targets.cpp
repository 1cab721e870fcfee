#include <doctest.h>

#include <cmath>

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

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

TargetModel shifted_double_well() { return make_double_well(2.0, column({0.5, -0.5, 0.3, -0.3, 0.1, -0.1})); }

TargetModel mixture_2d() {
  Vector w(3);
  w << 0.2, 0.3, 0.5;
  Matrix modes(3, 2);
  modes << -1.5, 0.0, 1.0, 1.0, 0.5, -1.2;
  Matrix shifts(4, 2);
  shifts << 0.2, -0.1, -0.2, 0.3, 0.1, 0.0, -0.1, -0.2;
  return make_shifted_mixture(w, modes, shifts);
}

}  // namespace

TEST_CASE("gaussian constants and values") {
  Vector mu(2);
  mu << 1.0, -2.0;
  const auto t = make_gaussian(mu, 2.0, 3);
  CHECK(t.n() == 3);
  CHECK(t.dim() == 2);
  const auto& c = t.constants();
  CHECK(c.L == 2.0);
  CHECK(c.m == 1.0);
  CHECK(c.b == doctest::Approx(2.0 * 5.0 / 2.0));
  CHECK(c.G == doctest::Approx(2.0 * std::sqrt(5.0)));
  REQUIRE(c.H);
  CHECK(*c.H == 0.0);
  Vector x(2);
  x << 0.5, 0.5;
  CHECK(t.value(x) == doctest::Approx(0.5 * 2.0 * (0.25 + 6.25)));
  CHECK((t.grad(x) - 2.0 * (x - mu)).norm() < 1e-15);
  REQUIRE(t.minimizer());
  CHECK((t.minimizer()->x - mu).norm() < 1e-12);
  REQUIRE(t.quadratic());
  CHECK(t.quadratic()->precision == 2.0);
}

TEST_CASE("centred gaussian uses m = precision, b = 0") {
  const auto t = make_gaussian(Vector::Zero(1), 3.0, 1);
  CHECK(t.constants().m == 3.0);
  CHECK(t.constants().b == 0.0);
  CHECK(t.constants().G == 0.0);
}

TEST_CASE("double well matches its closed form") {
  // f = (x^2 + 4)/2 - ln cosh 2x; values from mpmath.
  const auto t = make_double_well(2.0, column({0.0}));
  CHECK(t.value(vec1(0.7)) == doctest::Approx(1.47911435427197391).epsilon(1e-13));
  CHECK(t.grad(vec1(0.7))[0] == doctest::Approx(-1.07070329640452502).epsilon(1e-13));
  REQUIRE(t.minimizer());
  CHECK(std::abs(std::abs(t.minimizer()->x[0]) - 1.99865134603021649) < 1e-9);
  CHECK(t.minimizer()->value == doctest::Approx(0.692810869648874826).epsilon(1e-12));
  CHECK(t.constants().L == 3.0);
  CHECK(*t.constants().H == doctest::Approx(64.0 / (6.0 * std::sqrt(3.0))));
}

TEST_CASE("shifted double well: components are translates and average to the target") {
  const auto t = shifted_double_well();
  CHECK(t.n() == 6);
  // Component 0 is the base potential translated by +0.5: f_0(0.7) = f(0.2).
  CHECK(t.component_value(0, vec1(0.7)) == doctest::Approx(1.94204651461216758).epsilon(1e-13));
  CHECK(t.constants().m == 0.5);
  CHECK(t.constants().b == doctest::Approx(3.125));
  RngStream rng(11, 0);
  for (int k = 0; k < 50; ++k) {
    const Vector x = uniform_in_ball(rng, 1, 6.0);
    double s = 0.0;
    for (int i = 0; i < t.n(); ++i) s += t.component_value(i, x);
    CHECK(t.value(x) == doctest::Approx(s / t.n()).epsilon(1e-14));
  }
}

TEST_CASE("mean_grad over all components equals grad bitwise") {
  const auto t = mixture_2d();
  RngStream rng(2, 0);
  std::vector<int> all{0, 1, 2, 3};
  for (int k = 0; k < 50; ++k) {
    const Vector x = uniform_in_ball(rng, 2, 5.0);
    const Vector a = t.grad(x), b = t.mean_grad(all, x);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
  }
}

TEST_CASE("mixture factory validates inputs") {
  Vector w(2);
  w << 0.5, 0.6;
  Matrix modes(2, 1);
  modes << -1.0, 1.0;
  CHECK_THROWS_AS(make_shifted_mixture(w, modes, Matrix::Zero(1, 1)), InvalidParameter);
  w << 0.5, 0.5;
  CHECK_THROWS_AS(make_shifted_mixture(w, modes, column({0.1, 0.2})), InvalidParameter);
  CHECK_THROWS_AS(make_shifted_mixture(w, modes, Matrix::Zero(2, 2)), InvalidParameter);
  CHECK_NOTHROW(make_shifted_mixture(w, modes, column({0.1, -0.1})));
}

TEST_CASE("analytic derivatives agree with finite differences") {
  const std::vector<TargetModel> targets{make_gaussian(Vector::Zero(2), 1.5, 2), shifted_double_well(),
                                         mixture_2d(),
                                         make_noise_split(shifted_double_well(), column({1, -2, 0.5, 0.5, -1, 1}))};
  for (const auto& t : targets) {
    const auto chk = check_derivatives(t, 5.0, 100, 17);
    CHECK(chk.max_grad_rel_error <= 1e-6);
    if (chk.hessian_checked) CHECK(chk.max_hessian_rel_error <= 1e-6);
  }
}

TEST_CASE("noise split keeps the full potential and widens G") {
  const auto base = shifted_double_well();
  const auto t = make_noise_split(base, column({1.0, -2.0, 0.5, 0.5, -1.0, 1.0}));
  CHECK(t.constants().G == doctest::Approx(base.constants().G + 2.0));
  CHECK(t.value(vec1(0.3)) == doctest::Approx(base.value(vec1(0.3))).epsilon(1e-14));
  CHECK(t.component_grad(1, vec1(0.3))[0] == doctest::Approx(base.grad(vec1(0.3))[0] - 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(make_noise_split(base, column({1.0, 1.0})), InvalidParameter);
}

TEST_CASE("declared constants survive probing on every built-in target") {
  for (const auto& t : {make_gaussian(Vector::Zero(1), 1.0, 1), shifted_double_well(), mixture_2d()}) {
    const auto rep = probe_assumptions(t, 10.0, 200, 5);
    CHECK(rep.valid);
    for (const auto& e : rep.entries) CHECK_MESSAGE(e.pass, e.assumption);
  }
}

TEST_CASE("an understated smoothness constant is caught with its witness pair") {
  auto t = shifted_double_well();
  TargetConstants c = t.constants();
  c.L = 2.0;  // true value is 3, attained at the mode centre of each component
  const auto rep = probe_assumptions(t.with_constants(c), 5.0, 200, 8);
  CHECK_FALSE(rep.valid);
  const ProbeEntry* e = rep.find("smoothness");
  REQUIRE(e != nullptr);
  CHECK_FALSE(e->pass);
  CHECK(e->margin < 0);
  CHECK(e->arg_pair.has_value());
}

TEST_CASE("probing is deterministic and independent of jobs") {
  const auto t = mixture_2d();
  const auto a = probe_assumptions(t, 6.0, 64, 3, 1);
  const auto b = probe_assumptions(t, 6.0, 64, 3, 4);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].margin == b.entries[i].margin);
}

TEST_CASE("uniform_in_ball stays inside") {
  RngStream rng(1, 1);
  for (int k = 0; k < 1000; ++k) CHECK(uniform_in_ball(rng, 2, 3.0).norm() <= 3.0);
}
