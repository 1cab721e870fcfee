#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sgldv/io.hpp"
#include "sgldv/quadrature.hpp"

using namespace sgldv;

TEST_CASE("simpson integrates cubics exactly") {
  auto f = [](double x) { return 3 * x * x * x - 2 * x * x + x - 5; };
  // Antiderivative 3/4 x^4 - 2/3 x^3 + 1/2 x^2 - 5x on [-1, 2].
  auto F = [](double x) { return 0.75 * std::pow(x, 4) - 2.0 / 3.0 * std::pow(x, 3) + 0.5 * x * x - 5 * x; };
  CHECK(simpson(f, -1.0, 2.0, 2) == doctest::Approx(F(2.0) - F(-1.0)).epsilon(1e-14));
  // Odd interval counts are rounded up to even.
  CHECK(simpson(f, -1.0, 2.0, 3) == doctest::Approx(F(2.0) - F(-1.0)).epsilon(1e-14));
}

TEST_CASE("simpson converges on a Gaussian") {
  auto g = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
  CHECK(std::abs(simpson(g, -1.0, 1.5, 400) - (normal_cdf(1.5) - normal_cdf(-1.0))) < 1e-10);
}

TEST_CASE("simpson weights reproduce the composite rule") {
  const auto w = simpson_weights(5, 0.5);
  REQUIRE(w.size() == 5);
  CHECK(w[0] == doctest::Approx(0.5 / 3));
  CHECK(w[1] == doctest::Approx(4 * 0.5 / 3));
  CHECK(w[2] == doctest::Approx(2 * 0.5 / 3));
  double s = 0;
  for (double v : w) s += v;
  CHECK(s == doctest::Approx(2.0));
}

TEST_CASE("cumulative trapezoid") {
  const auto c = cumulative_trapezoid({1.0, 3.0, 5.0}, 0.5);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == doctest::Approx(1.0));
  CHECK(c[2] == doctest::Approx(3.0));
}

TEST_CASE("normal interval mass is accurate in the tails") {
  // P(X > 10) = 7.619853024160527e-24 (scipy.stats.norm.sf(10)).
  CHECK(normal_interval_mass(10.0, INFINITY, 0.0, 1.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-12));
  CHECK(normal_interval_mass(-INFINITY, -10.0, 0.0, 1.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-12));
  CHECK(normal_interval_mass(-1.0, 1.0, 0.0, 1.0) == doctest::Approx(0.6826894921370859).epsilon(1e-14));
  CHECK(normal_interval_mass(1.0, 3.0, 1.0, 2.0) == doctest::Approx(0.3413447460685429).epsilon(1e-14));
  CHECK(normal_interval_mass(2.0, 1.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("log_sum_exp is stable") {
  CHECK(log_sum_exp({1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp({-1000.0, -1000.0 + std::log(3.0)}) == doctest::Approx(-1000.0 + std::log(4.0)));
}

TEST_CASE("format_double round-trips and csv rows end in LF") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(NAN) == "nan");
  CHECK(csv_row({"a", "b"}) == "a,b\n");
}
