#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <numbers>

#include "sgldv/errors.hpp"
#include "sgldv/rng.hpp"
#include "sgldv/schedule.hpp"
#include "sgldv/targets.hpp"

using namespace sgldv;

namespace {

void check_rel(double got, double want, double tol = 1e-12) {
  CHECK(std::abs(got - want) <= tol * std::abs(want));
}

TargetModel unit_gaussian() { return make_gaussian(Vector::Zero(1), 1.0, 1); }

const double kRhoGaussian = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

TEST_CASE("bar_r matches high-precision values") {
  check_rel(bar_r(0.25, 1, 0, 1, 1, 1), 41.627730557884887818);
  check_rel(bar_r(0.1 / 12, 0.5, 3.125, 3, 1, 1), 87.847781018517597878);
  check_rel(bar_r(0.01, 0.5, 2, 3, 2, 2), 86.540919130114266909);
}

TEST_CASE("bar_r grows as z shrinks and rejects z outside (0, 1)") {
  double prev = 0.0;
  for (double z : {0.9, 0.5, 0.1, 1e-3, 1e-6, 1e-12}) {
    const double r = bar_r(z, 1, 1, 2, 1, 2);
    CHECK(r > prev);
    prev = r;
  }
  CHECK_THROWS_AS(bar_r(0.0, 1, 0, 1, 1, 1), InvalidParameter);
  CHECK_THROWS_AS(bar_r(1.0, 1, 0, 1, 1, 1), InvalidParameter);
  CHECK_THROWS_AS(bar_r(0.5, 0, 0, 1, 1, 1), InvalidParameter);
  CHECK_THROWS_AS(bar_r(0.5, 1, -1, 1, 1, 1), InvalidParameter);
}

TEST_CASE("projection radii match high-precision values") {
  const auto r = proj_radii(0.01, 1, 1, 1000, 0.1);
  check_rel(r.r_lemma62, 0.95484812654971464773);
  check_rel(r.r_lemma63, 1.3787616202377760937);
}

TEST_CASE("projection radius ratio tends to sqrt(5)/2 in high dimension") {
  const auto r = proj_radii(1e-3, 1000000, 1, 1e4, 0.1);
  CHECK(r.r_lemma63 / r.r_lemma62 == doctest::Approx(std::sqrt(5.0) / 2.0).epsilon(1e-2));
  // Both radii scale as sqrt(eta).
  const auto a = proj_radii(1e-2, 3, 2, 500, 0.2), b = proj_radii(4e-2, 3, 2, 500, 0.2);
  check_rel(b.r_lemma62 / a.r_lemma62, 2.0);
  check_rel(b.r_lemma63 / a.r_lemma63, 2.0);
}

TEST_CASE("kernel closeness bounds match high-precision values") {
  check_rel(delta_bound(1e-4, 1, 1, 2, 1, 5, 0, 1e4, 0.2), 0.3385029459545799248);
  check_rel(delta_bound_hessian(1e-4, 1, 1, 2, 1, 1, 5, 0, 1e4, 0.2), 0.31801093421660551067);
  check_rel(delta_bound(3e-3, 2, 2, 3, 1.5, 4, 0.7, 12345, 0.05), 31.710805452487041583);
  check_rel(delta_bound_hessian(3e-3, 2, 2, 3, 1.5, 2.5, 4, 0.7, 12345, 0.05), 30.797484166770213867);
}

TEST_CASE("kernel closeness bounds: properties over random inputs") {
  RngStream rng(11, 0);
  for (int t = 0; t < 200; ++t) {
    const double eta = std::pow(10.0, -6 + 4 * rng.uniform());
    const int d = 1 + static_cast<int>(rng.below(5));
    const double beta = 1 + 4 * rng.uniform();
    const int B = 1 + static_cast<int>(rng.below(8));
    const double L = 0.5 + 3 * rng.uniform(), R = 1 + 10 * rng.uniform(), G = rng.uniform();
    const double K = std::pow(10.0, 1 + 5 * rng.uniform()), eps = 0.01 + 0.5 * rng.uniform();
    const double d0 = delta_bound(eta, d, beta, B, L, R, G, K, eps);
    CHECK(d0 > 0);
    // Increasing in eta, decreasing in B, vanishing as eta -> 0.
    CHECK(delta_bound(2 * eta, d, beta, B, L, R, G, K, eps) > d0);
    CHECK(delta_bound(eta, d, beta, B + 1, L, R, G, K, eps) < d0);
    CHECK(delta_bound(eta * 1e-6, d, beta, B, L, R, G, K, eps) < d0 * 1.1e-6);
    // H = 0 leaves only the stochastic terms.
    CHECK(delta_bound_hessian(eta, d, beta, B, L, 0, R, G, K, eps) < d0);
  }
  CHECK_THROWS_AS(delta_bound(0, 1, 1, 1, 1, 1, 0, 10, 0.1), InvalidParameter);
  CHECK_THROWS_AS(delta_bound(1e-3, 1, 1, 0, 1, 1, 0, 10, 0.1), InvalidParameter);
  CHECK_THROWS_AS(delta_bound(1e-3, 1, 1, 1, 1, 1, 0, 0.5, 0.1), InvalidParameter);
  CHECK_THROWS_AS(delta_bound_hessian(1e-3, 1, 1, 1, 1, -1, 1, 0, 10, 0.1), InvalidParameter);
}

TEST_CASE("warm-start bound") {
  // L = 2, m = 1, minimizer at the origin.
  auto c = make_gaussian(Vector::Zero(1), 2.0, 1).constants();
  c.m = 1.0;
  const auto g = make_gaussian(Vector::Zero(1), 2.0, 1).with_constants(c);
  check_rel(warm_start_bound(g, 1.0), 2.8284271247461900976);
  Vector mu(1);
  mu << 1.5;
  const auto shifted = make_gaussian(mu, 2.0, 1);
  check_rel(warm_start_bound(shifted, 1.5), 13058.842517499763289, 1e-11);
  check_rel(log_warm_start_bound(shifted, 1.5), std::log(13058.842517499763289));
}

TEST_CASE("warm-start bound needs a minimizer") {
  Vector w(2);
  w << 0.5, 0.5;
  Matrix modes(2, 1);
  modes << -1, 1;
  const auto mix = make_shifted_mixture(w, modes, Matrix::Zero(1, 1));
  if (!mix.minimizer()) {
    CHECK_THROWS_AS(log_warm_start_bound(mix, 1.0), MissingConstant);
    CHECK_THROWS_AS(schedule_plain(mix, 1.0, 1, 0.1, 0.5), MissingConstant);
  }
}

TEST_CASE("plain schedule for the unit Gaussian matches the independent solver") {
  const auto rep = schedule_plain(unit_gaussian(), 1.0, 1, 0.1, kRhoGaussian);
  CHECK(rep.mode == "plain");
  check_rel(rep.R, 62.1177616703846661);
  check_rel(rep.eta, 1.4694350109970442e-23, 1e-9);
  check_rel(rep.K, 3.747438276068834e24, 1e-9);
  CHECK(rep.binding_constraint == "accuracy");
  // The Gaussian's Hessian is constant, so H = 0 is known.
  REQUIRE(rep.delta_hessian);
  CHECK(*rep.delta_hessian <= rep.delta);
}

TEST_CASE("schedules are fixed points of the iteration-count rule") {
  Matrix shifts(6, 1);
  shifts << 0.5, -0.5, 0.3, -0.3, 0.1, -0.1;
  const auto dw = make_double_well(2.0, shifts);
  const TargetModel* model = &dw;
  {
    for (int B : {1, 2, 6}) {
      for (auto solve : std::initializer_list<decltype(&schedule_plain)>{&schedule_plain, &schedule_hessian}) {
        const auto rep = solve(*model, 1.0, B, 0.1, 0.13, 1.0);
        const double split = rep.mode == "plain" ? 4.0 : 6.0;
        const double K = std::max(1.0, std::ceil((std::log(split / 0.1) + rep.log_lambda_bound) /
                                                 (rep.C0 * rep.eta)));
        CHECK(std::abs(K - rep.K) / rep.K < 1e-5);
        CHECK(rep.eta > 0);
        CHECK(rep.delta == doctest::Approx(delta_bound(rep.eta, 1, 1.0, B, model->constants().L, rep.R,
                                                       model->constants().G, rep.K, 0.1))
                               .epsilon(1e-12));
        check_rel(rep.C0, 0.13 * 0.13 / 8.0);
      }
    }
  }
}

TEST_CASE("plain schedule step size is monotone in eps and B") {
  const auto g = make_gaussian(Vector::Zero(1), 1.0, 8);
  const auto a = schedule_plain(g, 1.0, 1, 0.2, kRhoGaussian);
  const auto b = schedule_plain(g, 1.0, 1, 0.05, kRhoGaussian);
  const auto c = schedule_plain(g, 1.0, 8, 0.2, kRhoGaussian);
  CHECK(b.eta < a.eta);
  CHECK(b.K > a.K);
  CHECK(c.eta >= a.eta);
}

TEST_CASE("hessian schedule") {
  CHECK_THROWS_AS(schedule_hessian(unit_gaussian().with_constants([] {
                    TargetConstants c;
                    c.m = 1;
                    c.L = 1;
                    return c;
                  }()),
                                   1.0, 1, 0.1, kRhoGaussian),
                  MissingConstant);
  // A huge curvature constant makes a curvature constraint bind.
  auto c = unit_gaussian().constants();
  c.H = 1e20;
  const auto rep = schedule_hessian(unit_gaussian().with_constants(c), 1.0, 1, 0.1, kRhoGaussian);
  CHECK(rep.mode == "hessian");
  CHECK((rep.binding_constraint == "curvature_conductance" ||
         rep.binding_constraint == "accuracy_curvature"));
  REQUIRE(rep.delta_hessian);
}

TEST_CASE("schedule input validation") {
  const auto g = unit_gaussian();
  CHECK_THROWS_AS(schedule_plain(g, 1.0, 2, 0.1, 0.5), InvalidParameter);
  CHECK_THROWS_AS(schedule_plain(g, 1.0, 1, 1.5, 0.5), InvalidParameter);
  CHECK_THROWS_AS(schedule_plain(g, 1.0, 1, 0.1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(schedule_plain(g, 1.0, 1, 0.1, 0.5, -1.0), InvalidParameter);
}

TEST_CASE("schedule report formats") {
  auto no_h = unit_gaussian().constants();
  no_h.H.reset();
  const auto rep = schedule_plain(unit_gaussian().with_constants(no_h), 1.0, 1, 0.1, kRhoGaussian);
  const std::string csv = schedule_csv(rep);
  CHECK(csv.rfind("quantity,value\n", 0) == 0);
  CHECK(csv.find("binding_constraint,accuracy") != std::string::npos);
  CHECK(csv.find("\nK,") != std::string::npos);
  const std::string text = schedule_text(rep);
  CHECK(text.find("mode = plain") != std::string::npos);
  CHECK(text.find("delta_hessian = -") != std::string::npos);
}

TEST_CASE("bar_r monotonicity in d, b and 1/m; sqrt(2) scaling in d") {
  const double z = 1e-3;
  CHECK(bar_r(z, 1, 0, 1, 1, 4) >= bar_r(z, 1, 0, 1, 1, 2));
  CHECK(bar_r(z, 1, 5, 1, 1, 2) >= bar_r(z, 1, 0, 1, 1, 2));
  CHECK(bar_r(z, 0.5, 1, 1, 1, 2) >= bar_r(z, 1, 1, 1, 1, 2));
  check_rel(bar_r(z, 1, 0, 1, 1, 6) / bar_r(z, 1, 0, 1, 1, 3), std::sqrt(2.0));
}

TEST_CASE("projection radii grow with K") {
  const auto a = proj_radii(1e-3, 2, 1, 100, 0.1), b = proj_radii(1e-3, 2, 1, 1e6, 0.1);
  CHECK(b.r_lemma62 > a.r_lemma62);
  CHECK(b.r_lemma63 > a.r_lemma63);
}

TEST_CASE("kernel closeness bound: monotone in R and L, large-batch limit, small eta") {
  const double d0 = delta_bound(1e-3, 2, 1, 4, 1, 5, 0.2, 1e4, 0.1);
  CHECK(delta_bound(1e-3, 2, 1, 4, 1, 6, 0.2, 1e4, 0.1) > d0);
  CHECK(delta_bound(1e-3, 2, 1, 4, 1.5, 5, 0.2, 1e4, 0.1) > d0);
  // As B grows only the first two terms remain.
  const double eta = 1e-3, L = 1, M = 5.2, f = 1 + std::sqrt(std::log(8e4 / 0.1) / 2);
  const double limit = (10 * L * 2 * eta + 10 * L * M * std::sqrt(2.0) * std::pow(eta, 1.5)) * f * f;
  CHECK(delta_bound(eta, 2, 1, 1000000000, L, 5, 0.2, 1e4, 0.1) == doctest::Approx(limit).epsilon(1e-6));
  // Curvature variant is sharper for small eta.
  CHECK(delta_bound_hessian(1e-6, 1, 1, 2, 1, 1, 5, 0, 1e4, 0.2) < delta_bound(1e-6, 1, 1, 2, 1, 5, 0, 1e4, 0.2));
}

TEST_CASE("warm-start bound dominates the initial-to-target mass ratio") {
  // N(0, 1/2) start against N(0, 1): sup over intervals of mu0(A) / pi(A).
  const auto g = unit_gaussian();
  const double bound = warm_start_bound(g, 1.0);
  CHECK(bound == doctest::Approx(2.0).epsilon(1e-14));
  auto cdf = [](double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::numbers::sqrt2)); };
  double sup = 0.0;
  for (int i = 0; i < 200; ++i)
    for (int j = i + 1; j <= 200; ++j) {
      const double a = -5 + 0.05 * i, b = -5 + 0.05 * j;
      const double pi = cdf(b, 1) - cdf(a, 1);
      if (pi < 1e-12) continue;
      sup = std::max(sup, (cdf(b, std::sqrt(0.5)) - cdf(a, std::sqrt(0.5))) / pi);
    }
  CHECK(sup > 1.3);
  CHECK(sup <= bound);
}

TEST_CASE("plain schedule follows the eps-squared law") {
  const auto g = make_gaussian(Vector::Zero(1), 1.0, 4);
  const auto a = schedule_plain(g, 1.0, 1, 0.1, kRhoGaussian);
  const auto b = schedule_plain(g, 1.0, 1, 0.05, kRhoGaussian);
  CHECK(b.eta / a.eta == doctest::Approx(0.25).epsilon(0.1));
  // K = ceil(ln(4 lambda / eps) / (C0 eta)), so the ratio carries a log factor on top of 1/eta.
  const double logs = std::log(4.0 * b.lambda_bound / 0.05) / std::log(4.0 * a.lambda_bound / 0.1);
  CHECK(b.K / a.K == doctest::Approx(a.eta / b.eta * logs).epsilon(1e-6));
  CHECK(b.K / a.K > 4.0);
  CHECK(b.K / a.K < 8.0);
}

TEST_CASE("hessian schedule: curvature scaling and comparison with the plain schedule") {
  // The curvature constraint only binds once H dwarfs the M^2 terms.
  auto with_h = [](double H) {
    auto c = unit_gaussian().constants();
    c.H = H;
    return unit_gaussian().with_constants(c);
  };
  const auto a = schedule_hessian(with_h(1e40), 1.0, 1, 0.1, kRhoGaussian);
  const auto b = schedule_hessian(with_h(1e41), 1.0, 1, 0.1, kRhoGaussian);
  CHECK(a.binding_constraint == "accuracy_curvature");
  CHECK(a.binding_constraint == b.binding_constraint);
  CHECK(b.eta / a.eta == doctest::Approx(0.1).epsilon(0.1));

  // With large batches the H = 0 schedule beats the plain one.
  const auto g = make_gaussian(Vector::Zero(1), 1.0, 10000);
  const auto plain = schedule_plain(g, 1.0, 10000, 1e-3, kRhoGaussian);
  const auto hess = schedule_hessian(g, 1.0, 10000, 1e-3, kRhoGaussian);
  CHECK(hess.eta >= plain.eta);
}
