#include <doctest.h>

#include <cmath>

#include "sgldv/errors.hpp"
#include "sgldv/samplers.hpp"

using namespace sgldv;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  int i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

TargetModel shifted_double_well() { return make_double_well(2.0, column({0.5, -0.5, 0.3, -0.3, 0.1, -0.1})); }

ChainConfig base_config() {
  ChainConfig c;
  c.eta = 0.01;
  c.beta = 1.0;
  c.B = 2;
  c.K = 200;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("sampler kinds parse and print") {
  for (auto k : {SamplerKind::Lmc, SamplerKind::Sgld, SamplerKind::Projected, SamplerKind::Metropolized})
    CHECK(parse_sampler_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_sampler_kind("mala"), InvalidConfig);
}

TEST_CASE("config validation") {
  const auto t = shifted_double_well();
  auto c = base_config();
  CHECK_NOTHROW(validate_chain_config(c, t, SamplerKind::Sgld));
  c.beta = 0.5;
  CHECK_THROWS_AS(validate_chain_config(c, t, SamplerKind::Sgld), InvalidParameter);
  c = base_config();
  c.B = 7;
  CHECK_THROWS_AS(validate_chain_config(c, t, SamplerKind::Sgld), InvalidParameter);
  c = base_config();
  CHECK_THROWS_AS(validate_chain_config(c, t, SamplerKind::Projected), InvalidConfig);
  c.R = 1.0;
  c.r = 2.0;
  CHECK_THROWS_AS(validate_chain_config(c, t, SamplerKind::Projected), InvalidParameter);
}

TEST_CASE("full-batch SGLD equals LMC bitwise") {
  const auto t = shifted_double_well();
  auto c = base_config();
  c.B = t.n();
  c.K = 10000;
  const auto a = run_chain(t, c, SamplerKind::Sgld);
  const auto b = run_chain(t, c, SamplerKind::Lmc);
  REQUIRE(a.states.size() == 10001);
  bool equal = true;
  for (std::size_t k = 0; k < a.states.size(); ++k) equal = equal && a.states[k][0] == b.states[k][0];
  CHECK(equal);
}

TEST_CASE("chains are reproducible and endpoint runs agree with full runs") {
  const auto t = shifted_double_well();
  auto c = base_config();
  c.R = 5.0;
  c.r = 0.3;
  for (auto kind : {SamplerKind::Sgld, SamplerKind::Projected, SamplerKind::Metropolized}) {
    const auto a = run_chain(t, c, kind);
    const auto b = run_chain(t, c, kind);
    const auto e = run_chain_endpoint(t, c, kind);
    CHECK(a.states.back()[0] == b.states.back()[0]);
    CHECK(e.state[0] == a.states.back()[0]);
    CHECK(e.rejections == a.rejection_count());
  }
}

TEST_CASE("projected chain stays in the domain and within r per step") {
  const auto t = shifted_double_well();
  auto c = base_config();
  c.eta = 0.05;
  c.K = 2000;
  c.R = 3.0;
  c.r = 0.2;
  c.initial.kind = InitialSpec::Kind::Point;
  c.initial.point = Vector::Zero(1);
  const auto tr = run_chain(t, c, SamplerKind::Projected);
  REQUIRE(tr.rejected.size() == 2000);
  CHECK(tr.rejection_count() > 0);
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    CHECK(std::abs(tr.states[k][0]) <= 3.0);
    CHECK(std::abs(tr.states[k][0] - tr.states[k - 1][0]) <= 0.2);
    if (tr.rejected[k - 1]) CHECK(tr.states[k][0] == tr.states[k - 1][0]);
  }
}

TEST_CASE("metropolized chain records acceptance probabilities in [0, 1]") {
  const auto t = shifted_double_well();
  auto c = base_config();
  c.R = 4.0;
  c.r = 0.5;
  c.eta = 0.05;
  const auto tr = run_chain(t, c, SamplerKind::Metropolized);
  REQUIRE(tr.accept_probs.size() == 200);
  for (double a : tr.accept_probs) CHECK((a >= 0.0 && a <= 1.0));
}

TEST_CASE("metropolized step rejects a mismatched engine") {
  const auto t = shifted_double_well();
  auto c = base_config();
  c.R = 4.0;
  c.r = 0.5;
  KernelParams p = kernel_params(c);
  p.eta = 0.02;
  const KernelEngine engine(t, p);
  RngStream rng(1, 1);
  CHECK_THROWS_AS(metropolized_sgld_step(t, Vector::Zero(1), c, engine, rng), InvalidParameter);
}

TEST_CASE("metropolized chain refuses targets whose batches cannot be enumerated") {
  Matrix shifts = Matrix::Zero(40, 1);
  const auto t = make_double_well(2.0, shifts);
  auto c = base_config();
  c.B = 20;
  c.R = 4.0;
  c.r = 0.5;
  CHECK_THROWS_AS(run_chain(t, c, SamplerKind::Metropolized), UnsupportedConfiguration);
}

TEST_CASE("closed-form AR(1) law matches simulated LMC moments") {
  Vector mu(1);
  mu[0] = 0.5;
  const auto t = make_gaussian(mu, 2.0, 1);
  ChainConfig c;
  c.eta = 0.05;
  c.K = 30;
  c.B = 1;
  const auto law = quadratic_chain_law(t, c);
  double s = 0.0, s2 = 0.0;
  const int runs = 20000;
  for (int i = 0; i < runs; ++i) {
    c.chain_id = static_cast<std::uint64_t>(i);
    const double x = run_chain_endpoint(t, c, SamplerKind::Lmc).state[0];
    s += x;
    s2 += x * x;
  }
  const double mean = s / runs, var = s2 / runs - mean * mean;
  CHECK(std::abs(mean - law.mean[0]) < 5.0 * std::sqrt(law.variance / runs));
  CHECK(std::abs(var / law.variance - 1.0) < 5.0 * std::sqrt(2.0 / runs));
  // Long-run variance of the AR(1) chain: 1 / (p (1 - eta p / 2)) for beta = 1.
  c.K = 100000;
  CHECK(quadratic_chain_law(t, c).variance == doctest::Approx(1.0 / (2.0 * (1.0 - 0.05))).epsilon(1e-12));
}

TEST_CASE("trajectory CSV layout") {
  const auto t = shifted_double_well();
  auto c = base_config();
  c.K = 3;
  c.R = 5.0;
  c.r = 1.0;
  const auto csv = trajectory_csv(run_chain(t, c, SamplerKind::Projected));
  CHECK(csv.rfind("step,x_0,rejected,alpha\n0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
