#include "sgldv/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sgldv/errors.hpp"
#include "sgldv/quadrature.hpp"

namespace sgldv {

namespace {

constexpr int kAngles = 720;

double reference_value(const TargetModel& model, double extent) {
  if (model.minimizer()) return model.minimizer()->value;
  double best = std::numeric_limits<double>::infinity();
  const int n = 2001;
  Vector x = Vector::Zero(model.dim());
  for (int k = 0; k < n; ++k) {
    x[0] = -extent + 2.0 * extent * k / (n - 1);
    best = std::min(best, model.value(x));
  }
  return best;
}

// Simpson intervals for [a, b] resolving the target's local length scale.
int intervals_for(const TargetModel& model, double beta, double a, double b) {
  const double scale = std::min(0.01, 0.05 / std::sqrt(beta * model.constants().L));
  const int n = static_cast<int>(std::ceil((b - a) / scale));
  return std::clamp(n + n % 2, 2, 4000000);
}


double resolve_domain(const TargetModel& model, double beta, double R, std::optional<double> domain) {
  const double need = quadrature_extent(model, beta);
  if (domain) {
    if (*domain < std::max(R, need))
      throw DomainTooSmall("quadrature domain " + std::to_string(*domain) +
                           " leaves target tail mass above 1e-12 or does not cover Omega");
    return *domain;
  }
  return std::max(R, need);
}

// Integral of g(x) e^{-beta(f(x) - ref)} over {lo_r <= |x| <= hi_r}.
double radial_integral(const TargetModel& model, double beta, double ref, double lo_r, double hi_r,
                       const std::function<double(const Vector&)>& g) {
  if (!(hi_r > lo_r)) return 0.0;
  const int n = intervals_for(model, beta, lo_r, hi_r);
  auto weight = [&](const Vector& x) { return g(x) * std::exp(-beta * (model.value(x) - ref)); };
  if (model.dim() == 1) {
    Vector x(1);
    auto f = [&](double t) {
      x[0] = t;
      return weight(x);
    };
    if (lo_r == 0.0) return simpson(f, -hi_r, hi_r, 2 * n);
    return simpson(f, -hi_r, -lo_r, n) + simpson(f, lo_r, hi_r, n);
  }
  if (model.dim() != 2) throw UnsupportedConfiguration("quadrature supports d in {1, 2}");
  Vector x(2);
  double total = 0.0;
  const double dtheta = 2.0 * std::numbers::pi / kAngles;
  const int nr = std::min(n, 20000);
  for (int k = 0; k < kAngles; ++k) {
    const double c = std::cos(k * dtheta), s = std::sin(k * dtheta);
    total += simpson(
                 [&](double rho) {
                   x << rho * c, rho * s;
                   return weight(x) * rho;
                 },
                 lo_r, hi_r, nr) *
             dtheta;
  }
  return total;
}

}  // namespace

double quadrature_extent(const TargetModel& model, double beta) {
  const auto& c = model.constants();
  double extent = std::sqrt(4.0 * (c.b / 2.0 + 45.0 / beta) / c.m);
  if (model.minimizer()) extent += model.minimizer()->x.norm();
  return extent;
}

double grid_mass(const GridDensity& d) {
  double s = 0.0;
  for (int iy = 0; iy < d.ny; ++iy) {
    const double wy = d.dim == 1 ? 1.0 : (iy == 0 || iy == d.ny - 1 ? 0.5 : 1.0);
    for (int ix = 0; ix < d.nx; ++ix) {
      const double wx = ix == 0 || ix == d.nx - 1 ? 0.5 : 1.0;
      s += wx * wy * d.at(ix, iy);
    }
  }
  return s * (d.dim == 1 ? d.h : d.h * d.h);
}

namespace {

GridDensity sample_density(const TargetModel& model, double beta, double extent, int nodes,
                           std::optional<double> truncate, double ref) {
  if (model.dim() < 1 || model.dim() > 2) throw UnsupportedConfiguration("grid densities support d in {1, 2}");
  if (nodes < 3) throw InvalidParameter("need at least 3 nodes per axis");
  nodes += 1 - nodes % 2;
  GridDensity d;
  d.dim = model.dim();
  d.lo = -extent;
  d.h = 2.0 * extent / (nodes - 1);
  d.nx = nodes;
  d.ny = d.dim == 1 ? 1 : nodes;
  d.values.resize(static_cast<std::size_t>(d.nx) * d.ny);
  Vector x(d.dim);
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      x[0] = d.node(ix);
      if (d.dim == 2) x[1] = d.node(iy);
      double v = 0.0;
      if (!truncate || x.norm() <= *truncate) v = std::exp(-beta * (model.value(x) - ref));
      d.values[static_cast<std::size_t>(iy) * d.nx + ix] = v;
    }
  const double mass = grid_mass(d);
  if (!(mass > 0)) throw DomainError("density has zero mass on the grid");
  for (double& v : d.values) v /= mass;
  return d;
}

}  // namespace

TruncatedTarget truncated_target(const TargetModel& model, double beta, double R, int nodes_per_axis) {
  if (!(R > 0)) throw InvalidParameter("R must be positive");
  TruncatedTarget t;
  t.R = R;
  t.f_ref = reference_value(model, R);
  t.density = sample_density(model, beta, R, nodes_per_axis, R, t.f_ref);
  t.log_normalizer =
      std::log(radial_integral(model, beta, t.f_ref, 0.0, R, [](const Vector&) { return 1.0; }));
  return t;
}

GridDensity target_density(const TargetModel& model, double beta, double extent, int nodes_per_axis) {
  return sample_density(model, beta, extent, nodes_per_axis, std::nullopt, reference_value(model, extent));
}

double truncation_tv(const TargetModel& model, double beta, double R, std::optional<double> domain) {
  const double D = resolve_domain(model, beta, R, domain);
  const double ref = reference_value(model, std::min(D, 50.0));
  const auto one = [](const Vector&) { return 1.0; };
  const double z_omega = radial_integral(model, beta, ref, 0.0, R, one);
  const double z_tail = radial_integral(model, beta, ref, R, D, one);
  const double z = z_omega + z_tail;
  // Inside Omega |pi* - pi| = e^{-beta f} |1/Z_Omega - 1/Z|; outside it is pi.
  const double inside = z_omega * std::abs(1.0 / z_omega - 1.0 / z);
  return 0.5 * (inside + z_tail / z);
}

double tail_mass(const TargetModel& model, double beta, double R, std::optional<double> domain) {
  const double D = resolve_domain(model, beta, R, domain);
  const double ref = reference_value(model, std::min(D, 50.0));
  const auto one = [](const Vector&) { return 1.0; };
  const double z_tail = radial_integral(model, beta, ref, R, D, one);
  const double z = radial_integral(model, beta, ref, 0.0, R, one) + z_tail;
  return z_tail / z;
}

double target_expectation(const TargetModel& model, double beta,
                          const std::function<double(const Vector&)>& h, std::optional<double> domain) {
  const double D = resolve_domain(model, beta, 0.0, domain);
  const double ref = reference_value(model, std::min(D, 50.0));
  const double z = radial_integral(model, beta, ref, 0.0, D, [](const Vector&) { return 1.0; });
  const double num = radial_integral(model, beta, ref, 0.0, D, h);
  if (!std::isfinite(num)) throw DomainTooSmall("expectation integral diverges on the quadrature domain");
  return num / z;
}

}  // namespace sgldv
