#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sgldv/targets.hpp"

namespace sgldv {

// Density samples on a uniform node grid: 1D uses nx nodes from lo with
// spacing h; 2D is row-major (y outer) over the square [lo, lo + (n-1)h]^2.
struct GridDensity {
  int dim = 1;
  double lo = 0.0;
  double h = 0.0;
  int nx = 0;
  int ny = 1;
  std::vector<double> values;
  double node(int k) const { return lo + k * h; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
};

// Trapezoid-rule integral of the density over its grid.
double grid_mass(const GridDensity& density);

// pi* = e^{-beta f} restricted to B(0, R) on nodes spanning [-R, R]^d,
// normalized so its grid integral is 1. Nodes per axis are made odd.
struct TruncatedTarget {
  GridDensity density;
  double R = 0.0;
  double log_normalizer = 0.0;  // log of the integral of e^{-beta (f - f_ref)} over Omega
  double f_ref = 0.0;
};

TruncatedTarget truncated_target(const TargetModel& model, double beta, double R, int nodes_per_axis);

// Untruncated pi on nodes spanning [-extent, extent], normalized on the grid.
GridDensity target_density(const TargetModel& model, double beta, double extent, int nodes_per_axis);

// Radius outside of which the target mass is below 1e-16, from the quadratic
// lower bound f(x) >= (m/4)|x|^2 + f(x*) - b/2.
double quadrature_extent(const TargetModel& model, double beta);

// |pi* - pi|_TV as half the L1 distance between the two densities.
double truncation_tv(const TargetModel& model, double beta, double R,
                     std::optional<double> domain = std::nullopt);

// 1 - pi(B(0, R)) from direct integration of the tail.
double tail_mass(const TargetModel& model, double beta, double R,
                 std::optional<double> domain = std::nullopt);

// Integral of h against pi (1D or 2D).
double target_expectation(const TargetModel& model, double beta,
                          const std::function<double(const Vector&)>& h,
                          std::optional<double> domain = std::nullopt);

}  // namespace sgldv
