#include "sgldv/cheeger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "sgldv/errors.hpp"
#include "sgldv/quadrature.hpp"

namespace sgldv {

namespace {

// Both sides' masses are passed so tiny tails are not lost to cancellation.
double ratio(double boundary, double inside, double outside) {
  const double denom = std::min(inside, outside);
  return denom > 1e-300 ? boundary / denom : std::numeric_limits<double>::infinity();
}

CheegerResult cheeger_1d(const GridDensity& d) {
  const int n = d.nx;
  const auto& p = d.values;
  const std::vector<double> cum = cumulative_trapezoid(p, d.h);
  std::vector<double> rev(p.rbegin(), p.rend());
  std::vector<double> tail = cumulative_trapezoid(rev, d.h);
  std::reverse(tail.begin(), tail.end());  // tail[k]: mass right of node k
  auto mass = [&](int a, int b) { return cum[b] - cum[a]; };
  // Boundary density at node k; the domain edges are not cut surfaces.
  auto edge = [&](int k) { return (k == 0 || k == n - 1) ? 0.0 : p[k]; };

  CheegerResult best;
  best.rho = std::numeric_limits<double>::infinity();
  int ba = 0, bb = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (a == 0 && b == n - 1) continue;
      const double r = ratio(edge(a) + edge(b), mass(a, b), cum[a] + tail[b]);
      if (r < best.rho) {
        best.rho = r;
        ba = a;
        bb = b;
      }
    }
  std::ostringstream desc;
  desc << "interval [" << d.node(ba) << ", " << d.node(bb) << "]";
  best.cut = desc.str();

  // Unions of two or three intervals over a candidate endpoint set.
  std::set<int> cand{0, n - 1};
  for (int k = 1; k + 1 < n; ++k)
    if (p[k] <= p[k - 1] && p[k] <= p[k + 1]) cand.insert(k);
  const double total = cum[n - 1];
  for (int q = 1; q < 32; ++q) {
    const double target = total * q / 32.0;
    const int k = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), target) - cum.begin());
    cand.insert(std::clamp(k, 0, n - 1));
  }
  std::vector<int> c(cand.begin(), cand.end());
  if (c.size() > 48) {
    // Keep minima and an even subsample of the rest.
    std::vector<int> thin;
    const std::size_t stride = (c.size() + 47) / 48;
    for (std::size_t k = 0; k < c.size(); k += stride) thin.push_back(c[k]);
    thin.push_back(c.back());
    c = thin;
  }
  const int m = static_cast<int>(c.size());
  for (int i0 = 0; i0 < m; ++i0)
    for (int i1 = i0 + 1; i1 < m; ++i1)
      for (int i2 = i1 + 1; i2 < m; ++i2)
        for (int i3 = i2 + 1; i3 < m; ++i3) {
          const double mass2 = mass(c[i0], c[i1]) + mass(c[i2], c[i3]);
          const double gaps2 = cum[c[i0]] + mass(c[i1], c[i2]);
          const double bd2 = edge(c[i0]) + edge(c[i1]) + edge(c[i2]) + edge(c[i3]);
          const double r2 = ratio(bd2, mass2, gaps2 + tail[c[i3]]);
          if (r2 < best.rho) {
            best.rho = r2;
            best.cut = "union of two intervals";
          }
          for (int i4 = i3 + 1; i4 < m; ++i4)
            for (int i5 = i4 + 1; i5 < m; ++i5) {
              const double r3 = ratio(bd2 + edge(c[i4]) + edge(c[i5]), mass2 + mass(c[i4], c[i5]),
                                      gaps2 + mass(c[i3], c[i4]) + tail[c[i5]]);
              if (r3 < best.rho) {
                best.rho = r3;
                best.cut = "union of three intervals";
              }
            }
        }
  return best;
}

// Bilinear interpolation on the node grid; zero outside.
double interpolate(const GridDensity& d, double x, double y) {
  const double fx = (x - d.lo) / d.h, fy = (y - d.lo) / d.h;
  if (fx < 0 || fy < 0 || fx > d.nx - 1 || fy > d.ny - 1) return 0.0;
  const int ix = std::min(static_cast<int>(fx), d.nx - 2);
  const int iy = std::min(static_cast<int>(fy), d.ny - 2);
  const double tx = fx - ix, ty = fy - iy;
  return (1 - tx) * (1 - ty) * d.at(ix, iy) + tx * (1 - ty) * d.at(ix + 1, iy) +
         (1 - tx) * ty * d.at(ix, iy + 1) + tx * ty * d.at(ix + 1, iy + 1);
}

CheegerResult cheeger_2d(const GridDensity& d) {
  CheegerResult best;
  best.heuristic = true;
  best.rho = std::numeric_limits<double>::infinity();
  const double h = d.h;
  auto tw = [](int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
  // Half-planes {x <= t} and {y <= t} at interior nodes.
  for (int axis = 0; axis < 2; ++axis) {
    const int n = axis == 0 ? d.nx : d.ny;
    const int other = axis == 0 ? d.ny : d.nx;
    std::vector<double> line(n, 0.0);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < other; ++j)
        line[k] += tw(j, other) * h * (axis == 0 ? d.at(k, j) : d.at(j, k));
    const auto cum = cumulative_trapezoid(line, h);
    std::vector<double> rev(line.rbegin(), line.rend());
    auto tail = cumulative_trapezoid(rev, h);
    std::reverse(tail.begin(), tail.end());
    for (int k = 1; k + 1 < n; ++k) {
      const double r = ratio(line[k], cum[k], tail[k]);
      if (r < best.rho) {
        best.rho = r;
        best.cut = std::string(axis == 0 ? "x" : "y") + " <= " + std::to_string(d.node(k));
      }
    }
  }
  // Disks centred at the origin and at the density maximum.
  const auto peak = std::max_element(d.values.begin(), d.values.end()) - d.values.begin();
  const double px = d.node(static_cast<int>(peak % d.nx)), py = d.node(static_cast<int>(peak / d.nx));
  const double extent = d.h * (d.nx - 1);
  for (const auto& [cx, cy] : {std::pair{0.0, 0.0}, std::pair{px, py}}) {
    for (int k = 1; k <= 200; ++k) {
      const double s = extent * k / 200.0;
      double inside = 0.0, outside = 0.0;
      for (int iy = 0; iy < d.ny; ++iy)
        for (int ix = 0; ix < d.nx; ++ix) {
          const double dx = d.node(ix) - cx, dy = d.node(iy) - cy;
          (dx * dx + dy * dy <= s * s ? inside : outside) += tw(ix, d.nx) * tw(iy, d.ny) * d.at(ix, iy);
        }
      const int na = 720;
      double boundary = 0.0;
      for (int a = 0; a < na; ++a) {
        const double th = 2.0 * std::numbers::pi * a / na;
        boundary += interpolate(d, cx + s * std::cos(th), cy + s * std::sin(th));
      }
      boundary *= 2.0 * std::numbers::pi * s / na;
      const double r = ratio(boundary, inside * h * h, outside * h * h);
      if (r < best.rho) {
        best.rho = r;
        best.cut = "disk radius " + std::to_string(s);
      }
    }
  }
  return best;
}

}  // namespace

CheegerResult cheeger_constant(const GridDensity& density) {
  if (density.nx < 3 || static_cast<std::size_t>(density.nx) * density.ny != density.values.size())
    throw InvalidParameter("density grid is malformed");
  for (double v : density.values)
    if (!(v >= 0)) throw InvalidParameter("density must be nonnegative");
  if (std::abs(grid_mass(density) - 1.0) > 1e-6) throw InvalidParameter("density is not normalized");
  return density.dim == 1 ? cheeger_1d(density) : cheeger_2d(density);
}

}  // namespace sgldv
