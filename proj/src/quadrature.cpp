#include "sgldv/quadrature.hpp"

#include <algorithm>
#include <limits>

#include "sgldv/errors.hpp"

namespace sgldv {

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2 == 1) ++intervals;
  if (b == a) return 0.0;
  const double h = (b - a) / intervals;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < intervals; ++i) {
    const double v = f(a + i * h);
    (i % 2 == 1 ? odd : even) += v;
  }
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

std::vector<double> simpson_weights(int points, double h) {
  if (points < 3 || points % 2 == 0)
    throw InvalidParameter("simpson_weights: need an odd number of points >= 3");
  std::vector<double> w(points);
  for (int i = 0; i < points; ++i) {
    if (i == 0 || i == points - 1)
      w[i] = h / 3.0;
    else
      w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  }
  return w;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& y, double h) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 1; i < y.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (y[i - 1] + y[i]);
  return out;
}

double normal_interval_mass(double a, double b, double mean, double sd) {
  if (!(b > a)) return 0.0;
  const double s = 1.0 / (std::sqrt(2.0) * sd);
  const double za = (a - mean) * s;
  const double zb = (b - mean) * s;
  if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
  if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
  return 1.0 - 0.5 * std::erfc(-za) - 0.5 * std::erfc(zb);
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace sgldv
