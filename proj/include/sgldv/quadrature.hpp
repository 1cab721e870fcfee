#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace sgldv {

// Composite Simpson rule with `intervals` subintervals (rounded up to even).
double simpson(const std::function<double(double)>& f, double a, double b,
               int intervals);

// Simpson weights for `points` equally spaced nodes (points odd, >= 3).
std::vector<double> simpson_weights(int points, double h);

// Cumulative trapezoid integral of samples y on spacing h; out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& y, double h);

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(a <= X <= b) for X ~ N(mean, sd^2), accurate in both tails.
double normal_interval_mass(double a, double b, double mean, double sd);

// log(sum_i exp(v_i)).
double log_sum_exp(const std::vector<double>& v);

}  // namespace sgldv
