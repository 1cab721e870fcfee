#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgldv/discretized_kernel.hpp"
#include "sgldv/samplers.hpp"
#include "sgldv/targets.hpp"

namespace sgldv {

// Probability masses on uniform bins over [lo, hi] plus the two tails.
struct BinnedMasses {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> masses;
  double underflow = 0.0;
  double overflow = 0.0;
  int bins() const { return static_cast<int>(masses.size()); }
};

// Uniform-bin histogram of the first coordinate. Samples below lo land in
// underflow, samples at or above hi in overflow (hi itself goes to the last bin).
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::int64_t> counts;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;
  std::int64_t total = 0;
  std::int64_t burn_in_discarded = 0;

  Histogram() = default;
  Histogram(double lo, double hi, int bins);
  int bins() const { return static_cast<int>(counts.size()); }
  double edge(int k) const { return lo + (hi - lo) * k / bins(); }
  void add(double x);
  BinnedMasses masses() const;
};

// Histogram of states after dropping the first floor(burn_in_fraction * size).
Histogram histogram_from_states(const std::vector<Vector>& states, double lo, double hi, int bins,
                                double burn_in_fraction = 0.5);

// Bin masses from a CDF.
BinnedMasses bin_masses_from_cdf(const std::function<double(double)>& cdf, double lo, double hi,
                                 int bins);

// Bin masses of a 1D target by quadrature.
BinnedMasses target_bin_masses(const TargetModel& model, double beta, double lo, double hi, int bins);

// Half the L1 distance between binned laws, tails included.
double tv_distance(const BinnedMasses& p, const BinnedMasses& q);
double tv_estimate(const Histogram& hist, const BinnedMasses& target);

struct PolyGrowthGap {
  double sample_mean = 0.0;
  double target_mean = 0.0;
  double gap = 0.0;
  double std_error = 0.0;
};

// |mean of h over samples - integral of h against pi|.
PolyGrowthGap poly_growth_gap(const std::vector<Vector>& samples,
                              const std::function<double(const Vector&)>& h,
                              const TargetModel& model, double beta,
                              std::optional<double> domain = std::nullopt);

// C' = C (5 + Rt^D), Rt^2 = max(8 (d + 2 sqrt(d ln(1/eps)) + 2 ln(1/eps)) / (m beta),
// 8 D d / (m beta)), for h(x) <= C (1 + |x|^D).
double poly_growth_constant(double C, double D, int d, double m, double beta, double eps);

struct ScalingFit {
  std::vector<double> x;  // log eta
  std::vector<double> y;  // log error or log phi
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;    // root mean square residual
  double half_width = 0.0;  // approximate 95% half-width of the slope
  std::optional<double> fitted_c0;
};

// OLS of y on x; half-width is 2 OLS standard errors of the slope.
ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y);

// Fit of log(mean over seeds) against x. values[i][s] > 0 is the value at
// point i for seed s. The half-width is the larger of 2 jackknife-over-seeds
// standard errors and 2 OLS standard errors.
ScalingFit fit_scaling_over_seeds(const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& values);

void validate_geometric_grid(const std::vector<double>& grid);

struct SweepCell {
  double eta = 0.0;
  std::uint64_t seed = 0;
  double value = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // eta-major, seed-minor
  ScalingFit fit;
};

enum class SweepMode { Exact, Simulate };

struct EtaSweepConfig {
  ChainConfig chain;  // eta and seed are overridden per cell
  SamplerKind kind = SamplerKind::Sgld;
  SweepMode mode = SweepMode::Exact;
  int bins = 200;
  std::optional<double> range;  // histogram range [-range, range]; default 5 sd of pi
  double burn_in_fraction = 0.5;
  // Steps per simulated chain for each eta; default 10 ln(1e3 lambda) / (C0 eta) with rho = c0 = 1.
  std::function<std::int64_t(double)> steps;
  int jobs = 1;
};

// Stationary TV error per (eta, seed) and the log-log fit. Exact mode solves
// for the chain's stationary law (deterministic, seeds give identical cells);
// Simulate mode histograms one chain per seed after burn-in.
SweepResult eta_sweep(const TargetModel& model, const EtaSweepConfig& cfg,
                      const std::vector<double>& eta_grid, const std::vector<std::uint64_t>& seeds);

// Generic form: error(eta, seed) evaluated per cell.
SweepResult eta_sweep(const std::function<double(double, std::uint64_t)>& error,
                      const std::vector<double>& eta_grid, const std::vector<std::uint64_t>& seeds,
                      int jobs = 1);

// TV between the stationary law of unrestricted LMC or SGLD (1D) and pi,
// from a Nystrom discretization of the transition density.
double stationary_tv(const TargetModel& model, SamplerKind kind, double eta, double beta, int B);

// Stationary density of that chain on the given nodes (integrates to 1).
std::vector<double> stationary_density(const TargetModel& model, SamplerKind kind, double eta,
                                       double beta, int B, const std::vector<double>& nodes);

struct ConductanceSweepConfig {
  double beta = 1.0;
  int B = 1;
  double R = 0.0;
  std::function<double(double)> r_of_eta;  // restriction radius per eta
  int cells_per_axis = 201;
  KernelKind kind = KernelKind::Metropolized;
  double rho = 0.0;  // Cheeger constant used for the fitted c0
  KernelBuildOptions build;
};

// phi(eta) of the discretized kernel per eta, log-log fit and
// fitted c0 = min phi / (rho sqrt(eta / beta)).
SweepResult conductance_sweep(const TargetModel& model, const ConductanceSweepConfig& cfg,
                              const std::vector<double>& eta_grid);

// Generic form over any kernel family.
SweepResult conductance_sweep(const std::function<DiscretizedKernel(double)>& build,
                              const std::vector<double>& eta_grid, double rho, double beta);

// Columns eta, seed, value, then a summary row "fit,slope,intercept,half_width".
std::string sweep_csv(const SweepResult& result, const std::string& value_name);
// Two columns (eta, seed-averaged value), gnuplot friendly.
std::string sweep_plot_data(const SweepResult& result);

}  // namespace sgldv
