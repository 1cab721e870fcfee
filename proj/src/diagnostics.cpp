#include "sgldv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgldv/conductance.hpp"
#include "sgldv/errors.hpp"
#include "sgldv/io.hpp"
#include "sgldv/parallel.hpp"
#include "sgldv/quadrature.hpp"
#include "sgldv/rng.hpp"
#include "sgldv/schedule.hpp"
#include "sgldv/truncation.hpp"

namespace sgldv {

Histogram::Histogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_), counts(bins, 0) {
  if (bins < 1) throw InvalidParameter("histogram needs at least one bin");
  if (!(hi > lo)) throw InvalidParameter("histogram range must satisfy lo < hi");
}

void Histogram::add(double x) {
  ++total;
  if (x < lo) {
    ++underflow;
  } else if (x > hi) {
    ++overflow;
  } else {
    const int k = std::min(bins() - 1, static_cast<int>((x - lo) / (hi - lo) * bins()));
    ++counts[k];
  }
}

BinnedMasses Histogram::masses() const {
  if (total == 0) throw InvalidParameter("histogram is empty");
  BinnedMasses m;
  m.lo = lo;
  m.hi = hi;
  const double n = static_cast<double>(total);
  m.masses.reserve(counts.size());
  for (auto c : counts) m.masses.push_back(static_cast<double>(c) / n);
  m.underflow = static_cast<double>(underflow) / n;
  m.overflow = static_cast<double>(overflow) / n;
  return m;
}

Histogram histogram_from_states(const std::vector<Vector>& states, double lo, double hi, int bins,
                                double burn_in_fraction) {
  if (!(burn_in_fraction >= 0 && burn_in_fraction < 1))
    throw InvalidParameter("burn-in fraction must lie in [0, 1)");
  Histogram h(lo, hi, bins);
  const auto skip = static_cast<std::size_t>(std::floor(burn_in_fraction * states.size()));
  h.burn_in_discarded = static_cast<std::int64_t>(skip);
  for (std::size_t k = skip; k < states.size(); ++k) h.add(states[k][0]);
  return h;
}

BinnedMasses bin_masses_from_cdf(const std::function<double(double)>& cdf, double lo, double hi,
                                 int bins) {
  if (bins < 1 || !(hi > lo)) throw InvalidParameter("invalid bin specification");
  BinnedMasses m;
  m.lo = lo;
  m.hi = hi;
  double prev = cdf(lo);
  m.underflow = prev;
  for (int k = 1; k <= bins; ++k) {
    const double cur = cdf(lo + (hi - lo) * k / bins);
    m.masses.push_back(cur - prev);
    prev = cur;
  }
  m.overflow = 1.0 - prev;
  return m;
}

BinnedMasses target_bin_masses(const TargetModel& model, double beta, double lo, double hi, int bins) {
  if (model.dim() != 1) throw UnsupportedConfiguration("binned target masses need d = 1");
  if (bins < 1 || !(hi > lo)) throw InvalidParameter("invalid bin specification");
  const double D = std::max({quadrature_extent(model, beta), std::abs(lo), std::abs(hi)}) + 1.0;
  double ref = std::numeric_limits<double>::infinity();
  if (model.minimizer()) {
    ref = model.minimizer()->value;
  } else {
    Vector x(1);
    for (int k = 0; k <= 4000; ++k) {
      x[0] = -D + 2.0 * D * k / 4000;
      ref = std::min(ref, model.value(x));
    }
  }
  Vector x(1);
  auto w = [&](double t) {
    x[0] = t;
    return std::exp(-beta * (model.value(x) - ref));
  };
  const double scale = std::min(0.01, 0.05 / std::sqrt(beta * model.constants().L));
  auto pieces = [&](double a, double b) {
    return std::max(2, static_cast<int>(std::ceil((b - a) / scale)));
  };
  BinnedMasses m;
  m.lo = lo;
  m.hi = hi;
  const double width = (hi - lo) / bins;
  for (int k = 0; k < bins; ++k) {
    const double a = lo + k * width;
    m.masses.push_back(simpson(w, a, a + width, std::max(64, pieces(a, a + width))));
  }
  m.underflow = lo > -D ? simpson(w, -D, lo, pieces(-D, lo)) : 0.0;
  m.overflow = hi < D ? simpson(w, hi, D, pieces(hi, D)) : 0.0;
  const double z = std::accumulate(m.masses.begin(), m.masses.end(), 0.0) + m.underflow + m.overflow;
  for (double& v : m.masses) v /= z;
  m.underflow /= z;
  m.overflow /= z;
  return m;
}

double tv_distance(const BinnedMasses& p, const BinnedMasses& q) {
  if (p.bins() != q.bins() || p.lo != q.lo || p.hi != q.hi)
    throw InvalidParameter("bin edges do not match");
  double s = std::abs(p.underflow - q.underflow) + std::abs(p.overflow - q.overflow);
  for (int k = 0; k < p.bins(); ++k) s += std::abs(p.masses[k] - q.masses[k]);
  return std::min(1.0, 0.5 * s);
}

double tv_estimate(const Histogram& hist, const BinnedMasses& target) {
  return tv_distance(hist.masses(), target);
}

PolyGrowthGap poly_growth_gap(const std::vector<Vector>& samples,
                              const std::function<double(const Vector&)>& h,
                              const TargetModel& model, double beta, std::optional<double> domain) {
  if (samples.empty()) throw InvalidParameter("no samples");
  PolyGrowthGap g;
  double s = 0.0, s2 = 0.0;
  for (const auto& x : samples) {
    const double v = h(x);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(samples.size());
  g.sample_mean = s / n;
  g.std_error = n > 1 ? std::sqrt(std::max(0.0, (s2 - n * g.sample_mean * g.sample_mean) / (n - 1)) / n) : 0.0;
  g.target_mean = target_expectation(model, beta, h, domain);
  g.gap = std::abs(g.sample_mean - g.target_mean);
  return g;
}

double poly_growth_constant(double C, double D, int d, double m, double beta, double eps) {
  if (!(C > 0) || !(D >= 0) || d < 1 || !(m > 0) || !(beta > 0) || !(eps > 0 && eps < 1))
    throw InvalidParameter("invalid polynomial growth constants");
  const double l = std::log(1.0 / eps);
  const double r2 = std::max(8.0 * (d + 2.0 * std::sqrt(d * l) + 2.0 * l) / (m * beta),
                             8.0 * D * d / (m * beta));
  return C * (5.0 + std::pow(r2, D / 2.0));
}

namespace {

struct Ols {
  double slope, intercept, rms, se;
};

Ols ols(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw InvalidParameter("scaling fit needs distinct x values");
  Ols o;
  o.slope = sxy / sxx;
  o.intercept = my - o.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - o.intercept - o.slope * x[i];
    rss += r * r;
  }
  o.rms = std::sqrt(rss / n);
  o.se = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return o;
}

}  // namespace

ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidParameter("x and y lengths differ");
  if (x.size() < 4) throw InvalidParameter("scaling fit needs at least 4 points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidParameter("scaling fit input is not finite");
  const Ols o = ols(x, y);
  ScalingFit f;
  f.x = x;
  f.y = y;
  f.slope = o.slope;
  f.intercept = o.intercept;
  f.residual = o.rms;
  f.half_width = 2.0 * o.se;
  return f;
}

ScalingFit fit_scaling_over_seeds(const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& values) {
  if (values.size() != x.size()) throw InvalidParameter("one value row per point is required");
  const std::size_t seeds = values.empty() ? 0 : values.front().size();
  if (seeds == 0) throw InvalidParameter("no seeds");
  auto log_mean = [&](std::size_t i, std::optional<std::size_t> skip) {
    double s = 0.0;
    int c = 0;
    for (std::size_t j = 0; j < seeds; ++j) {
      if (skip && *skip == j) continue;
      s += values[i][j];
      ++c;
    }
    return std::log(s / c);
  };
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (values[i].size() != seeds) throw InvalidParameter("ragged seed table");
    y[i] = log_mean(i, std::nullopt);
  }
  ScalingFit f = fit_scaling(x, y);
  if (seeds >= 2) {
    std::vector<double> slopes(seeds);
    for (std::size_t j = 0; j < seeds; ++j) {
      std::vector<double> yj(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) yj[i] = log_mean(i, j);
      slopes[j] = ols(x, yj).slope;
    }
    const double mean = std::accumulate(slopes.begin(), slopes.end(), 0.0) / seeds;
    double ss = 0.0;
    for (double s : slopes) ss += (s - mean) * (s - mean);
    const double se = std::sqrt((seeds - 1.0) / seeds * ss);
    f.half_width = std::max(f.half_width, 2.0 * se);
  }
  return f;
}

void validate_geometric_grid(const std::vector<double>& grid) {
  if (grid.size() < 4) throw InvalidParameter("eta grid needs at least 4 points");
  for (double e : grid)
    if (!(e > 0) || !std::isfinite(e)) throw InvalidParameter("eta grid values must be positive");
  const double ratio = grid[1] / grid[0];
  if (std::abs(ratio - 1.0) < 1e-12) throw InvalidParameter("eta grid is not geometric");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] / grid[i - 1] / ratio - 1.0) > 1e-6) throw InvalidParameter("eta grid is not geometric");
}

namespace {

std::vector<double> log_of(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double e : v) out.push_back(std::log(e));
  return out;
}

SweepResult assemble(const std::vector<double>& eta_grid, const std::vector<std::uint64_t>& seeds,
                     const std::vector<double>& values) {
  SweepResult res;
  std::vector<std::vector<double>> table(eta_grid.size(), std::vector<double>(seeds.size()));
  for (std::size_t i = 0; i < eta_grid.size(); ++i)
    for (std::size_t j = 0; j < seeds.size(); ++j) {
      const double v = values[i * seeds.size() + j];
      res.cells.push_back({eta_grid[i], seeds[j], v});
      table[i][j] = v;
    }
  res.fit = fit_scaling_over_seeds(log_of(eta_grid), table);
  return res;
}

double default_range(const TargetModel& model, double beta) {
  const double second = target_expectation(model, beta, [](const Vector& x) { return x.squaredNorm(); });
  return 5.0 * std::sqrt(second);
}

std::int64_t default_steps(const TargetModel& model, double beta, double eta) {
  const double c0_rate = 1.0 / (8.0 * beta);
  const double lg = std::log(1e3) + log_warm_start_bound(model, beta);
  return static_cast<std::int64_t>(std::ceil(10.0 * lg / (c0_rate * eta)));
}

double simulate_cell(const TargetModel& model, const EtaSweepConfig& cfg, double eta,
                     std::uint64_t seed, const BinnedMasses& target, double range) {
  ChainConfig c = cfg.chain;
  c.eta = eta;
  c.seed = seed;
  c.K = cfg.steps ? cfg.steps(eta) : default_steps(model, c.beta, eta);
  if (cfg.kind == SamplerKind::Metropolized)
    throw UnsupportedConfiguration("simulated eta sweeps support lmc, sgld and projected samplers");
  validate_chain_config(c, model, cfg.kind);
  RngStream rng(c.seed, c.chain_id);
  Vector x = draw_initial(model, c, rng);
  Histogram h(-range, range, cfg.bins);
  const auto burn = static_cast<std::int64_t>(std::floor(cfg.burn_in_fraction * (c.K + 1)));
  h.burn_in_discarded = burn;
  for (std::int64_t k = 0; k <= c.K; ++k) {
    if (k > 0) {
      switch (cfg.kind) {
        case SamplerKind::Lmc: x = lmc_step(model, x, c, rng); break;
        case SamplerKind::Sgld: x = sgld_step(model, x, c, rng); break;
        default: x = projected_sgld_step(model, x, c, rng).next; break;
      }
    }
    if (k >= burn) h.add(x[0]);
  }
  return tv_estimate(h, target);
}

}  // namespace

SweepResult eta_sweep(const std::function<double(double, std::uint64_t)>& error,
                      const std::vector<double>& eta_grid, const std::vector<std::uint64_t>& seeds,
                      int jobs) {
  validate_geometric_grid(eta_grid);
  if (seeds.empty()) throw InvalidParameter("at least one seed is required");
  std::vector<double> values(eta_grid.size() * seeds.size());
  parallel_for(values.size(), jobs, [&](std::size_t c) {
    values[c] = error(eta_grid[c / seeds.size()], seeds[c % seeds.size()]);
  });
  return assemble(eta_grid, seeds, values);
}

SweepResult eta_sweep(const TargetModel& model, const EtaSweepConfig& cfg,
                      const std::vector<double>& eta_grid, const std::vector<std::uint64_t>& seeds) {
  validate_geometric_grid(eta_grid);
  if (seeds.empty()) throw InvalidParameter("at least one seed is required");
  if (model.dim() != 1) throw UnsupportedConfiguration("eta sweeps need d = 1");
  if (cfg.mode == SweepMode::Exact) {
    if (cfg.kind != SamplerKind::Lmc && cfg.kind != SamplerKind::Sgld)
      throw UnsupportedConfiguration("exact eta sweeps support lmc and sgld");
    std::vector<double> per_eta(eta_grid.size());
    parallel_for(eta_grid.size(), cfg.jobs, [&](std::size_t i) {
      per_eta[i] = stationary_tv(model, cfg.kind, eta_grid[i], cfg.chain.beta, cfg.chain.B);
    });
    std::vector<double> values;
    for (double v : per_eta) values.insert(values.end(), seeds.size(), v);
    return assemble(eta_grid, seeds, values);
  }
  if (cfg.bins < 1) throw InvalidParameter("bins must be positive");
  const double range = cfg.range ? *cfg.range : default_range(model, cfg.chain.beta);
  const BinnedMasses target = target_bin_masses(model, cfg.chain.beta, -range, range, cfg.bins);
  return eta_sweep(
      [&](double eta, std::uint64_t seed) { return simulate_cell(model, cfg, eta, seed, target, range); },
      eta_grid, seeds, cfg.jobs);
}

SweepResult conductance_sweep(const std::function<DiscretizedKernel(double)>& build,
                              const std::vector<double>& eta_grid, double rho, double beta) {
  validate_geometric_grid(eta_grid);
  std::vector<double> phi(eta_grid.size());
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    phi[i] = conductance(build(eta_grid[i])).phi;
    if (!(phi[i] > 0)) throw DomainError("conductance vanished at eta = " + format_double(eta_grid[i]));
  }
  SweepResult res = assemble(eta_grid, {0}, phi);
  if (rho > 0) {
    double c0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < eta_grid.size(); ++i)
      c0 = std::min(c0, phi[i] / (rho * std::sqrt(eta_grid[i] / beta)));
    res.fit.fitted_c0 = c0;
  }
  return res;
}

SweepResult conductance_sweep(const TargetModel& model, const ConductanceSweepConfig& cfg,
                              const std::vector<double>& eta_grid) {
  if (!cfg.r_of_eta) throw InvalidConfig("conductance sweep needs a restriction radius rule");
  const Grid grid = Grid::covering(model.dim(), cfg.R, cfg.cells_per_axis);
  return conductance_sweep(
      [&](double eta) {
        KernelParams p;
        p.eta = eta;
        p.beta = cfg.beta;
        p.B = cfg.B;
        p.R = cfg.R;
        p.r = cfg.r_of_eta(eta);
        const KernelEngine engine(model, p);
        return build_discretized_kernel(engine, grid, cfg.kind, cfg.build);
      },
      eta_grid, cfg.rho, cfg.beta);
}

std::string sweep_csv(const SweepResult& result, const std::string& value_name) {
  std::string out = csv_row({"eta", "seed", value_name});
  for (const auto& c : result.cells) out += csv_row({format_double(c.eta), std::to_string(c.seed), format_double(c.value)});
  std::vector<std::string> summary{"fit", "slope=" + format_double(result.fit.slope),
                                   "intercept=" + format_double(result.fit.intercept),
                                   "half_width=" + format_double(result.fit.half_width)};
  if (result.fit.fitted_c0) summary.push_back("c0=" + format_double(*result.fit.fitted_c0));
  out += csv_row(summary);
  return out;
}

std::string sweep_plot_data(const SweepResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.fit.x.size(); ++i)
    out += format_double(std::exp(result.fit.x[i])) + " " + format_double(std::exp(result.fit.y[i])) + "\n";
  return out;
}

}  // namespace sgldv
