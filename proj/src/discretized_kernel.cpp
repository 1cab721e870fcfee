#include "sgldv/discretized_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sgldv/errors.hpp"
#include "sgldv/parallel.hpp"
#include "sgldv/quadrature.hpp"

namespace sgldv {

namespace {

constexpr double kTailSds = 12.0;

struct Row {
  std::vector<int> cols;
  std::vector<double> vals;
};

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Point of the box closest to the origin.
Vector closest_to_origin(const Box& b) {
  Vector p(b.lo.size());
  for (int a = 0; a < b.lo.size(); ++a) p[a] = std::clamp(0.0, b.lo[a], b.hi[a]);
  return p;
}

// Half-width of the chord of the disk of radius rad centred at c, at offset t.
double chord(double rad, double t) { return rad * rad - t * t > 0 ? std::sqrt(rad * rad - t * t) : -1.0; }

}  // namespace

Grid Grid::covering(int dim, double R, int N) { return Grid{dim, -R, R, N}; }

void validate_grid(const Grid& grid, double R) {
  if (grid.N < 16) throw InvalidParameter("grid needs at least 16 cells per axis");
  if (grid.dim < 1 || grid.dim > 2) throw UnsupportedConfiguration("grids support d in {1, 2}");
  const double tol = 1e-12 * (1.0 + R);
  if (!(grid.lo <= -R + tol && grid.hi >= R - tol)) throw InvalidParameter("grid does not cover Omega");
}

std::string to_string(KernelKind kind) { return kind == KernelKind::Lazy ? "lazy" : "metropolized"; }

DiscretizedKernel DiscretizedKernel::from_dense(const Matrix& T, std::optional<Vector> stationary) {
  if (T.rows() != T.cols() || T.rows() < 1) throw InvalidKernel("kernel matrix must be square");
  DiscretizedKernel k;
  for (int i = 0; i < T.rows(); ++i) {
    for (int j = 0; j < T.cols(); ++j) {
      if (T(i, j) != 0.0) {
        k.cols_.push_back(j);
        k.values_.push_back(T(i, j));
      }
    }
    k.row_ptr_.push_back(static_cast<int>(k.cols_.size()));
  }
  k.stationary_ = std::move(stationary);
  return k;
}

double DiscretizedKernel::at(int i, int j) const {
  const auto begin = cols_.begin() + row_ptr_[i];
  const auto end = cols_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

Matrix DiscretizedKernel::dense() const {
  Matrix T = Matrix::Zero(size(), size());
  for (int i = 0; i < size(); ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) T(i, cols_[k]) = values_[k];
  return T;
}

double DiscretizedKernel::max_row_sum_error() const {
  double worst = 0.0;
  for (int i = 0; i < size(); ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double DiscretizedKernel::min_diagonal() const {
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) worst = std::min(worst, at(i, i));
  return worst;
}

double DiscretizedKernel::min_entry() const {
  double worst = std::numeric_limits<double>::infinity();
  for (double v : values_) worst = std::min(worst, v);
  return worst;
}

std::vector<KernelState> kernel_states(const Grid& grid, double R) {
  validate_grid(grid, R);
  const double h = grid.h();
  std::vector<KernelState> states;
  if (grid.dim == 1) {
    for (int k = 0; k < grid.N; ++k) {
      const double a = std::max(grid.lo + k * h, -R);
      const double b = std::min(grid.lo + (k + 1) * h, R);
      if (!(b - a > 1e-12 * h)) continue;
      KernelState s;
      s.point = Vector::Constant(1, std::clamp(grid.center(k), -R, R));
      s.region = Box{Vector::Constant(1, a), Vector::Constant(1, b)};
      s.cell = {k};
      states.push_back(std::move(s));
    }
    return states;
  }
  for (int ky = 0; ky < grid.N; ++ky) {
    for (int kx = 0; kx < grid.N; ++kx) {
      Box cell{Vector(2), Vector(2)};
      cell.lo << grid.lo + kx * h, grid.lo + ky * h;
      cell.hi << grid.lo + (kx + 1) * h, grid.lo + (ky + 1) * h;
      const Vector near = closest_to_origin(cell);
      if (!(near.norm() < R)) continue;
      Vector c(2);
      c << grid.center(kx), grid.center(ky);
      Vector point = c;
      if (c.norm() > R) {
        // Largest step from the nearest point toward the centre staying in Omega.
        double lo_t = 0.0, hi_t = 1.0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo_t + hi_t);
          ((near + mid * (c - near)).norm() <= R ? lo_t : hi_t) = mid;
        }
        point = near + lo_t * (c - near);
      }
      states.push_back(KernelState{point, cell, {kx, ky}});
    }
  }
  return states;
}

Vector target_cell_masses(const TargetModel& model, double beta, const std::vector<KernelState>& states,
                          double R, int subcell_intervals) {
  double shift = std::numeric_limits<double>::infinity();
  if (model.minimizer()) shift = model.minimizer()->value;
  for (const auto& s : states) shift = std::min(shift, model.value(s.point));
  const int q = std::max(2, subcell_intervals + subcell_intervals % 2);
  Vector masses(static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Box& b = states[k].region;
    if (model.dim() == 1) {
      Vector x(1);
      masses[k] = simpson(
          [&](double t) {
            x[0] = t;
            return std::exp(-beta * (model.value(x) - shift));
          },
          b.lo[0], b.hi[0], q);
    } else {
      Vector x(2);
      const double xa = std::max(b.lo[0], -R), xb = std::min(b.hi[0], R);
      masses[k] = simpson(
          [&](double t) {
            const double c = chord(R, t);
            if (c < 0) return 0.0;
            const double ya = std::max(b.lo[1], -c), yb = std::min(b.hi[1], c);
            if (!(yb > ya)) return 0.0;
            return simpson(
                [&](double y) {
                  x << t, y;
                  return std::exp(-beta * (model.value(x) - shift));
                },
                ya, yb, q);
          },
          xa, xb, q);
    }
  }
  const double total = masses.sum();
  if (!(total > 0)) throw DomainError("truncated target has zero mass on the grid");
  return masses / total;
}

namespace {

// Continuous-part masses m_ij of P(.|u_i) over region_j intersected with S_u.
Row continuous_row_1d(const KernelEngine& engine, const std::vector<KernelState>& states, int i) {
  const auto& p = engine.params();
  const Vector& u = states[i].point;
  const double sd = engine.noise_sd();
  const auto means = engine.proposal_means(u);
  double mlo = means.front()[0], mhi = mlo;
  for (const auto& m : means) {
    mlo = std::min(mlo, m[0]);
    mhi = std::max(mhi, m[0]);
  }
  const double lo = std::max({u[0] - p.r, -p.R, mlo - kTailSds * sd});
  const double hi = std::min({u[0] + p.r, p.R, mhi + kTailSds * sd});
  Row row;
  if (!(hi > lo)) return row;
  // States are sorted by position; find those whose region meets [lo, hi].
  auto first = std::partition_point(states.begin(), states.end(),
                                    [&](const KernelState& s) { return s.region.hi[0] <= lo; });
  std::vector<double> edges;
  std::vector<int> idx;
  for (auto it = first; it != states.end() && it->region.lo[0] < hi; ++it) {
    idx.push_back(static_cast<int>(it - states.begin()));
    edges.push_back(std::max(it->region.lo[0], lo));
  }
  if (idx.empty()) return row;
  edges.push_back(std::min(states[idx.back()].region.hi[0], hi));
  // Cell masses as differences of the mixture CDF at the clipped cell edges.
  std::vector<double> cdf(edges.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(means.size());
  for (const auto& m : means)
    for (std::size_t e = 0; e < edges.size(); ++e) cdf[e] += normal_cdf((edges[e] - m[0]) / sd) * scale;
  row.cols = idx;
  row.vals.resize(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) row.vals[k] = std::max(0.0, cdf[k + 1] - cdf[k]);
  return row;
}

Row continuous_row_2d(const KernelEngine& engine, const std::vector<KernelState>& states,
                      const Grid& grid, const std::vector<int>& state_of_cell, int i, int q) {
  const auto& p = engine.params();
  const Vector& u = states[i].point;
  const double sd = engine.noise_sd();
  const auto means = engine.proposal_means(u);
  double drift = 0.0;
  for (const auto& m : means) drift = std::max(drift, (m - u).norm());
  const double reach = std::min(p.r, drift + kTailSds * sd);
  const double h = grid.h();
  auto cell_index = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x - grid.lo) / h)), 0, grid.N - 1);
  };
  const int kx0 = cell_index(u[0] - reach), kx1 = cell_index(u[0] + reach);
  const int ky0 = cell_index(u[1] - reach), ky1 = cell_index(u[1] + reach);
  const double scale = 1.0 / static_cast<double>(means.size());
  Row row;
  for (int ky = ky0; ky <= ky1; ++ky) {
    for (int kx = kx0; kx <= kx1; ++kx) {
      const int j = state_of_cell[static_cast<std::size_t>(ky) * grid.N + kx];
      if (j < 0) continue;
      const Box& b = states[j].region;
      const double xa = std::max({b.lo[0], u[0] - reach, -p.R});
      const double xb = std::min({b.hi[0], u[0] + reach, p.R});
      if (!(xb > xa)) continue;
      auto slice = [&](double x) {
        const double cw = chord(p.R, x);
        const double cr = chord(reach, x - u[0]);
        if (cw < 0 || cr < 0) return 0.0;
        const double ya = std::max({b.lo[1], -cw, u[1] - cr});
        const double yb = std::min({b.hi[1], cw, u[1] + cr});
        if (!(yb > ya)) return 0.0;
        double s = 0.0;
        for (const auto& m : means)
          s += normal_pdf((x - m[0]) / sd) / sd * normal_interval_mass(ya, yb, m[1], sd);
        return s * scale;
      };
      // Split where a chord meets a cell edge or vanishes. Chords vanish with
      // square-root behaviour only at the circle extremes; pieces ending there
      // use a cosine map, the rest plain Simpson.
      std::vector<double> cuts{xa, xb};
      auto add_cut = [&](double x) {
        if (x > xa && x < xb) cuts.push_back(x);
      };
      const double extremes[] = {-p.R, p.R, u[0] - reach, u[0] + reach};
      auto is_extreme = [&](double x) {
        for (double e : extremes)
          if (std::abs(x - e) <= 1e-12 * (1.0 + std::abs(e))) return true;
        return false;
      };
      for (double sign : {-1.0, 1.0}) {
        add_cut(sign * p.R);
        add_cut(u[0] + sign * reach);
        for (double y : {b.lo[1], b.hi[1]}) {
          const double cw = chord(p.R, y);
          if (cw >= 0) add_cut(sign * cw);
          const double cr = chord(reach, y - u[1]);
          if (cr >= 0) add_cut(u[0] + sign * cr);
        }
      }
      // Crossings of the boundary of Omega with the reach circle.
      const double un = u.norm();
      if (un > 0) {
        const double along = (p.R * p.R - reach * reach + un * un) / (2.0 * un);
        const double across = chord(p.R, along);
        if (across >= 0)
          for (double sign : {-1.0, 1.0}) add_cut((along * u[0] - sign * across * u[1]) / un);
      }
      std::sort(cuts.begin(), cuts.end());
      double mass = 0.0;
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c], len = cuts[c + 1] - a;
        if (!(len > 0)) continue;
        if (!is_extreme(a) && !is_extreme(cuts[c + 1])) {
          mass += simpson(slice, a, cuts[c + 1], q);
          continue;
        }
        mass += simpson(
            [&](double t) {
              const double x = a + 0.5 * len * (1.0 - std::cos(std::numbers::pi * t));
              return slice(x) * 0.5 * len * std::numbers::pi * std::sin(std::numbers::pi * t);
            },
            0.0, 1.0, 4 * q);
      }
      if (mass > 0) {
        row.cols.push_back(j);
        row.vals.push_back(mass);
      }
    }
  }
  return row;
}

}  // namespace

DiscretizedKernel build_discretized_kernel(const KernelEngine& engine, const Grid& grid,
                                           KernelKind kind, const KernelBuildOptions& options) {
  const auto& p = engine.params();
  if (grid.dim != engine.dim()) throw InvalidParameter("grid dimension does not match the target");
  const auto states = kernel_states(grid, p.R);
  const int n = static_cast<int>(states.size());
  std::vector<int> state_of_cell;
  if (grid.dim == 2) {
    state_of_cell.assign(static_cast<std::size_t>(grid.N) * grid.N, -1);
    for (int k = 0; k < n; ++k)
      state_of_cell[static_cast<std::size_t>(states[k].cell[1]) * grid.N + states[k].cell[0]] = k;
  }
  const int q = std::max(2, options.subcell_intervals + options.subcell_intervals % 2);

  std::vector<Row> rows(n);
  std::vector<double> deviation(n, 0.0);
  parallel_for(static_cast<std::size_t>(n), options.jobs, [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    Row cont = grid.dim == 1 ? continuous_row_1d(engine, states, i)
                             : continuous_row_2d(engine, states, grid, state_of_cell, i, q);
    double total = 0.0;
    for (double v : cont.vals) total += v;
    deviation[ii] = 0.5 * std::abs(total - engine.accept_prob(states[i].point));
    // Lazy kernel: half the continuous mass off the diagonal, the rest lumped.
    Row row;
    bool diag_done = false;
    double off = 0.0;
    auto push_diag = [&] {
      row.cols.push_back(i);
      row.vals.push_back(0.0);
      diag_done = true;
    };
    for (std::size_t k = 0; k < cont.cols.size(); ++k) {
      const int j = cont.cols[k];
      if (!diag_done && j > i) push_diag();
      if (j == i) {
        push_diag();
        continue;
      }
      row.cols.push_back(j);
      row.vals.push_back(0.5 * cont.vals[k]);
      off += 0.5 * cont.vals[k];
    }
    if (!diag_done) push_diag();
    for (std::size_t k = 0; k < row.cols.size(); ++k)
      if (row.cols[k] == i) row.vals[k] = 1.0 - off;
    rows[ii] = std::move(row);
  });

  DiscretizedKernel kernel;
  kernel.kind_ = kind;
  kernel.max_row_deviation_ = *std::max_element(deviation.begin(), deviation.end());
  if (kernel.max_row_deviation_ > options.row_sum_tolerance)
    throw DiscretizationTooCoarse("row-sum deviation " + std::to_string(kernel.max_row_deviation_) +
                                  " exceeds tolerance; refine the grid or quadrature");
  kernel.states_ = states;
  kernel.target_masses_ =
      target_cell_masses(engine.model(), p.beta, states, p.R, options.subcell_intervals);
  for (int i = 0; i < n; ++i) {
    kernel.cols_.insert(kernel.cols_.end(), rows[i].cols.begin(), rows[i].cols.end());
    kernel.values_.insert(kernel.values_.end(), rows[i].vals.begin(), rows[i].vals.end());
    kernel.row_ptr_.push_back(static_cast<int>(kernel.cols_.size()));
  }
  if (kind == KernelKind::Lazy) return kernel;

  // Metropolis correction on cells: pi_i T*_ij = min(pi_i T_ij, pi_j T_ji).
  const Vector& pi = *kernel.target_masses_;
  std::vector<double> metro(kernel.values_.size());
  parallel_for(static_cast<std::size_t>(n), options.jobs, [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    double off = 0.0;
    int diag_pos = -1;
    for (int k = kernel.row_ptr_[i]; k < kernel.row_ptr_[i + 1]; ++k) {
      const int j = kernel.cols_[k];
      if (j == i) {
        diag_pos = k;
        continue;
      }
      const double forward = pi[i] * kernel.values_[k];
      const double backward = pi[j] * kernel.at(j, i);
      double v = kernel.values_[k];
      if (forward > 0.0 && backward < forward) v *= backward / forward;
      metro[k] = v;
      off += v;
    }
    metro[diag_pos] = 1.0 - off;
  });
  kernel.values_ = std::move(metro);
  kernel.stationary_ = pi;
  return kernel;
}

double detailed_balance_residual(const DiscretizedKernel& kernel, const Vector& pi) {
  if (pi.size() != kernel.size()) throw InvalidParameter("stationary vector size mismatch");
  double worst = 0.0, scale = 0.0;
  const auto& rp = kernel.row_ptr();
  for (int i = 0; i < kernel.size(); ++i) {
    for (int k = rp[i]; k < rp[i + 1]; ++k) {
      const int j = kernel.cols()[k];
      if (j == i) continue;
      const double forward = pi[i] * kernel.values()[k];
      scale = std::max(scale, forward);
      worst = std::max(worst, std::abs(forward - pi[j] * kernel.at(j, i)));
    }
  }
  return scale > 0 ? worst / scale : 0.0;
}

SandwichReport delta_sandwich_check(const KernelEngine& engine, double delta,
                                    const std::vector<SetSpec>& sets,
                                    const std::vector<Vector>& points, double tolerance, int jobs) {
  struct PointResult {
    int violations = 0;
    double worst_dev = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    double lower = std::numeric_limits<double>::infinity();
  };
  std::vector<PointResult> results(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t k) {
    const Vector& u = points[k];
    const auto one = [](const Vector&) { return 1.0; };
    const auto alpha = [&](const Vector& w) { return engine.mh_accept(u, w); };
    const double p_u = engine.integrate_continuous(u, nullptr, one);
    const double pa_u = engine.integrate_continuous(u, nullptr, alpha);
    PointResult r;
    for (const auto& set : sets) {
      const double atom_t = set.contains(u) ? 1.0 - 0.5 * p_u : 0.0;
      const double atom_s = set.contains(u) ? 1.0 - 0.5 * pa_u : 0.0;
      const double t = atom_t + 0.5 * engine.integrate_continuous(u, &set, one);
      const double ts = atom_s + 0.5 * engine.integrate_continuous(u, &set, alpha);
      const double up = (1.0 + delta) * ts - t;
      const double low = t - (1.0 - delta) * ts;
      r.upper = std::min(r.upper, up);
      r.lower = std::min(r.lower, low);
      if (up < -tolerance || low < -tolerance) ++r.violations;
      if (ts > 0) r.worst_dev = std::max(r.worst_dev, std::abs(t / ts - 1.0));
    }
    results[k] = r;
  });
  SandwichReport rep;
  rep.delta = delta;
  rep.pairs_checked = static_cast<int>(points.size() * sets.size());
  rep.worst_upper_slack = std::numeric_limits<double>::infinity();
  rep.worst_lower_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    rep.violations += r.violations;
    rep.worst_ratio_deviation = std::max(rep.worst_ratio_deviation, r.worst_dev);
    rep.worst_upper_slack = std::min(rep.worst_upper_slack, r.upper);
    rep.worst_lower_slack = std::min(rep.worst_lower_slack, r.lower);
  }
  return rep;
}

namespace {

// Metropolized transition masses from u onto the states, atom included.
std::vector<double> metropolized_cell_masses(const KernelEngine& engine,
                                             const std::vector<KernelState>& states,
                                             const Vector& u) {
  const auto& p = engine.params();
  const auto alpha = [&](const Vector& w) { return engine.mh_accept(u, w); };
  const double reach = p.r + 1e-12;
  std::vector<double> masses(states.size(), 0.0);
  double moved = 0.0;
  int home = -1;
  for (std::size_t j = 0; j < states.size(); ++j) {
    const Box& b = states[j].region;
    if (home < 0 && (u.array() >= b.lo.array()).all() && (u.array() <= b.hi.array()).all())
      home = static_cast<int>(j);
    // Skip regions farther than r from u.
    Vector gap = (b.lo - u).cwiseMax(u - b.hi).cwiseMax(0.0);
    if (gap.norm() > reach) continue;
    SetSpec set;
    set.parts.push_back(b);
    masses[j] = 0.5 * engine.integrate_continuous(u, &set, alpha);
    moved += masses[j];
  }
  if (home < 0) throw DomainError("point is not covered by any grid state");
  masses[home] += 1.0 - moved;
  return masses;
}

}  // namespace

KernelTvReport kernel_tv_distance(const KernelEngine& engine, const Grid& grid, const Vector& u,
                                  const Vector& v) {
  const auto& p = engine.params();
  if (!engine.in_domain(u) || !engine.in_domain(v)) throw DomainError("points must lie in Omega");
  const auto states = kernel_states(grid, p.R);
  KernelTvReport rep;
  const double sd = engine.noise_sd();
  rep.bound = (1.0 + engine.model().constants().L * p.eta) * (u - v).norm() / sd;
  if (u == v) return rep;

  const auto a = metropolized_cell_masses(engine, states, u);
  const auto b = metropolized_cell_masses(engine, states, v);
  for (std::size_t j = 0; j < a.size(); ++j) rep.tv_metropolized += 0.5 * std::abs(a[j] - b[j]);

  const auto mu = engine.proposal_means(u);
  const auto mv = engine.proposal_means(v);
  Vector lo = mu.front(), hi = mu.front();
  for (const auto* set : {&mu, &mv})
    for (const auto& m : *set) {
      lo = lo.cwiseMin(m);
      hi = hi.cwiseMax(m);
    }
  lo.array() -= kTailSds * sd;
  hi.array() += kTailSds * sd;
  const double step = sd / 32.0;
  if (engine.dim() == 1) {
    Vector w(1);
    const int nint = static_cast<int>(std::ceil((hi[0] - lo[0]) / step));
    rep.tv_unrestricted = 0.5 * simpson(
                                    [&](double x) {
                                      w[0] = x;
                                      return std::abs(engine.density(u, w) - engine.density(v, w));
                                    },
                                    lo[0], hi[0], nint);
  } else {
    const double step2 = sd / 8.0;
    const int nx = static_cast<int>(std::ceil((hi[0] - lo[0]) / step2));
    const int ny = static_cast<int>(std::ceil((hi[1] - lo[1]) / step2));
    const double hx = (hi[0] - lo[0]) / nx, hy = (hi[1] - lo[1]) / ny;
    Vector w(2);
    double s = 0.0;
    for (int iy = 0; iy <= ny; ++iy)
      for (int ix = 0; ix <= nx; ++ix) {
        w << lo[0] + ix * hx, lo[1] + iy * hy;
        const double wt = (ix == 0 || ix == nx ? 0.5 : 1.0) * (iy == 0 || iy == ny ? 0.5 : 1.0);
        s += wt * std::abs(engine.density(u, w) - engine.density(v, w));
      }
    rep.tv_unrestricted = 0.5 * s * hx * hy;
  }
  return rep;
}

}  // namespace sgldv
