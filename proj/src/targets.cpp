#include "sgldv/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgldv/errors.hpp"
#include "sgldv/parallel.hpp"
#include "sgldv/quadrature.hpp"

namespace sgldv {

Matrix ComponentFamily::hessian(int, const Vector&) const {
  throw MissingConstant("component Hessian not available for family " + name());
}

namespace {

class GaussianFamily final : public ComponentFamily {
 public:
  GaussianFamily(Vector mean, double precision, int n)
      : mean_(std::move(mean)), precision_(precision), n_(n) {}
  int n() const override { return n_; }
  int dim() const override { return static_cast<int>(mean_.size()); }
  double value(int, const Vector& x) const override {
    return 0.5 * precision_ * (x - mean_).squaredNorm();
  }
  Vector grad(int, const Vector& x) const override { return precision_ * (x - mean_); }
  bool has_hessian() const override { return true; }
  Matrix hessian(int, const Vector&) const override {
    return precision_ * Matrix::Identity(dim(), dim());
  }
  std::string name() const override { return "gaussian"; }

 private:
  Vector mean_;
  double precision_;
  int n_;
};

class ShiftedMixtureFamily final : public ComponentFamily {
 public:
  ShiftedMixtureFamily(const Vector& weights, const Matrix& modes, const Matrix& shifts)
      : log_w_(weights.array().log()), modes_(modes), shifts_(shifts) {}
  int n() const override { return static_cast<int>(shifts_.rows()); }
  int dim() const override { return static_cast<int>(modes_.cols()); }

  double value(int i, const Vector& x) const override {
    std::vector<double> terms(modes_.rows());
    for (int j = 0; j < modes_.rows(); ++j) terms[j] = log_w_[j] - 0.5 * (x - center(i, j)).squaredNorm();
    return -log_sum_exp(terms);
  }

  Vector grad(int i, const Vector& x) const override {
    const Vector r = responsibilities(i, x);
    Vector mean_center = Vector::Zero(dim());
    for (int j = 0; j < modes_.rows(); ++j) mean_center += r[j] * center(i, j);
    return x - mean_center;
  }

  bool has_hessian() const override { return true; }
  Matrix hessian(int i, const Vector& x) const override {
    const Vector r = responsibilities(i, x);
    Vector mean_center = Vector::Zero(dim());
    for (int j = 0; j < modes_.rows(); ++j) mean_center += r[j] * center(i, j);
    Matrix cov = Matrix::Zero(dim(), dim());
    for (int j = 0; j < modes_.rows(); ++j) {
      const Vector c = center(i, j) - mean_center;
      cov += r[j] * c * c.transpose();
    }
    return Matrix::Identity(dim(), dim()) - cov;
  }
  std::string name() const override { return "shifted_mixture"; }

 private:
  Vector center(int i, int j) const {
    return modes_.row(j).transpose() + shifts_.row(i).transpose();
  }
  Vector responsibilities(int i, const Vector& x) const {
    const int J = static_cast<int>(modes_.rows());
    std::vector<double> terms(J);
    for (int j = 0; j < J; ++j) terms[j] = log_w_[j] - 0.5 * (x - center(i, j)).squaredNorm();
    const double lse = log_sum_exp(terms);
    Vector r(J);
    for (int j = 0; j < J; ++j) r[j] = std::exp(terms[j] - lse);
    return r;
  }

  Vector log_w_;
  Matrix modes_;
  Matrix shifts_;
};

class NoiseSplitFamily final : public ComponentFamily {
 public:
  NoiseSplitFamily(TargetModel base, Matrix noise) : base_(std::move(base)), noise_(std::move(noise)) {}
  int n() const override { return static_cast<int>(noise_.rows()); }
  int dim() const override { return base_.dim(); }
  double value(int i, const Vector& x) const override {
    return base_.value(x) + noise_.row(i).dot(x);
  }
  Vector grad(int i, const Vector& x) const override {
    return base_.grad(x) + noise_.row(i).transpose();
  }
  bool has_hessian() const override { return base_.has_hessian(); }
  Matrix hessian(int, const Vector& x) const override { return base_.hessian(x); }
  std::string name() const override { return "noise_split(" + base_.family_name() + ")"; }

 private:
  TargetModel base_;
  Matrix noise_;
};

void require_zero_column_sums(const Matrix& m, const char* what) {
  const double scale = 1.0 + (m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  for (int c = 0; c < m.cols(); ++c) {
    if (std::abs(m.col(c).sum()) > 1e-12 * scale * std::max<Eigen::Index>(1, m.rows()))
      throw InvalidParameter(std::string(what) + " must sum to the zero vector");
  }
}

double max_row_norm(const Matrix& m) {
  double best = 0.0;
  for (int i = 0; i < m.rows(); ++i) best = std::max(best, m.row(i).norm());
  return best;
}

}  // namespace

TargetModel::TargetModel(std::shared_ptr<const ComponentFamily> family, TargetConstants constants,
                         std::optional<Minimizer> minimizer,
                         std::optional<IsotropicQuadratic> quadratic)
    : family_(std::move(family)),
      constants_(constants),
      minimizer_(std::move(minimizer)),
      quadratic_(std::move(quadratic)) {
  if (!family_) throw InvalidParameter("target family is null");
  if (!(constants_.m > 0) || !(constants_.L > 0) || constants_.b < 0 || constants_.G < 0 ||
      (constants_.H && *constants_.H < 0))
    throw InvalidParameter("target constants out of range");
}

std::optional<Matrix> TargetModel::component_hessian(int i, const Vector& x) const {
  if (!family_->has_hessian()) return std::nullopt;
  return family_->hessian(i, x);
}

double TargetModel::value(const Vector& x) const {
  double s = 0.0;
  for (int i = 0; i < n(); ++i) s += family_->value(i, x);
  return s / n();
}

Vector TargetModel::grad(const Vector& x) const {
  Vector s = Vector::Zero(dim());
  for (int i = 0; i < n(); ++i) s += family_->grad(i, x);
  s /= static_cast<double>(n());
  return s;
}

Vector TargetModel::mean_grad(const std::vector<int>& indices, const Vector& x) const {
  Vector s = Vector::Zero(dim());
  for (int i : indices) s += family_->grad(i, x);
  s /= static_cast<double>(indices.size());
  return s;
}

Matrix TargetModel::hessian(const Vector& x) const {
  Matrix s = Matrix::Zero(dim(), dim());
  for (int i = 0; i < n(); ++i) s += family_->hessian(i, x);
  return s / n();
}

TargetModel TargetModel::with_constants(const TargetConstants& c) const {
  return TargetModel(family_, c, minimizer_, quadratic_);
}

TargetModel make_gaussian(const Vector& mean, double precision, int n) {
  if (!(precision > 0)) throw InvalidParameter("precision must be positive");
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (mean.size() < 1) throw InvalidParameter("mean must have dimension >= 1");
  TargetConstants c;
  const double mu2 = mean.squaredNorm();
  // <p(x - mu), x> >= p|x|^2 - p|mu||x| >= (p/2)|x|^2 - (p/2)|mu|^2.
  if (mu2 == 0.0) {
    c.m = precision;
    c.b = 0.0;
  } else {
    c.m = precision / 2.0;
    c.b = precision * mu2 / 2.0;
  }
  c.L = precision;
  c.H = 0.0;
  c.G = precision * std::sqrt(mu2);
  return TargetModel(std::make_shared<GaussianFamily>(mean, precision, n), c, Minimizer{mean, 0.0},
                     IsotropicQuadratic{precision, mean});
}

TargetModel make_shifted_mixture(const Vector& weights, const Matrix& modes, const Matrix& shifts) {
  if (weights.size() < 1 || weights.size() != modes.rows())
    throw InvalidParameter("weights and modes must have matching nonzero length");
  if ((weights.array() <= 0).any()) throw InvalidParameter("weights must be positive");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw InvalidParameter("weights must sum to 1");
  if (shifts.rows() < 1 || shifts.cols() != modes.cols() || modes.cols() < 1)
    throw InvalidParameter("shifts must be n x d with n >= 1 and d matching modes");
  require_zero_column_sums(shifts, "shifts");

  const int J = static_cast<int>(modes.rows());
  double diameter = 0.0;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < J; ++k) diameter = std::max(diameter, (modes.row(j) - modes.row(k)).norm());
  double max_mode = 0.0;
  for (int j = 0; j < J; ++j) max_mode = std::max(max_mode, modes.row(j).norm());
  const double center_bound = max_mode + max_row_norm(shifts);

  TargetConstants c;
  // Component Hessian is I - Cov_r(mu) with Cov eigenvalues in [0, D^2/4].
  c.L = std::max(1.0, diameter * diameter / 4.0 - 1.0);
  // Third cumulant of a law on an interval of length D is at most D^3/(6 sqrt 3).
  c.H = diameter * diameter * diameter / (6.0 * std::sqrt(3.0));
  // <grad f, x> = |x|^2 - <c(x), x> with |c(x)| <= center_bound.
  if (center_bound == 0.0) {
    c.m = 1.0;
    c.b = 0.0;
  } else {
    c.m = 0.5;
    c.b = center_bound * center_bound / 2.0;
  }
  auto family = std::make_shared<ShiftedMixtureFamily>(weights, modes, shifts);
  const Vector origin = Vector::Zero(modes.cols());
  for (int i = 0; i < family->n(); ++i) c.G = std::max(c.G, family->grad(i, origin).norm());

  TargetModel provisional(family, c);
  std::vector<Vector> starts{origin};
  for (int j = 0; j < J; ++j) starts.push_back(modes.row(j).transpose());
  return TargetModel(family, c, find_minimizer(provisional, starts));
}

TargetModel make_double_well(double half_separation, const Matrix& shifts) {
  if (shifts.cols() < 1) throw InvalidParameter("shifts must have at least one column");
  Matrix modes = Matrix::Zero(2, shifts.cols());
  modes(0, 0) = -half_separation;
  modes(1, 0) = half_separation;
  Vector w(2);
  w << 0.5, 0.5;
  return make_shifted_mixture(w, modes, shifts);
}

TargetModel make_noise_split(const TargetModel& base, const Matrix& noise) {
  if (noise.rows() < 1 || noise.cols() != base.dim())
    throw InvalidParameter("noise vectors must be n x d with d matching the base target");
  require_zero_column_sums(noise, "noise vectors");
  TargetConstants c = base.constants();
  c.G = base.constants().G + max_row_norm(noise);
  return TargetModel(std::make_shared<NoiseSplitFamily>(base, noise), c, base.minimizer());
}

Minimizer find_minimizer(const TargetModel& model, const std::vector<Vector>& starts) {
  if (starts.empty()) throw InvalidParameter("find_minimizer needs at least one start");
  Minimizer best{starts.front(), std::numeric_limits<double>::infinity()};
  for (const Vector& start : starts) {
    Vector x = start;
    double fx = model.value(x);
    for (int it = 0; it < 500; ++it) {
      const Vector g = model.grad(x);
      if (g.norm() <= 1e-14 * (1.0 + x.norm())) break;
      Vector p = -g;
      if (model.has_hessian()) {
        Eigen::LLT<Matrix> llt(model.hessian(x));
        if (llt.info() == Eigen::Success) p = -llt.solve(g);
      }
      double t = 1.0;
      const double slope = g.dot(p);
      Vector trial = x + t * p;
      double ft = model.value(trial);
      while (ft > fx + 1e-4 * t * slope && t > 1e-16) {
        t *= 0.5;
        trial = x + t * p;
        ft = model.value(trial);
      }
      if (t <= 1e-16) break;
      const bool stalled = (trial - x).norm() <= 1e-16 * (1.0 + x.norm());
      x = trial;
      fx = ft;
      if (stalled) break;
    }
    if (fx < best.value) best = Minimizer{x, fx};
  }
  return best;
}

const ProbeEntry* ProbeReport::find(const std::string& assumption) const {
  for (const auto& e : entries)
    if (e.assumption == assumption) return &e;
  return nullptr;
}

Vector uniform_in_ball(RngStream& rng, int d, double radius) {
  Vector dir = rng.normal_vector(d);
  const double norm = dir.norm();
  if (norm == 0.0) return Vector::Zero(d);
  const double rad = radius * std::pow(rng.uniform(), 1.0 / d);
  return dir * (rad / norm);
}

namespace {

struct PointMargins {
  double dissipativity, smoothness, gradient_bound, quadratic_lower, hessian_lipschitz;
  Vector x, smooth_pair, hess_pair;
};

PointMargins probe_point(const TargetModel& model, double radius, std::uint64_t seed,
                         std::uint64_t k) {
  const auto& c = model.constants();
  const int d = model.dim();
  RngStream rng(seed, k);
  PointMargins pm;
  pm.x = uniform_in_ball(rng, d, radius);
  const Vector& x = pm.x;

  // Nearby partner at a log-uniform distance, kept inside the ball.
  Vector e = rng.normal_vector(d);
  e /= e.norm();
  double t = radius * std::pow(10.0, -4.0 * rng.uniform());
  Vector near = x + t * e;
  while (near.norm() > radius && t > 1e-12 * radius) {
    t *= 0.5;
    near = x + t * e;
  }
  const Vector far = uniform_in_ball(rng, d, radius);

  pm.dissipativity = model.grad(x).dot(x) - (c.m * x.squaredNorm() - c.b);

  double max_grad_norm = 0.0;
  pm.smoothness = std::numeric_limits<double>::infinity();
  pm.hessian_lipschitz = std::numeric_limits<double>::infinity();
  pm.smooth_pair = near;
  pm.hess_pair = near;
  const bool hess = c.H.has_value() && model.has_hessian();
  for (int i = 0; i < model.n(); ++i) {
    const Vector gx = model.component_grad(i, x);
    max_grad_norm = std::max(max_grad_norm, gx.norm());
    for (const Vector* y : std::initializer_list<const Vector*>{&near, &far}) {
      const double dist = (x - *y).norm();
      const double s = c.L * dist - (gx - model.component_grad(i, *y)).norm();
      if (s < pm.smoothness) {
        pm.smoothness = s;
        pm.smooth_pair = *y;
      }
      if (hess) {
        const Matrix dh = *model.component_hessian(i, x) - *model.component_hessian(i, *y);
        const double op = Eigen::JacobiSVD<Matrix>(dh).singularValues()(0);
        const double h = *c.H * dist - op;
        if (h < pm.hessian_lipschitz) {
          pm.hessian_lipschitz = h;
          pm.hess_pair = *y;
        }
      }
    }
  }
  pm.gradient_bound = c.L * x.norm() + c.G - max_grad_norm;
  if (model.minimizer()) {
    pm.quadratic_lower =
        model.value(x) - (c.m / 4.0 * x.squaredNorm() + model.minimizer()->value - c.b / 2.0);
  } else {
    pm.quadratic_lower = std::numeric_limits<double>::infinity();
  }
  return pm;
}

}  // namespace

ProbeReport probe_assumptions(const TargetModel& model, double region_radius, int num_points,
                              std::uint64_t seed, int jobs) {
  if (!(region_radius > 0)) throw InvalidParameter("region radius must be positive");
  if (num_points < 1) throw InvalidParameter("num_points must be >= 1");
  std::vector<PointMargins> results(num_points);
  parallel_for(static_cast<std::size_t>(num_points), jobs, [&](std::size_t k) {
    results[k] = probe_point(model, region_radius, seed, k);
  });

  ProbeReport report;
  auto add = [&](const std::string& name, auto margin_of, auto pair_of) {
    ProbeEntry e;
    e.assumption = name;
    e.margin = std::numeric_limits<double>::infinity();
    for (const auto& pm : results) {
      const double m = margin_of(pm);
      if (m < e.margin) {
        e.margin = m;
        e.arg_point = pm.x;
        e.arg_pair = pair_of(pm);
      }
    }
    e.pass = e.margin >= -kProbeTolerance;
    report.valid = report.valid && e.pass;
    report.entries.push_back(std::move(e));
  };
  auto none = [](const PointMargins&) { return std::optional<Vector>{}; };
  add("dissipativity", [](const PointMargins& p) { return p.dissipativity; }, none);
  add("smoothness", [](const PointMargins& p) { return p.smoothness; },
      [](const PointMargins& p) { return std::optional<Vector>(p.smooth_pair); });
  add("gradient_bound", [](const PointMargins& p) { return p.gradient_bound; }, none);
  if (model.minimizer())
    add("quadratic_lower_bound", [](const PointMargins& p) { return p.quadratic_lower; }, none);
  if (model.constants().H && model.has_hessian())
    add("hessian_lipschitz", [](const PointMargins& p) { return p.hessian_lipschitz; },
        [](const PointMargins& p) { return std::optional<Vector>(p.hess_pair); });
  return report;
}

DerivativeCheck check_derivatives(const TargetModel& model, double region_radius, int num_points,
                                  std::uint64_t seed, double step) {
  DerivativeCheck out;
  out.hessian_checked = model.has_hessian();
  const int d = model.dim();
  for (int k = 0; k < num_points; ++k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    const Vector x = uniform_in_ball(rng, d, region_radius);
    for (int i = 0; i < model.n(); ++i) {
      const Vector g = model.component_grad(i, x);
      Vector fd(d);
      Matrix fdh(d, d);
      for (int j = 0; j < d; ++j) {
        Vector xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        fd[j] = (model.component_value(i, xp) - model.component_value(i, xm)) / (2.0 * step);
        if (out.hessian_checked)
          fdh.col(j) = (model.component_grad(i, xp) - model.component_grad(i, xm)) / (2.0 * step);
      }
      out.max_grad_rel_error =
          std::max(out.max_grad_rel_error, (fd - g).norm() / std::max(1.0, g.norm()));
      if (out.hessian_checked) {
        const Matrix h = *model.component_hessian(i, x);
        out.max_hessian_rel_error =
            std::max(out.max_hessian_rel_error, (fdh - h).norm() / std::max(1.0, h.norm()));
      }
    }
  }
  return out;
}

}  // namespace sgldv
