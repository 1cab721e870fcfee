#include "sgldv/kernel_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgldv/errors.hpp"
#include "sgldv/quadrature.hpp"

namespace sgldv {

namespace {

constexpr double kTailSds = 12.0;       // density below e^-72 beyond this
constexpr double kSimpsonPerSd = 64;  // Simpson nodes per noise sd
constexpr int kPolarAngles = 512;

int simpson_intervals(double length, double sd) {
  int n = static_cast<int>(std::ceil(length / sd * kSimpsonPerSd));
  n = std::max(n, 8);
  return n + (n % 2);
}

// Appends [a, b] intersected with [lo, hi] if nonempty.
void clip_push(std::vector<std::pair<double, double>>& out, double a, double b, double lo, double hi) {
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (b > a) out.emplace_back(a, b);
}

}  // namespace

SetSpec SetSpec::interval(double lo, double hi) {
  SetSpec s;
  s.parts.push_back(Box{Vector::Constant(1, lo), Vector::Constant(1, hi)});
  return s;
}

SetSpec SetSpec::intervals(const std::vector<std::pair<double, double>>& pieces) {
  SetSpec s;
  for (const auto& [lo, hi] : pieces) s.parts.push_back(Box{Vector::Constant(1, lo), Vector::Constant(1, hi)});
  return s;
}

bool SetSpec::contains(const Vector& x) const {
  for (const auto& b : parts)
    if ((x.array() >= b.lo.array()).all() && (x.array() <= b.hi.array()).all()) return true;
  return false;
}

void validate_kernel_params(const KernelParams& p) {
  if (!(p.eta > 0) || !std::isfinite(p.eta)) throw InvalidParameter("eta must be positive and finite");
  if (!(p.beta > 0)) throw InvalidParameter("beta must be positive");
  if (p.B < 1) throw InvalidParameter("batch size must be >= 1");
  if (!(p.R > 0)) throw InvalidParameter("truncation radius R must be positive");
  if (!(p.r > 0)) throw InvalidParameter("move radius r must be positive");
}

KernelEngine::KernelEngine(TargetModel model, KernelParams params)
    : model_(std::move(model)), params_(params) {
  validate_kernel_params(params_);
  if (model_.dim() < 1 || model_.dim() > 2)
    throw UnsupportedConfiguration("exact kernels support d in {1, 2}, got d = " +
                                   std::to_string(model_.dim()));
  if (params_.B > model_.n()) throw InvalidParameter("batch size exceeds n");
  batches_ = enumerate_batches(model_.n(), params_.B, params_.enumeration_cap);
  sd_ = std::sqrt(2.0 * params_.eta / params_.beta);
}

std::vector<Vector> KernelEngine::proposal_means(const Vector& u) const {
  std::vector<Vector> grads(model_.n());
  for (int i = 0; i < model_.n(); ++i) grads[i] = model_.component_grad(i, u);
  std::vector<Vector> means;
  means.reserve(batches_.batches.size());
  for (const auto& batch : batches_.batches) {
    Vector g = Vector::Zero(model_.dim());
    for (int i : batch.indices) g += grads[i];
    g /= static_cast<double>(batch.indices.size());
    means.push_back(u - params_.eta * g);
  }
  return means;
}

double KernelEngine::log_density(const Vector& u, const Vector& v) const {
  const auto means = proposal_means(u);
  std::vector<double> terms(means.size());
  const double inv2var = 1.0 / (2.0 * sd_ * sd_);
  for (std::size_t k = 0; k < means.size(); ++k) terms[k] = -(v - means[k]).squaredNorm() * inv2var;
  return log_sum_exp(terms) - std::log(static_cast<double>(means.size())) -
         0.5 * dim() * std::log(2.0 * std::numbers::pi * sd_ * sd_);
}

double KernelEngine::density(const Vector& u, const Vector& v) const { return std::exp(log_density(u, v)); }

bool KernelEngine::in_domain(const Vector& x) const { return x.norm() <= params_.R; }

bool KernelEngine::reachable(const Vector& u, const Vector& w) const {
  return (w - u).norm() <= params_.r && in_domain(w);
}

double KernelEngine::accept_prob(const Vector& u) const {
  return integrate_continuous(u, nullptr, [](const Vector&) { return 1.0; });
}

double KernelEngine::accept_prob_closed_form(const Vector& u) const {
  if (dim() != 1) throw UnsupportedConfiguration("closed-form acceptance probability is 1D only");
  if (!in_domain(u)) throw DomainError("u lies outside Omega");
  const double lo = std::max(u[0] - params_.r, -params_.R);
  const double hi = std::min(u[0] + params_.r, params_.R);
  double s = 0.0;
  const auto means = proposal_means(u);
  for (const auto& m : means) s += normal_interval_mass(lo, hi, m[0], sd_);
  return s / static_cast<double>(means.size());
}

double KernelEngine::mh_accept(const Vector& u, const Vector& w) const {
  if (w == u) return 1.0;
  if (!in_domain(u) || !reachable(u, w)) return 0.0;
  const double log_ratio = log_density(w, u) - log_density(u, w) -
                           params_.beta * (model_.value(w) - model_.value(u));
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

double KernelEngine::lazy_kernel_mass(const Vector& u, const SetSpec& set) const {
  validate_set(set);
  if (!in_domain(u)) throw DomainError("u lies outside Omega");
  const auto one = [](const Vector&) { return 1.0; };
  const double inside = integrate_continuous(u, &set, one);
  const double atom = set.contains(u) ? 1.0 - 0.5 * accept_prob(u) : 0.0;
  return atom + 0.5 * inside;
}

double KernelEngine::metropolized_kernel_mass(const Vector& u, const SetSpec& set) const {
  validate_set(set);
  if (!in_domain(u)) throw DomainError("u lies outside Omega");
  const auto alpha = [&](const Vector& w) { return mh_accept(u, w); };
  const double inside = integrate_continuous(u, &set, alpha);
  const double atom = set.contains(u) ? 1.0 - 0.5 * integrate_continuous(u, nullptr, alpha) : 0.0;
  return atom + 0.5 * inside;
}

double KernelEngine::integrate_continuous(const Vector& u, const SetSpec* set,
                                          const std::function<double(const Vector&)>& weight) const {
  if (!in_domain(u)) throw DomainError("u lies outside Omega");
  return dim() == 1 ? integrate_1d(u, set, weight) : integrate_2d(u, set, weight);
}

double KernelEngine::integrate_1d(const Vector& u, const SetSpec* set,
                                  const std::function<double(const Vector&)>& weight) const {
  const auto means = proposal_means(u);
  double mlo = means.front()[0], mhi = mlo;
  for (const auto& m : means) {
    mlo = std::min(mlo, m[0]);
    mhi = std::max(mhi, m[0]);
  }
  const double lo = std::max({u[0] - params_.r, -params_.R, mlo - kTailSds * sd_});
  const double hi = std::min({u[0] + params_.r, params_.R, mhi + kTailSds * sd_});
  std::vector<std::pair<double, double>> pieces;
  if (set == nullptr) {
    clip_push(pieces, lo, hi, lo, hi);
  } else {
    for (const auto& b : set->parts) clip_push(pieces, b.lo[0], b.hi[0], lo, hi);
  }
  const double inv2var = 1.0 / (2.0 * sd_ * sd_);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sd_ * means.size());
  Vector w(1);
  auto integrand = [&](double x) {
    double s = 0.0;
    for (const auto& m : means) s += std::exp(-(x - m[0]) * (x - m[0]) * inv2var);
    w[0] = x;
    return s * norm * weight(w);
  };
  double total = 0.0;
  for (const auto& [a, b] : pieces) total += simpson(integrand, a, b, simpson_intervals(b - a, sd_));
  return total;
}

double KernelEngine::integrate_2d(const Vector& u, const SetSpec* set,
                                  const std::function<double(const Vector&)>& weight) const {
  const auto means = proposal_means(u);
  double drift = 0.0;
  for (const auto& m : means) drift = std::max(drift, (m - u).norm());
  const double rho_lim = std::min(params_.r, drift + kTailSds * sd_);
  const double inv2var = 1.0 / (2.0 * sd_ * sd_);
  const double norm = 1.0 / (2.0 * std::numbers::pi * sd_ * sd_ * means.size());
  const double R2 = params_.R * params_.R;
  const double u2 = u.squaredNorm();

  Vector e(2), w(2);
  std::vector<std::pair<double, double>> pieces;
  auto ray = [&](double theta) {
    e << std::cos(theta), std::sin(theta);
    const double ue = u.dot(e);
    const double rho_omega = -ue + std::sqrt(std::max(0.0, ue * ue + R2 - u2));
    const double end = std::min(rho_lim, rho_omega);
    pieces.clear();
    if (set == nullptr) {
      clip_push(pieces, 0.0, end, 0.0, end);
    } else {
      for (const auto& b : set->parts) {
        double t0 = -std::numeric_limits<double>::infinity();
        double t1 = std::numeric_limits<double>::infinity();
        bool empty = false;
        for (int a = 0; a < 2 && !empty; ++a) {
          if (std::abs(e[a]) < 1e-300) {
            if (u[a] < b.lo[a] || u[a] > b.hi[a]) empty = true;
          } else {
            double ta = (b.lo[a] - u[a]) / e[a];
            double tb = (b.hi[a] - u[a]) / e[a];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
          }
        }
        if (!empty) clip_push(pieces, t0, t1, 0.0, end);
      }
    }
    double total = 0.0;
    for (const auto& [a, b] : pieces) {
      auto integrand = [&](double rho) {
        w = u + rho * e;
        double s = 0.0;
        for (const auto& m : means) s += std::exp(-(w - m).squaredNorm() * inv2var);
        return s * norm * weight(w) * rho;
      };
      total += simpson(integrand, a, b, simpson_intervals(b - a, sd_));
    }
    return total;
  };

  // Angles where the reach circle crosses the boundary of Omega; the ray
  // length has a kink there.
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> kinks;
  const double un = std::sqrt(u2);
  if (un > 0 && rho_lim > 0) {
    const double c = (R2 - u2 - rho_lim * rho_lim) / (2.0 * rho_lim * un);
    if (c > -1 && c < 1) {
      const double phi = std::atan2(u[1], u[0]);
      for (double sgn : {-1.0, 1.0}) kinks.push_back(std::fmod(phi + sgn * std::acos(c) + 2 * two_pi, two_pi));
    }
    // On the boundary, tangent rays have zero length and outward rays are empty.
    if (u2 >= R2 * (1.0 - 1e-12)) {
      const double phi = std::atan2(u[1], u[0]);
      for (double sgn : {-1.0, 1.0})
        kinks.push_back(std::fmod(phi + sgn * std::numbers::pi / 2 + 2 * two_pi, two_pi));
    }
  }
  if (kinks.empty()) {
    // Periodic trapezoid rule.
    double total = 0.0;
    for (int k = 0; k < kPolarAngles; ++k) total += ray(k * two_pi / kPolarAngles);
    return total * two_pi / kPolarAngles;
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.push_back(kinks.front() + two_pi);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < kinks.size(); ++k) {
    const double len = kinks[k + 1] - kinks[k];
    int n = static_cast<int>(std::ceil(kPolarAngles * len / two_pi));
    n = std::max(8, n + n % 2);
    total += simpson(ray, kinks[k], kinks[k + 1], n);
  }
  return total;
}

void KernelEngine::validate_set(const SetSpec& set) const {
  const double tol = 1e-12 * (1.0 + params_.R);
  for (const auto& b : set.parts) {
    if (b.lo.size() != dim() || b.hi.size() != dim())
      throw InvalidParameter("set part dimension does not match the target");
    if ((b.lo.array() > b.hi.array()).any()) throw InvalidParameter("set part has lo > hi");
    if (dim() == 1 && (b.lo[0] < -params_.R - tol || b.hi[0] > params_.R + tol))
      throw InvalidParameter("interval extends outside Omega");
  }
  for (std::size_t i = 0; i < set.parts.size(); ++i)
    for (std::size_t j = i + 1; j < set.parts.size(); ++j) {
      const auto& a = set.parts[i];
      const auto& b = set.parts[j];
      const bool overlap =
          ((a.lo.array().max(b.lo.array())) < (a.hi.array().min(b.hi.array()))).all();
      if (overlap) throw InvalidParameter("set parts overlap");
    }
}

double KernelEngine::acceptance_floor_eta() const {
  const auto& c = model_.constants();
  const double M = c.L * params_.R + c.G;
  return dim() / (40.0 * M * M * params_.beta);
}

}  // namespace sgldv
