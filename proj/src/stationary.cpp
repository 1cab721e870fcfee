#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sgldv/diagnostics.hpp"
#include "sgldv/errors.hpp"
#include "sgldv/quadrature.hpp"
#include "sgldv/stochastic_gradient.hpp"
#include "sgldv/truncation.hpp"

namespace sgldv {

namespace {

constexpr double kWindowSds = 12.0;

// Nystrom discretization of the stationary equation p(y) = int p(x) k(x, y) dx
// on nodes of spacing sd / 2, where k is the batch-averaged Gaussian
// transition density of the unrestricted chain.
class NystromSolution {
 public:
  NystromSolution(const TargetModel& model, SamplerKind kind, double eta, double beta, int B)
      : sd_(std::sqrt(2.0 * eta / beta)) {
    if (model.dim() != 1) throw UnsupportedConfiguration("stationary laws are computed for d = 1");
    if (!(eta > 0) || !(beta > 0)) throw InvalidParameter("eta and beta must be positive");
    if (kind != SamplerKind::Lmc && kind != SamplerKind::Sgld)
      throw UnsupportedConfiguration("stationary laws are computed for lmc and sgld");
    extent_ = quadrature_extent(model, beta) + 1.0 + kWindowSds * sd_;
    h_ = sd_ / 2.0;
    const int n = 2 * static_cast<int>(std::ceil(extent_ / h_)) + 1;
    extent_ = h_ * (n - 1) / 2.0;
    nodes_.resize(n);
    for (int i = 0; i < n; ++i) nodes_[i] = -extent_ + i * h_;

    std::vector<std::vector<int>> batches;
    if (kind == SamplerKind::Lmc || B == model.n()) {
      std::vector<int> all(model.n());
      for (int i = 0; i < model.n(); ++i) all[i] = i;
      batches.push_back(all);
    } else {
      for (const auto& b : enumerate_batches(model.n(), B).batches) batches.push_back(b.indices);
    }
    batch_weight_ = 1.0 / static_cast<double>(batches.size());
    means_.resize(static_cast<std::size_t>(n) * batches.size());
    nb_ = static_cast<int>(batches.size());
    Vector x(1);
    for (int i = 0; i < n; ++i) {
      x[0] = nodes_[i];
      for (int b = 0; b < nb_; ++b) {
        const Vector g = kind == SamplerKind::Lmc ? model.grad(x) : model.mean_grad(batches[b], x);
        means_[static_cast<std::size_t>(i) * nb_ + b] = nodes_[i] - eta * g[0];
      }
    }
    solve();
  }

  double extent() const { return extent_; }
  double spacing() const { return h_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return p_; }

  // Nystrom interpolant of the stationary density.
  double density(double y) const {
    const double norm = batch_weight_ / (sd_ * std::sqrt(2.0 * std::numbers::pi));
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (p_[i] == 0.0) continue;
      double row = 0.0;
      for (int b = 0; b < nb_; ++b) {
        const double z = (y - means_[i * nb_ + b]) / sd_;
        if (std::abs(z) <= kWindowSds) row += std::exp(-0.5 * z * z);
      }
      s += p_[i] * row;
    }
    return h_ * norm * s;
  }

 private:
  void solve() {
    const int n = static_cast<int>(nodes_.size());
    const int pin = n / 2;
    const double norm = batch_weight_ / (sd_ * std::sqrt(2.0 * std::numbers::pi));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 64);
    std::vector<double> window;
    for (int i = 0; i < n; ++i) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int b = 0; b < nb_; ++b) {
        lo = std::min(lo, means_[static_cast<std::size_t>(i) * nb_ + b]);
        hi = std::max(hi, means_[static_cast<std::size_t>(i) * nb_ + b]);
      }
      const int j0 = std::max(0, static_cast<int>(std::floor((lo - kWindowSds * sd_ + extent_) / h_)));
      const int j1 = std::min(n - 1, static_cast<int>(std::ceil((hi + kWindowSds * sd_ + extent_) / h_)));
      if (j1 < j0) continue;
      window.assign(static_cast<std::size_t>(j1 - j0 + 1), 0.0);
      for (int b = 0; b < nb_; ++b) {
        const double mu = means_[static_cast<std::size_t>(i) * nb_ + b];
        for (int j = j0; j <= j1; ++j) {
          const double z = (nodes_[j] - mu) / sd_;
          if (std::abs(z) <= kWindowSds) window[j - j0] += std::exp(-0.5 * z * z);
        }
      }
      // Row j of (I - A), A_ji = h k(x_i, x_j); row `pin` is the normalization.
      for (int j = j0; j <= j1; ++j)
        if (j != pin && window[j - j0] != 0.0) trip.emplace_back(j, i, -h_ * norm * window[j - j0]);
    }
    for (int j = 0; j < n; ++j)
      if (j != pin) trip.emplace_back(j, j, 1.0);
    for (int i = 0; i < n; ++i) trip.emplace_back(pin, i, h_);
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) throw NoConvergence("stationary system factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[pin] = 1.0;
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NoConvergence("stationary system solve failed");
    p_.resize(n);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      p_[i] = std::max(0.0, sol[i]);
      mass += h_ * p_[i];
    }
    if (!(mass > 0) || !std::isfinite(mass)) throw NoConvergence("stationary law has no mass");
    for (double& v : p_) v /= mass;
  }

  double sd_;
  double extent_ = 0.0;
  double h_ = 0.0;
  int nb_ = 1;
  double batch_weight_ = 1.0;
  std::vector<double> nodes_;
  std::vector<double> means_;  // node-major, batch-minor
  std::vector<double> p_;
};

}  // namespace

std::vector<double> stationary_density(const TargetModel& model, SamplerKind kind, double eta,
                                       double beta, int B, const std::vector<double>& nodes) {
  const NystromSolution sol(model, kind, eta, beta, B);
  std::vector<double> out;
  out.reserve(nodes.size());
  for (double y : nodes) out.push_back(sol.density(y));
  return out;
}

double stationary_tv(const TargetModel& model, SamplerKind kind, double eta, double beta, int B) {
  const NystromSolution sol(model, kind, eta, beta, B);
  const double D = sol.extent();
  std::vector<double> ys;
  std::vector<double> p;
  if (sol.spacing() <= 0.01) {
    ys = sol.nodes();
    p = sol.values();
  } else {
    const int m = 2 * static_cast<int>(std::ceil(D / 0.01)) + 1;
    ys.resize(m);
    p.resize(m);
    for (int k = 0; k < m; ++k) {
      ys[k] = -D + 2.0 * D * k / (m - 1);
      p[k] = sol.density(ys[k]);
    }
  }
  if (ys.size() % 2 == 0) {
    ys.pop_back();
    p.pop_back();
  }
  const double h = ys[1] - ys[0];
  const std::vector<double> w = simpson_weights(static_cast<int>(ys.size()), h);
  std::vector<double> logpi(ys.size());
  Vector x(1);
  double ref = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ys.size(); ++k) {
    x[0] = ys[k];
    logpi[k] = -beta * model.value(x);
    ref = std::min(ref, -logpi[k]);
  }
  double z = 0.0, pm = 0.0;
  std::vector<double> pi(ys.size());
  for (std::size_t k = 0; k < ys.size(); ++k) {
    pi[k] = std::exp(logpi[k] + ref);
    z += w[k] * pi[k];
    pm += w[k] * p[k];
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k) tv += w[k] * std::abs(p[k] / pm - pi[k] / z);
  return 0.5 * tv;
}

}  // namespace sgldv
