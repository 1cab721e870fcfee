#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sgldv/stochastic_gradient.hpp"
#include "sgldv/targets.hpp"

namespace sgldv {

// Parameters of the continuous kernels. Omega = B(0, R); moves are restricted
// to S_u = B(u, r) intersected with Omega.
struct KernelParams {
  double eta = 0.0;
  double beta = 1.0;
  int B = 1;
  double R = 0.0;
  double r = 0.0;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

// Axis-aligned box; an interval when d = 1.
struct Box {
  Vector lo;
  Vector hi;
};

// Finite union of boxes. Parts must not overlap with positive volume.
struct SetSpec {
  std::vector<Box> parts;
  static SetSpec interval(double lo, double hi);
  static SetSpec intervals(const std::vector<std::pair<double, double>>& pieces);
  bool contains(const Vector& x) const;
};

// Exact transition densities of SGLD and its lazy and Metropolized variants,
// averaging over every mini-batch. Supports d in {1, 2}.
class KernelEngine {
 public:
  KernelEngine(TargetModel model, KernelParams params);

  const TargetModel& model() const { return model_; }
  const KernelParams& params() const { return params_; }
  const BatchEnumeration& batches() const { return batches_; }
  int dim() const { return model_.dim(); }
  double noise_sd() const { return sd_; }

  // u - eta g(u, I) for every enumerated batch.
  std::vector<Vector> proposal_means(const Vector& u) const;

  // log P(v | u) for the unrestricted SGLD proposal.
  double log_density(const Vector& u, const Vector& v) const;
  double density(const Vector& u, const Vector& v) const;

  bool in_domain(const Vector& x) const;
  bool reachable(const Vector& u, const Vector& w) const;

  // p(u) = P(v in S_u) by composite Simpson (1D) or polar quadrature (2D).
  double accept_prob(const Vector& u) const;
  // p(u) from error functions; 1D only.
  double accept_prob_closed_form(const Vector& u) const;

  // Metropolis acceptance for a continuous-part move u -> w; 1 when w == u,
  // 0 when w is not reachable from u.
  double mh_accept(const Vector& u, const Vector& w) const;

  double lazy_kernel_mass(const Vector& u, const SetSpec& set) const;
  double metropolized_kernel_mass(const Vector& u, const SetSpec& set) const;

  // Integral of weight(w) P(w|u) over set intersected with S_u. A null set
  // means S_u itself.
  double integrate_continuous(const Vector& u, const SetSpec* set,
                              const std::function<double(const Vector&)>& weight) const;

  // Largest eta for which the acceptance floor p(u) >= 0.4 is guaranteed:
  // d / (40 (L R + G)^2 beta).
  double acceptance_floor_eta() const;

 private:
  void validate_set(const SetSpec& set) const;
  double integrate_1d(const Vector& u, const SetSpec* set,
                      const std::function<double(const Vector&)>& weight) const;
  double integrate_2d(const Vector& u, const SetSpec* set,
                      const std::function<double(const Vector&)>& weight) const;

  TargetModel model_;
  KernelParams params_;
  BatchEnumeration batches_;
  double sd_;
};

void validate_kernel_params(const KernelParams& p);

}  // namespace sgldv
