#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgldv/rng.hpp"
#include "sgldv/types.hpp"

namespace sgldv {

// Regularity constants of a finite-sum potential.
//   m, b : <grad f(x), x> >= m |x|^2 - b
//   L    : every component gradient is L-Lipschitz
//   H    : every component Hessian is H-Lipschitz (optional)
//   G    : max_i |grad f_i(0)|
struct TargetConstants {
  double m = 1.0;
  double b = 0.0;
  double L = 1.0;
  std::optional<double> H;
  double G = 0.0;
};

struct Minimizer {
  Vector x;
  double value = 0.0;
};

// f = (precision/2) |x - mean|^2 for every component.
struct IsotropicQuadratic {
  double precision = 1.0;
  Vector mean;
};

// Component functions f_i of a finite-sum potential.
class ComponentFamily {
 public:
  virtual ~ComponentFamily() = default;
  virtual int n() const = 0;
  virtual int dim() const = 0;
  virtual double value(int i, const Vector& x) const = 0;
  virtual Vector grad(int i, const Vector& x) const = 0;
  virtual bool has_hessian() const { return false; }
  virtual Matrix hessian(int i, const Vector& x) const;
  virtual std::string name() const = 0;
};

// Immutable finite-sum target f = (1/n) sum_i f_i with declared constants.
class TargetModel {
 public:
  TargetModel(std::shared_ptr<const ComponentFamily> family, TargetConstants constants,
              std::optional<Minimizer> minimizer = std::nullopt,
              std::optional<IsotropicQuadratic> quadratic = std::nullopt);

  int n() const { return family_->n(); }
  int dim() const { return family_->dim(); }
  std::string family_name() const { return family_->name(); }

  double component_value(int i, const Vector& x) const { return family_->value(i, x); }
  Vector component_grad(int i, const Vector& x) const { return family_->grad(i, x); }
  bool has_hessian() const { return family_->has_hessian(); }
  std::optional<Matrix> component_hessian(int i, const Vector& x) const;

  double value(const Vector& x) const;
  Vector grad(const Vector& x) const;
  // Mean of component gradients over `indices`, summed in the given order.
  Vector mean_grad(const std::vector<int>& indices, const Vector& x) const;
  Matrix hessian(const Vector& x) const;

  const TargetConstants& constants() const { return constants_; }
  const std::optional<Minimizer>& minimizer() const { return minimizer_; }
  const std::optional<IsotropicQuadratic>& quadratic() const { return quadratic_; }
  const std::shared_ptr<const ComponentFamily>& family() const { return family_; }

  TargetModel with_constants(const TargetConstants& c) const;

 private:
  std::shared_ptr<const ComponentFamily> family_;
  TargetConstants constants_;
  std::optional<Minimizer> minimizer_;
  std::optional<IsotropicQuadratic> quadratic_;
};

TargetModel make_gaussian(const Vector& mean, double precision, int n);

// f_i(x) = -log sum_j w_j exp(-|x - mu_j - zeta_i|^2 / 2); modes is J x d,
// shifts is n x d with zero column sums.
TargetModel make_shifted_mixture(const Vector& weights, const Matrix& modes, const Matrix& shifts);

// Equal-weight double well with modes at +-half_separation on the first axis.
TargetModel make_double_well(double half_separation, const Matrix& shifts);

// f_i = f_base + <xi_i, x>; noise is n x d with zero column sums.
TargetModel make_noise_split(const TargetModel& base, const Matrix& noise);

// Damped Newton from each start; returns the lowest stationary point found.
Minimizer find_minimizer(const TargetModel& model, const std::vector<Vector>& starts);

struct ProbeEntry {
  std::string assumption;
  double margin = 0.0;
  Vector arg_point;
  std::optional<Vector> arg_pair;
  bool pass = true;
};

struct ProbeReport {
  std::vector<ProbeEntry> entries;
  bool valid = true;
  const ProbeEntry* find(const std::string& assumption) const;
};

inline constexpr double kProbeTolerance = 1e-9;

// Checks the declared constants at points drawn uniformly in the ball of the
// given radius, each point paired with a nearby and a distant partner.
ProbeReport probe_assumptions(const TargetModel& model, double region_radius, int num_points,
                              std::uint64_t seed, int jobs = 1);

struct DerivativeCheck {
  double max_grad_rel_error = 0.0;
  double max_hessian_rel_error = 0.0;
  bool hessian_checked = false;
};

// Central finite differences of component values (and gradients) against the
// analytic gradients (and Hessians). Relative error is |fd - a| / max(1, |a|).
DerivativeCheck check_derivatives(const TargetModel& model, double region_radius, int num_points,
                                  std::uint64_t seed, double step = 1e-5);

Vector uniform_in_ball(RngStream& rng, int d, double radius);

}  // namespace sgldv
