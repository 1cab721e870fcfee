#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sgldv/targets.hpp"

namespace sgldv {

// sqrt of max{625 d ln(4/z) / (m beta), (4 d ln(4L/m) + 4 beta b) / (m beta),
//             (4d + 8 sqrt(d ln(1/z)) + 8 ln(1/z)) / (m beta)}.
double bar_r(double z, double m, double b, double L, double beta, int d);

struct ProjRadii {
  double r_lemma62 = 0.0;  // sqrt(2 eta d / beta) (2 + sqrt(2 ln(8K/eps) / d))
  double r_lemma63 = 0.0;  // sqrt(10 eta d / beta) (1 + sqrt(ln(8K/eps) / d))
};

ProjRadii proj_radii(double eta, int d, double beta, double K, double eps);

// Kernel closeness bound with M = L R + G and f = 1 + sqrt(ln(8K/eps) / d):
// [10 L d eta + 10 L M d^.5 beta^.5 eta^1.5 + 12 beta M^2 d eta / B
//  + 2 beta^2 M^4 eta^2 / B] f^2.
double delta_bound(double eta, int d, double beta, int B, double L, double R, double G,
                   double K, double eps);

// As delta_bound with the first term replaced by 28 H d^1.5 beta^-.5 eta^1.5.
double delta_bound_hessian(double eta, int d, double beta, int B, double L, double H, double R,
                           double G, double K, double eps);

// (4L/m)^{d/2} exp(beta (L |x*|^2 + b/2)) for the N(0, I/(2 beta L)) start.
double warm_start_bound(const TargetModel& model, double beta);
double log_warm_start_bound(const TargetModel& model, double beta);

struct ScheduleConstants {
  double m = 0, b = 0, L = 0;
  std::optional<double> H;
  double G = 0, beta = 0;
  int d = 0, B = 0;
  double eps = 0, c0 = 0, rho = 0;
};

struct ScheduleReport {
  std::string mode;  // "plain" or "hessian"
  double R = 0.0;    // bar_r(eps / 12)
  double r_lemma62 = 0.0;
  double r_lemma63 = 0.0;
  double delta = 0.0;
  std::optional<double> delta_hessian;
  double eta = 0.0;
  double K = 0.0;  // integer valued; may exceed the int64 range
  double lambda_bound = 0.0;
  double log_lambda_bound = 0.0;
  std::string binding_constraint;
  int iterations = 0;
  // Error-bound coefficients: linear decay rate C0 and the floor terms C1/B, C2.
  double C0 = 0.0, C1 = 0.0, C2 = 0.0;
  ScheduleConstants constants_used;
};

// Step size from the explicit constraint set, solved jointly with
// K = ceil(ln(4 lambda / eps) / (C0 eta)), C0 = c0^2 rho^2 / (8 beta).
ScheduleReport schedule_plain(const TargetModel& model, double beta, int B, double eps, double rho,
                              double c0 = 1.0);

// Four-constraint variant using the Hessian Lipschitz constant;
// K = ceil(ln(6 lambda / eps) / (C0 eta)).
ScheduleReport schedule_hessian(const TargetModel& model, double beta, int B, double eps,
                                double rho, double c0 = 1.0);

std::string schedule_text(const ScheduleReport& report);
// Two columns: quantity, value.
std::string schedule_csv(const ScheduleReport& report);

}  // namespace sgldv
