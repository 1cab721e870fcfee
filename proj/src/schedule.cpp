#include "sgldv/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "sgldv/errors.hpp"
#include "sgldv/io.hpp"

namespace sgldv {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) throw InvalidParameter(std::string(name) + " must be positive and finite");
}

void require_unit_open(double v, const char* name) {
  if (!(v > 0 && v < 1)) throw InvalidParameter(std::string(name) + " must lie in (0, 1)");
}

double log_factor(int d, double K, double eps) {
  return 1.0 + std::sqrt(std::log(8.0 * static_cast<double>(K) / eps) / d);
}

void check_delta_inputs(double eta, int d, double beta, int B, double L, double R, double G,
                        double K, double eps) {
  require_positive(eta, "eta");
  if (d < 1) throw InvalidParameter("d must be >= 1");
  require_positive(beta, "beta");
  if (B < 1) throw InvalidParameter("B must be >= 1");
  require_positive(L, "L");
  require_positive(R, "R");
  if (!(G >= 0)) throw InvalidParameter("G must be nonnegative");
  if (!(K >= 1) || !std::isfinite(K)) throw InvalidParameter("K must be >= 1");
  require_unit_open(eps, "eps");
}

// The three terms shared by both kernel closeness bounds, before the f^2 factor.
double stochastic_terms(double eta, int d, double beta, int B, double L, double M) {
  return 10.0 * L * M * std::sqrt(d * beta) * std::pow(eta, 1.5) +
         12.0 * beta * M * M * d * eta / B + 2.0 * beta * beta * std::pow(M, 4) * eta * eta / B;
}

struct Candidate {
  const char* name;
  double value;
};

struct StepChoice {
  double eta;
  std::string binding;
  double C1, C2;
};

StepChoice plain_step(double L, double M, int d, double beta, int B, double eps, double rho,
                      double c0, double f) {
  const double f4 = std::pow(f, 4);
  const double stoch = M * M * beta * d / B;
  const double C1 = 224.0 * f4 * M * M * std::pow(beta, 1.5) * d / (rho * c0);
  const double C2 = 224.0 * f4 * L * d * std::sqrt(beta) / (rho * c0);
  const double conductance = c0 * rho / (16.0 * std::sqrt(beta) * (14.0 * L * d + 14.0 * stoch));
  const std::vector<Candidate> cs{
      {"gradient_scale", 1.0 / (25.0 * beta * M * M) / f4},
      {"variance", 1.0 / (35.0 * (L * d + stoch)) / f4},
      {"conductance", conductance * conductance / f4},
      {"accuracy", std::pow(eps / (4.0 * (C1 / B + C2)), 2)},
  };
  const auto it = std::min_element(cs.begin(), cs.end(),
                                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  return {it->value, it->name, C1, C2};
}

StepChoice hessian_step(double L, double H, double M, int d, double beta, int B, double eps,
                        double rho, double c0, double f) {
  const double f4 = std::pow(f, 4);
  const double stoch = M * M * beta * d / B;
  const double C1 = 224.0 * f4 * M * M * std::pow(beta, 1.5) * d / (rho * c0);
  const double C2 = f4 * (448.0 * H * std::pow(d, 1.5) + 160.0 * L * M * std::sqrt(d) * beta) / (rho * c0);
  const double batch = c0 * rho / (224.0 * M * M * std::pow(beta, 1.5) * d / B);
  const std::vector<Candidate> cs{
      {"gradient_scale", 1.0 / (25.0 * beta * M * M) / f4},
      {"variance", 1.0 / (35.0 * (L * d + stoch)) / f4},
      {"batch_conductance", batch * batch / f4},
      {"curvature_conductance",
       c0 * rho /
           (16.0 * std::sqrt(beta) *
            (28.0 * H * std::pow(d, 1.5) / std::sqrt(beta) + 10.0 * L * M * std::sqrt(d * beta))) /
           f4},
      {"accuracy_batch", std::pow(eps * B / (6.0 * C1), 2)},
      {"accuracy_curvature", eps / (6.0 * C2)},
  };
  const auto it = std::min_element(cs.begin(), cs.end(),
                                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  return {it->value, it->name, C1, C2};
}

template <class StepFn>
ScheduleReport solve_schedule(const TargetModel& model, double beta, int B, double eps, double rho,
                              double c0, double split, const std::string& mode, StepFn step) {
  require_positive(beta, "beta");
  require_unit_open(eps, "eps");
  if (!(rho > 0) || !std::isfinite(rho)) throw InvalidParameter("rho must be positive");
  require_positive(c0, "c0");
  if (B < 1 || B > model.n()) throw InvalidParameter("batch size must satisfy 1 <= B <= n");
  const auto& c = model.constants();
  const int d = model.dim();

  ScheduleReport rep;
  rep.mode = mode;
  rep.R = bar_r(eps / 12.0, c.m, c.b, c.L, beta, d);
  rep.log_lambda_bound = log_warm_start_bound(model, beta);
  rep.lambda_bound = std::exp(rep.log_lambda_bound);
  rep.C0 = c0 * c0 * rho * rho / (8.0 * beta);
  const double M = c.L * rep.R + c.G;
  const double log_target = std::log(split / eps) + rep.log_lambda_bound;

  double K = 1e3;
  StepChoice choice{};
  bool converged = false;
  for (int it = 1; it <= 100; ++it) {
    choice = step(M, d, log_factor(d, K, eps));
    const double next = std::max(1.0, std::ceil(log_target / (rep.C0 * choice.eta)));
    if (!std::isfinite(next)) throw NoConvergence("iteration count is not finite");
    rep.iterations = it;
    const bool done = std::abs(next - K) / K < 1e-6;
    K = next;
    if (done) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("step size / iteration count fixed point did not converge in 100 rounds");
  // Report eta consistent with the final K.
  choice = step(M, d, log_factor(d, K, eps));
  rep.K = K;
  rep.eta = choice.eta;
  rep.binding_constraint = choice.binding;
  rep.C1 = choice.C1;
  rep.C2 = choice.C2;
  const ProjRadii radii = proj_radii(rep.eta, d, beta, rep.K, eps);
  rep.r_lemma62 = radii.r_lemma62;
  rep.r_lemma63 = radii.r_lemma63;
  rep.delta = delta_bound(rep.eta, d, beta, B, c.L, rep.R, c.G, rep.K, eps);
  if (c.H) rep.delta_hessian = delta_bound_hessian(rep.eta, d, beta, B, c.L, *c.H, rep.R, c.G, rep.K, eps);
  rep.constants_used = {c.m, c.b, c.L, c.H, c.G, beta, d, B, eps, c0, rho};
  return rep;
}

}  // namespace

double bar_r(double z, double m, double b, double L, double beta, int d) {
  require_unit_open(z, "z");
  require_positive(m, "m");
  if (!(b >= 0)) throw InvalidParameter("b must be nonnegative");
  require_positive(L, "L");
  require_positive(beta, "beta");
  if (d < 1) throw InvalidParameter("d must be >= 1");
  const double mb = m * beta;
  const double l1z = std::log(1.0 / z);
  const double t1 = 625.0 * d * std::log(4.0 / z) / mb;
  const double t2 = (4.0 * d * std::log(4.0 * L / m) + 4.0 * beta * b) / mb;
  const double t3 = (4.0 * d + 8.0 * std::sqrt(d * l1z) + 8.0 * l1z) / mb;
  return std::sqrt(std::max({t1, t2, t3}));
}

ProjRadii proj_radii(double eta, int d, double beta, double K, double eps) {
  require_positive(eta, "eta");
  if (d < 1) throw InvalidParameter("d must be >= 1");
  require_positive(beta, "beta");
  if (!(K >= 1) || !std::isfinite(K)) throw InvalidParameter("K must be >= 1");
  require_unit_open(eps, "eps");
  const double lg = std::log(8.0 * K / eps);
  ProjRadii r;
  r.r_lemma62 = std::sqrt(2.0 * eta * d / beta) * (2.0 + std::sqrt(2.0 * lg / d));
  r.r_lemma63 = std::sqrt(10.0 * eta * d / beta) * (1.0 + std::sqrt(lg / d));
  return r;
}

double delta_bound(double eta, int d, double beta, int B, double L, double R, double G,
                   double K, double eps) {
  check_delta_inputs(eta, d, beta, B, L, R, G, K, eps);
  const double M = L * R + G;
  const double f = log_factor(d, K, eps);
  return (10.0 * L * d * eta + stochastic_terms(eta, d, beta, B, L, M)) * f * f;
}

double delta_bound_hessian(double eta, int d, double beta, int B, double L, double H, double R,
                           double G, double K, double eps) {
  check_delta_inputs(eta, d, beta, B, L, R, G, K, eps);
  if (!(H >= 0) || !std::isfinite(H)) throw InvalidParameter("H must be nonnegative");
  const double M = L * R + G;
  const double f = log_factor(d, K, eps);
  return (28.0 * H * std::pow(d, 1.5) * std::pow(eta, 1.5) / std::sqrt(beta) +
          stochastic_terms(eta, d, beta, B, L, M)) *
         f * f;
}

double log_warm_start_bound(const TargetModel& model, double beta) {
  require_positive(beta, "beta");
  if (!model.minimizer()) throw MissingConstant("warm-start bound needs the minimizer x*");
  const auto& c = model.constants();
  const double x2 = model.minimizer()->x.squaredNorm();
  return 0.5 * model.dim() * std::log(4.0 * c.L / c.m) + beta * (c.L * x2 + c.b / 2.0);
}

double warm_start_bound(const TargetModel& model, double beta) {
  return std::exp(log_warm_start_bound(model, beta));
}

ScheduleReport schedule_plain(const TargetModel& model, double beta, int B, double eps, double rho,
                              double c0) {
  const double L = model.constants().L;
  return solve_schedule(model, beta, B, eps, rho, c0, 4.0, "plain", [&](double M, int d, double f) {
    return plain_step(L, M, d, beta, B, eps, rho, c0, f);
  });
}

ScheduleReport schedule_hessian(const TargetModel& model, double beta, int B, double eps,
                                double rho, double c0) {
  const auto& c = model.constants();
  if (!c.H) throw MissingConstant("hessian schedule needs the Hessian Lipschitz constant H");
  const double L = c.L, H = *c.H;
  return solve_schedule(model, beta, B, eps, rho, c0, 6.0, "hessian", [&](double M, int d, double f) {
    return hessian_step(L, H, M, d, beta, B, eps, rho, c0, f);
  });
}

namespace {

std::vector<std::pair<std::string, std::string>> report_rows(const ScheduleReport& r) {
  const auto& k = r.constants_used;
  std::vector<std::pair<std::string, std::string>> rows{
      {"mode", r.mode},
      {"R", format_double(r.R)},
      {"r_lemma62", format_double(r.r_lemma62)},
      {"r_lemma63", format_double(r.r_lemma63)},
      {"delta", format_double(r.delta)},
      {"delta_hessian", r.delta_hessian ? format_double(*r.delta_hessian) : ""},
      {"eta", format_double(r.eta)},
      {"K", format_double(r.K)},
      {"lambda_bound", format_double(r.lambda_bound)},
      {"log_lambda_bound", format_double(r.log_lambda_bound)},
      {"binding_constraint", r.binding_constraint},
      {"iterations", std::to_string(r.iterations)},
      {"C0", format_double(r.C0)},
      {"C1", format_double(r.C1)},
      {"C2", format_double(r.C2)},
      {"m", format_double(k.m)},
      {"b", format_double(k.b)},
      {"L", format_double(k.L)},
      {"H", k.H ? format_double(*k.H) : ""},
      {"G", format_double(k.G)},
      {"beta", format_double(k.beta)},
      {"d", std::to_string(k.d)},
      {"B", std::to_string(k.B)},
      {"eps", format_double(k.eps)},
      {"c0", format_double(k.c0)},
      {"rho", format_double(k.rho)},
  };
  return rows;
}

}  // namespace

std::string schedule_text(const ScheduleReport& report) {
  std::ostringstream out;
  for (const auto& [name, value] : report_rows(report)) out << name << " = " << (value.empty() ? "-" : value) << '\n';
  return out.str();
}

std::string schedule_csv(const ScheduleReport& report) {
  std::string out = csv_row({"quantity", "value"});
  for (const auto& [name, value] : report_rows(report)) out += csv_row({name, value});
  return out;
}

}  // namespace sgldv
