#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgldv/kernel_engine.hpp"
#include "sgldv/rng.hpp"
#include "sgldv/targets.hpp"

namespace sgldv {

enum class SamplerKind { Lmc, Sgld, Projected, Metropolized };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

struct InitialSpec {
  enum class Kind { Gaussian, Point };
  Kind kind = Kind::Gaussian;  // Gaussian: N(0, I / (2 beta L))
  Vector point;
};

struct ChainConfig {
  double eta = 0.0;
  double beta = 1.0;
  int B = 1;
  std::int64_t K = 0;
  std::optional<double> R;
  std::optional<double> r;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
  InitialSpec initial;
};

void validate_chain_config(const ChainConfig& cfg, const TargetModel& model, SamplerKind kind);
KernelParams kernel_params(const ChainConfig& cfg);

struct Trajectory {
  SamplerKind kind = SamplerKind::Sgld;
  std::vector<Vector> states;       // K + 1 states
  std::vector<char> rejected;       // per step, Projected / Metropolized only
  std::vector<double> accept_probs;  // per step, Metropolized only
  std::int64_t rejection_count() const;
};

Vector draw_initial(const TargetModel& model, const ChainConfig& cfg, RngStream& rng);

// x - eta grad + sqrt(2 eta / beta) noise.
Vector langevin_update(const Vector& x, const Vector& grad, const Vector& noise, double eta,
                       double beta);

Vector lmc_step(const TargetModel& model, const Vector& x, const ChainConfig& cfg, RngStream& rng);

// Draws the batch, then the Gaussian vector.
Vector sgld_step(const TargetModel& model, const Vector& x, const ChainConfig& cfg, RngStream& rng);

struct ProjectedStep {
  Vector next;
  bool rejected = false;
};

// Keeps x when the SGLD proposal leaves B(x, r) or B(0, R).
ProjectedStep projected_sgld_step(const TargetModel& model, const Vector& x, const ChainConfig& cfg,
                                  RngStream& rng);

struct MetropolizedStep {
  Vector next;
  double alpha = 1.0;
  bool rejected = false;
};

// Lazy coin, SGLD proposal restricted to S_x, then Metropolis correction.
MetropolizedStep metropolized_sgld_step(const TargetModel& model, const Vector& x,
                                        const ChainConfig& cfg, const KernelEngine& engine,
                                        RngStream& rng);

Trajectory run_chain(const TargetModel& model, const ChainConfig& cfg, SamplerKind kind);

// Final state only; skips storing the path.
struct ChainEndpoint {
  Vector state;
  std::int64_t rejections = 0;
};
ChainEndpoint run_chain_endpoint(const TargetModel& model, const ChainConfig& cfg, SamplerKind kind);

// Exact law of x_K for LMC (or SGLD, whose gradient is then exact) on an
// isotropic quadratic target: N(mean, variance I).
struct GaussianLaw {
  Vector mean;
  double variance = 0.0;
};
GaussianLaw quadratic_chain_law(const TargetModel& model, const ChainConfig& cfg);
// Same law after `steps` iterations (cfg.K is ignored); steps may exceed the int64 range.
GaussianLaw quadratic_chain_law(const TargetModel& model, const ChainConfig& cfg, double steps);

// Columns: step, x_0..x_{d-1}, rejected, alpha.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace sgldv
