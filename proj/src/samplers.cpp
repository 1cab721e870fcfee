#include "sgldv/samplers.hpp"

#include <cmath>
#include <memory>

#include "sgldv/errors.hpp"
#include "sgldv/io.hpp"
#include "sgldv/stochastic_gradient.hpp"

namespace sgldv {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Lmc: return "lmc";
    case SamplerKind::Sgld: return "sgld";
    case SamplerKind::Projected: return "projected";
    case SamplerKind::Metropolized: return "metropolized";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "lmc") return SamplerKind::Lmc;
  if (name == "sgld") return SamplerKind::Sgld;
  if (name == "projected") return SamplerKind::Projected;
  if (name == "metropolized") return SamplerKind::Metropolized;
  throw InvalidConfig("unknown sampler kind '" + name + "'");
}

void validate_chain_config(const ChainConfig& cfg, const TargetModel& model, SamplerKind kind) {
  if (!(cfg.eta > 0) || !std::isfinite(cfg.eta)) throw InvalidParameter("eta must be positive");
  if (!(cfg.beta >= 1.0)) throw InvalidParameter("beta must be >= 1");
  if (cfg.K < 0) throw InvalidParameter("K must be >= 0");
  if (kind != SamplerKind::Lmc && (cfg.B < 1 || cfg.B > model.n()))
    throw InvalidParameter("batch size must satisfy 1 <= B <= n");
  if (cfg.R && !(*cfg.R > 0)) throw InvalidParameter("R must be positive");
  if (cfg.r && !(*cfg.r > 0)) throw InvalidParameter("r must be positive");
  if (cfg.R && cfg.r && !(*cfg.R > *cfg.r)) throw InvalidParameter("R must exceed r");
  if ((kind == SamplerKind::Projected || kind == SamplerKind::Metropolized) && !(cfg.R && cfg.r))
    throw InvalidConfig(to_string(kind) + " sampler requires both R and r");
  if (cfg.initial.kind == InitialSpec::Kind::Point && cfg.initial.point.size() != model.dim())
    throw InvalidParameter("initial point dimension does not match the target");
}

KernelParams kernel_params(const ChainConfig& cfg) {
  if (!cfg.R || !cfg.r) throw InvalidConfig("kernel parameters require R and r");
  KernelParams p;
  p.eta = cfg.eta;
  p.beta = cfg.beta;
  p.B = cfg.B;
  p.R = *cfg.R;
  p.r = *cfg.r;
  return p;
}

std::int64_t Trajectory::rejection_count() const {
  std::int64_t c = 0;
  for (char f : rejected) c += f ? 1 : 0;
  return c;
}

Vector draw_initial(const TargetModel& model, const ChainConfig& cfg, RngStream& rng) {
  if (cfg.initial.kind == InitialSpec::Kind::Point) return cfg.initial.point;
  const double sd = 1.0 / std::sqrt(2.0 * cfg.beta * model.constants().L);
  return sd * rng.normal_vector(model.dim());
}

Vector langevin_update(const Vector& x, const Vector& grad, const Vector& noise, double eta,
                       double beta) {
  return x - eta * grad + std::sqrt(2.0 * eta / beta) * noise;
}

Vector lmc_step(const TargetModel& model, const Vector& x, const ChainConfig& cfg, RngStream& rng) {
  const Vector g = model.grad(x);
  return langevin_update(x, g, rng.normal_vector(model.dim()), cfg.eta, cfg.beta);
}

Vector sgld_step(const TargetModel& model, const Vector& x, const ChainConfig& cfg, RngStream& rng) {
  const MiniBatch batch = draw_batch(model.n(), cfg.B, rng);
  const Vector g = stochastic_grad(model, x, batch);
  return langevin_update(x, g, rng.normal_vector(model.dim()), cfg.eta, cfg.beta);
}

ProjectedStep projected_sgld_step(const TargetModel& model, const Vector& x, const ChainConfig& cfg,
                                  RngStream& rng) {
  if (!cfg.R || !cfg.r) throw InvalidConfig("projected SGLD requires R and r");
  Vector proposal = sgld_step(model, x, cfg, rng);
  if ((proposal - x).norm() <= *cfg.r && proposal.norm() <= *cfg.R) return {std::move(proposal), false};
  return {x, true};
}

MetropolizedStep metropolized_sgld_step(const TargetModel& model, const Vector& x,
                                        const ChainConfig& cfg, const KernelEngine& engine,
                                        RngStream& rng) {
  const KernelParams& p = engine.params();
  if (!cfg.R || !cfg.r || p.eta != cfg.eta || p.beta != cfg.beta || p.B != cfg.B ||
      p.R != *cfg.R || p.r != *cfg.r)
    throw InvalidParameter("kernel engine parameters do not match the chain configuration");
  if (model.n() != engine.model().n() || model.dim() != engine.model().dim())
    throw InvalidParameter("kernel engine was built for a different target");
  if (rng.uniform() < 0.5) return {x, 1.0, false};
  const Vector w = sgld_step(model, x, cfg, rng);
  if ((w - x).norm() > *cfg.r || w.norm() > *cfg.R) return {x, 1.0, true};
  const double alpha = engine.mh_accept(x, w);
  if (rng.uniform() < alpha) return {w, alpha, false};
  return {x, alpha, true};
}

namespace {

std::unique_ptr<KernelEngine> engine_for(const TargetModel& model, const ChainConfig& cfg,
                                         SamplerKind kind) {
  if (kind != SamplerKind::Metropolized) return nullptr;
  try {
    return std::make_unique<KernelEngine>(model, kernel_params(cfg));
  } catch (const EnumerationTooLarge& e) {
    throw UnsupportedConfiguration(std::string("metropolized SGLD is an analysis-only chain: ") +
                                   e.what());
  }
}

// Advances one step; returns (rejected, alpha) metadata through the out params.
Vector advance(const TargetModel& model, const Vector& x, const ChainConfig& cfg, SamplerKind kind,
               const KernelEngine* engine, RngStream& rng, bool& rejected, double& alpha) {
  switch (kind) {
    case SamplerKind::Lmc: return lmc_step(model, x, cfg, rng);
    case SamplerKind::Sgld: return sgld_step(model, x, cfg, rng);
    case SamplerKind::Projected: {
      auto s = projected_sgld_step(model, x, cfg, rng);
      rejected = s.rejected;
      return std::move(s.next);
    }
    case SamplerKind::Metropolized: {
      auto s = metropolized_sgld_step(model, x, cfg, *engine, rng);
      rejected = s.rejected;
      alpha = s.alpha;
      return std::move(s.next);
    }
  }
  throw InvalidParameter("unknown sampler kind");
}

}  // namespace

Trajectory run_chain(const TargetModel& model, const ChainConfig& cfg, SamplerKind kind) {
  validate_chain_config(cfg, model, kind);
  const auto engine = engine_for(model, cfg, kind);
  RngStream rng(cfg.seed, cfg.chain_id);
  Trajectory t;
  t.kind = kind;
  t.states.reserve(static_cast<std::size_t>(cfg.K) + 1);
  t.states.push_back(draw_initial(model, cfg, rng));
  const bool flags = kind == SamplerKind::Projected || kind == SamplerKind::Metropolized;
  for (std::int64_t k = 0; k < cfg.K; ++k) {
    bool rejected = false;
    double alpha = 1.0;
    t.states.push_back(advance(model, t.states.back(), cfg, kind, engine.get(), rng, rejected, alpha));
    if (flags) t.rejected.push_back(rejected ? 1 : 0);
    if (kind == SamplerKind::Metropolized) t.accept_probs.push_back(alpha);
  }
  return t;
}

ChainEndpoint run_chain_endpoint(const TargetModel& model, const ChainConfig& cfg, SamplerKind kind) {
  validate_chain_config(cfg, model, kind);
  const auto engine = engine_for(model, cfg, kind);
  RngStream rng(cfg.seed, cfg.chain_id);
  ChainEndpoint out;
  out.state = draw_initial(model, cfg, rng);
  for (std::int64_t k = 0; k < cfg.K; ++k) {
    bool rejected = false;
    double alpha = 1.0;
    out.state = advance(model, out.state, cfg, kind, engine.get(), rng, rejected, alpha);
    out.rejections += rejected ? 1 : 0;
  }
  return out;
}

GaussianLaw quadratic_chain_law(const TargetModel& model, const ChainConfig& cfg) {
  return quadratic_chain_law(model, cfg, static_cast<double>(cfg.K));
}

GaussianLaw quadratic_chain_law(const TargetModel& model, const ChainConfig& cfg, double steps) {
  if (!model.quadratic())
    throw UnsupportedConfiguration("closed-form chain law needs an isotropic quadratic target");
  validate_chain_config(cfg, model, SamplerKind::Lmc);
  if (!(steps >= 0) || !std::isfinite(steps) || steps != std::floor(steps))
    throw InvalidParameter("step count must be a finite nonnegative integer");
  const double p = model.quadratic()->precision;
  const Vector& mu = model.quadratic()->mean;
  const double c = cfg.eta * p;
  // a^K and a^{2K} with a = 1 - eta p, stable for K ~ 1e12.
  double aK, a2K;
  if (c < 1.0) {
    const double la = std::log1p(-c);
    aK = std::exp(steps * la);
    a2K = std::exp(2.0 * steps * la);
  } else {
    aK = std::pow(1.0 - c, steps);
    a2K = aK * aK;
  }
  Vector m0;
  double v0;
  if (cfg.initial.kind == InitialSpec::Kind::Point) {
    m0 = cfg.initial.point;
    v0 = 0.0;
  } else {
    m0 = Vector::Zero(model.dim());
    v0 = 1.0 / (2.0 * cfg.beta * model.constants().L);
  }
  const double one_minus_a2 = c * (2.0 - c);  // 1 - a^2
  GaussianLaw law;
  law.mean = mu + aK * (m0 - mu);
  law.variance = a2K * v0 + (2.0 * cfg.eta / cfg.beta) * (1.0 - a2K) / one_minus_a2;
  return law;
}

std::string trajectory_csv(const Trajectory& traj) {
  const int d = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  std::vector<std::string> header{"step"};
  for (int j = 0; j < d; ++j) header.push_back("x_" + std::to_string(j));
  header.push_back("rejected");
  header.push_back("alpha");
  std::string out = csv_row(header);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (int j = 0; j < d; ++j) row.push_back(format_double(traj.states[k][j]));
    const bool has_step = k > 0;
    row.push_back(has_step && !traj.rejected.empty() ? std::to_string(traj.rejected[k - 1]) : "");
    row.push_back(has_step && !traj.accept_probs.empty() ? format_double(traj.accept_probs[k - 1]) : "");
    out += csv_row(row);
  }
  return out;
}

}  // namespace sgldv
