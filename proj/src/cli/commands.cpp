#include "sgldv/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "sgldv/cheeger.hpp"
#include "sgldv/conductance.hpp"
#include "sgldv/diagnostics.hpp"
#include "sgldv/discretized_kernel.hpp"
#include "sgldv/errors.hpp"
#include "sgldv/io.hpp"
#include "sgldv/rng.hpp"
#include "sgldv/schedule.hpp"
#include "sgldv/truncation.hpp"

namespace sgldv::cli {

namespace {

std::string out_path(const CommandOptions& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  return (std::filesystem::path(opt.out_dir) / name).string();
}

std::string point_text(const Vector& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += (i ? " " : "") + format_double(x[i]);
  return s;
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : "-"; }

// Cheeger constant of pi on a grid wide enough to hold its mass.
double measured_rho(const TargetModel& model, double beta, int nodes) {
  const double extent = quadrature_extent(model, beta);
  return cheeger_constant(target_density(model, beta, extent, nodes)).rho;
}

double rho_setting(const ExperimentConfig& cfg, const TargetModel& model, double beta, std::string& source) {
  const std::string v = cfg.experiment.text("rho", "cheeger");
  if (v != "cheeger") {
    source = "config";
    return cfg.experiment.number("rho");
  }
  source = "cheeger";
  const int nodes = static_cast<int>(cfg.experiment.integer("cheeger_nodes", model.dim() == 1 ? 2001 : 101));
  return measured_rho(model, beta, nodes);
}

struct Check {
  std::string name;
  double value;
  bool pass;
  std::string detail;
};

std::vector<SetSpec> random_sets(RngStream& rng, int dim, double R, int count) {
  std::vector<SetSpec> sets;
  for (int k = 0; k < count; ++k) {
    if (dim == 1) {
      std::vector<double> e;
      const int pieces = k % 2 == 0 ? 1 : 2;
      for (int i = 0; i < 2 * pieces; ++i) e.push_back(-R + 2.0 * R * rng.uniform());
      std::sort(e.begin(), e.end());
      std::vector<std::pair<double, double>> iv;
      for (int i = 0; i < pieces; ++i) iv.emplace_back(e[2 * i], e[2 * i + 1]);
      sets.push_back(SetSpec::intervals(iv));
    } else {
      Box b;
      b.lo.resize(dim);
      b.hi.resize(dim);
      for (int j = 0; j < dim; ++j) {
        double a = -R + 2.0 * R * rng.uniform(), c = -R + 2.0 * R * rng.uniform();
        b.lo[j] = std::min(a, c);
        b.hi[j] = std::max(a, c);
      }
      sets.push_back(SetSpec{{b}});
    }
  }
  return sets;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const MissingConstant*>(&e)) return 2;
  if (dynamic_cast<const UnsupportedConfiguration*>(&e) || dynamic_cast<const EnumerationTooLarge*>(&e)) return 3;
  return 1;
}

int cmd_run(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const TargetModel model = build_target(cfg);
  const SamplerKind kind = sampler_kind(cfg);
  const ChainConfig chain = chain_config(cfg, model);
  const Trajectory traj = run_chain(model, chain, kind);

  const int bins = static_cast<int>(cfg.experiment.integer("bins", 200));
  double range = 0.0;
  if (cfg.experiment.has("hist_range")) {
    range = cfg.experiment.number("hist_range");
  } else if (chain.R) {
    range = *chain.R;
  } else {
    range = 5.0 * std::sqrt(target_expectation(model, chain.beta, [](const Vector& x) { return x[0] * x[0]; }));
  }
  const Histogram hist = histogram_from_states(traj.states, -range, range, bins, cfg.experiment.number("burn_in", 0.5));
  std::optional<BinnedMasses> target;
  if (model.dim() == 1) target = target_bin_masses(model, chain.beta, -range, range, bins);

  std::string hcsv = csv_row({"bin_lo", "bin_hi", "count", "target_mass"});
  hcsv += csv_row({format_double(-INFINITY), format_double(hist.lo), std::to_string(hist.underflow),
                   target ? format_double(target->underflow) : ""});
  for (int k = 0; k < hist.bins(); ++k)
    hcsv += csv_row({format_double(hist.edge(k)), format_double(hist.edge(k + 1)), std::to_string(hist.counts[k]),
                     target ? format_double(target->masses[k]) : ""});
  hcsv += csv_row({format_double(hist.hi), format_double(INFINITY), std::to_string(hist.overflow),
                   target ? format_double(target->overflow) : ""});

  std::ostringstream s;
  s << "sampler = " << to_string(kind) << "\n"
    << "steps = " << chain.K << "\n"
    << "eta = " << format_double(chain.eta) << "\n"
    << "beta = " << format_double(chain.beta) << "\n"
    << "B = " << chain.B << "\n"
    << "R = " << opt_text(chain.R) << "\n"
    << "r = " << opt_text(chain.r) << "\n"
    << "seed = " << chain.seed << "\n";
  if (!traj.rejected.empty())
    s << "rejection_fraction = "
      << format_double(static_cast<double>(traj.rejection_count()) / static_cast<double>(traj.rejected.size())) << "\n";
  s << "histogram_total = " << hist.total << "\n"
    << "burn_in_discarded = " << hist.burn_in_discarded << "\n";
  if (target) s << "tv_estimate = " << format_double(tv_estimate(hist, *target)) << "\n";
  s << "\n# configuration\n" << to_ini(cfg);

  write_file_atomic(out_path(opt, "trajectory.csv"), trajectory_csv(traj));
  write_file_atomic(out_path(opt, "histogram.csv"), hcsv);
  write_file_atomic(out_path(opt, "summary.txt"), s.str());
  out << s.str();
  return 0;
}

int cmd_schedule(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const TargetModel model = build_target(cfg);
  const double beta = sampler_beta(cfg);
  const int B = static_cast<int>(cfg.sampler.integer("B", model.n()));
  const double eps = cfg.experiment.number("eps", 0.1);
  const double c0 = cfg.experiment.number("c0", 1.0);
  const std::string mode = cfg.experiment.text("mode", "plain");
  if (mode != "plain" && mode != "hessian") cfg.experiment.fail("mode", "expected 'plain' or 'hessian'");
  if (mode == "hessian" && !model.constants().H)
    throw MissingConstant("hessian schedule needs the Hessian Lipschitz constant H");
  std::string rho_source;
  const double rho = rho_setting(cfg, model, beta, rho_source);
  const ScheduleReport rep =
      mode == "plain" ? schedule_plain(model, beta, B, eps, rho, c0) : schedule_hessian(model, beta, B, eps, rho, c0);
  std::string text = schedule_text(rep) + "rho_source = " + rho_source + "\n";
  write_file_atomic(out_path(opt, "schedule.txt"), text + "\n# configuration\n" + to_ini(cfg));
  write_file_atomic(out_path(opt, "schedule.csv"), schedule_csv(rep));
  out << text;
  return 0;
}

int cmd_kernel(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const TargetModel model = build_target(cfg);
  if (model.dim() > 2) throw UnsupportedConfiguration("kernel analysis supports d in {1, 2}");
  const ChainConfig chain = chain_config(cfg, model);
  const KernelParams params = kernel_params(chain);
  std::unique_ptr<KernelEngine> engine;
  try {
    engine = std::make_unique<KernelEngine>(model, params);
  } catch (const EnumerationTooLarge& e) {
    throw UnsupportedConfiguration(std::string("kernel analysis is limited to enumerable batches: ") + e.what());
  }
  const int d = model.dim();
  const std::string kind_name = cfg.experiment.text("kernel_kind", "metropolized");
  if (kind_name != "metropolized" && kind_name != "lazy")
    cfg.experiment.fail("kernel_kind", "expected 'metropolized' or 'lazy'");
  const KernelKind kind = kind_name == "lazy" ? KernelKind::Lazy : KernelKind::Metropolized;
  const Grid grid = Grid::covering(d, params.R, static_cast<int>(cfg.experiment.integer("cells", d == 1 ? 201 : 41)));
  KernelBuildOptions build;
  build.jobs = opt.jobs;
  const DiscretizedKernel kernel = build_discretized_kernel(*engine, grid, kind, build);

  std::vector<Check> checks;
  const double row_err = kernel.max_row_sum_error();
  checks.push_back({"row_sums", row_err, row_err <= 1e-10, "max |row sum - 1|"});
  if (kind == KernelKind::Metropolized) {
    const double res = detailed_balance_residual(kernel, *kernel.stationary());
    checks.push_back({"detailed_balance", res, res <= 1e-8, "relative flow asymmetry"});
  }

  const double eps = cfg.experiment.number("eps", 0.1);
  const auto& c = model.constants();
  const std::int64_t K = std::max<std::int64_t>(1, chain.K);
  double delta = 0.0;
  if (cfg.experiment.text("delta", "auto") == "auto") {
    delta = delta_bound(params.eta, d, params.beta, params.B, c.L, params.R, c.G, K, eps);
  } else {
    delta = cfg.experiment.number("delta");
  }
  RngStream rng(chain.seed, 0x6b65726eULL);
  const auto sets = random_sets(rng, d, params.R, static_cast<int>(cfg.experiment.integer("sets", 50)));
  std::vector<Vector> points;
  const int npts = static_cast<int>(cfg.experiment.integer("points", 20));
  for (int i = 0; i < npts; ++i) points.push_back(uniform_in_ball(rng, d, params.R));
  const SandwichReport sw =
      delta_sandwich_check(*engine, delta, sets, points, cfg.experiment.number("tolerance", 1e-8), opt.jobs);
  checks.push_back({"delta_sandwich", sw.worst_ratio_deviation, sw.holds(),
                    "delta=" + format_double(delta) + " violations=" + std::to_string(sw.violations) + "/" +
                        std::to_string(sw.pairs_checked)});

  const ConductanceResult phi = conductance(kernel);
  checks.push_back({"conductance", phi.phi, phi.phi > 0 && phi.phi <= 1.0,
                    phi.exhaustive ? "exhaustive" : "cut family: " + phi.family});

  const int cnodes = static_cast<int>(cfg.experiment.integer("cheeger_nodes", d == 1 ? 2001 : 101));
  const CheegerResult rho = cheeger_constant(truncated_target(model, params.beta, params.R, cnodes).density);
  checks.push_back({"cheeger", rho.rho, rho.rho > 0 && std::isfinite(rho.rho),
                    (rho.heuristic ? "upper bound, " : "") + rho.cut});

  const int scan = static_cast<int>(cfg.experiment.integer("scan_points", 101));
  double pmin = 1.0;
  for (int i = 0; i < scan; ++i) {
    Vector u(d);
    if (d == 1) {
      u[0] = -params.R + 2.0 * params.R * i / std::max(1, scan - 1);
    } else {
      u = uniform_in_ball(rng, d, params.R);
    }
    pmin = std::min(pmin, engine->accept_prob(u));
  }
  const bool premise = params.eta <= engine->acceptance_floor_eta();
  checks.push_back({"acceptance_floor", pmin, !premise || pmin >= 0.4,
                    premise ? "eta within the floor premise, requires p >= 0.4" : "eta above the floor premise, reported only"});

  std::string kcsv = csv_row({"row", "col", "value"});
  for (int i = 0; i < kernel.size(); ++i)
    for (int k = kernel.row_ptr()[i]; k < kernel.row_ptr()[i + 1]; ++k)
      kcsv += csv_row({std::to_string(i), std::to_string(kernel.cols()[k]), format_double(kernel.values()[k])});
  std::string ccsv = csv_row({"check", "value", "pass", "detail"});
  bool all = true;
  std::ostringstream s;
  for (const auto& ch : checks) {
    ccsv += csv_row({ch.name, format_double(ch.value), ch.pass ? "pass" : "fail", ch.detail});
    s << (ch.pass ? "PASS " : "FAIL ") << ch.name << " = " << format_double(ch.value) << " (" << ch.detail << ")\n";
    all = all && ch.pass;
  }
  write_file_atomic(out_path(opt, "kernel.csv"), kcsv);
  write_file_atomic(out_path(opt, "checks.csv"), ccsv);
  out << "states = " << kernel.size() << "\n" << s.str();
  return all ? 0 : 1;
}

int cmd_check(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const TargetModel model = build_target(cfg);
  double radius = cfg.experiment.number("probe_radius", 10.0);
  const int points = static_cast<int>(cfg.experiment.integer("probe_points", 100));
  const std::uint64_t seed = cfg.experiment.unsigned_integer("probe_seed", cfg.sampler.unsigned_integer("seed", 0));
  const ProbeReport rep = probe_assumptions(model, radius, points, seed, opt.jobs);
  std::string csv = csv_row({"assumption", "margin", "arg_point", "arg_pair", "pass"});
  for (const auto& e : rep.entries) {
    csv += csv_row({e.assumption, format_double(e.margin), point_text(e.arg_point),
                    e.arg_pair ? point_text(*e.arg_pair) : "", e.pass ? "pass" : "fail"});
    out << (e.pass ? "PASS " : "FAIL ") << e.assumption << " margin = " << format_double(e.margin)
        << " at (" << point_text(e.arg_point) << ")";
    if (e.arg_pair) out << " paired with (" << point_text(*e.arg_pair) << ")";
    out << "\n";
  }
  write_file_atomic(out_path(opt, "probe.csv"), csv);
  return rep.valid ? 0 : 1;
}

int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const TargetModel model = build_target(cfg);
  const std::string which = cfg.experiment.text("sweep", "eta");
  if (!cfg.experiment.has("eta_grid")) throw InvalidConfig("[experiment] sweep needs 'eta_grid'");
  const std::vector<double> grid = cfg.experiment.list("eta_grid");
  try {
    validate_geometric_grid(grid);
  } catch (const InvalidParameter& e) {
    cfg.experiment.fail("eta_grid", e.what());
  }
  const Section& s = cfg.sampler;
  const double beta = sampler_beta(cfg);
  const int B = static_cast<int>(s.integer("B", model.n()));
  SweepResult res;
  std::string stem;
  std::string value_name;
  if (which == "eta") {
    EtaSweepConfig ec;
    ec.kind = sampler_kind(cfg);
    ec.chain.beta = beta;
    ec.chain.B = B;
    ec.chain.chain_id = s.unsigned_integer("chain_id", 0);
    if (s.has("R")) ec.chain.R = s.number("R");
    if (s.has("r")) ec.chain.r = s.number("r");
    const std::string mode = cfg.experiment.text("sweep_mode", "exact");
    if (mode != "exact" && mode != "simulate") cfg.experiment.fail("sweep_mode", "expected 'exact' or 'simulate'");
    ec.mode = mode == "exact" ? SweepMode::Exact : SweepMode::Simulate;
    ec.bins = static_cast<int>(cfg.experiment.integer("bins", 200));
    if (cfg.experiment.has("range")) ec.range = cfg.experiment.number("range");
    ec.burn_in_fraction = cfg.experiment.number("burn_in", 0.5);
    if (cfg.experiment.has("steps")) {
      const std::int64_t steps = cfg.experiment.integer("steps");
      ec.steps = [steps](double) { return steps; };
    }
    ec.jobs = opt.jobs;
    std::vector<std::uint64_t> seeds;
    if (cfg.experiment.has("seeds")) {
      for (double v : cfg.experiment.list("seeds")) seeds.push_back(static_cast<std::uint64_t>(v));
    } else {
      seeds.push_back(s.unsigned_integer("seed", 0));
    }
    res = eta_sweep(model, ec, grid, seeds);
    stem = "sweep_eta";
    value_name = "tv";
  } else if (which == "conductance") {
    ConductanceSweepConfig cc;
    cc.beta = beta;
    cc.B = B;
    if (!s.has("R")) throw InvalidConfig("[sampler] conductance sweep needs a numeric 'R'");
    cc.R = s.number("R");
    const std::string rule = cfg.experiment.text("r_rule", "lemma63");
    const std::int64_t K = s.integer("K", 10000);
    const double eps = cfg.experiment.number("eps", 0.1);
    const int d = model.dim();
    if (rule == "lemma62" || rule == "lemma63") {
      cc.r_of_eta = [=](double eta) {
        const ProjRadii r = proj_radii(eta, d, beta, K, eps);
        return rule == "lemma62" ? r.r_lemma62 : r.r_lemma63;
      };
    } else if (rule == "fixed") {
      const double r = s.number("r");
      cc.r_of_eta = [r](double) { return r; };
    } else {
      cfg.experiment.fail("r_rule", "expected 'lemma62', 'lemma63' or 'fixed'");
    }
    cc.cells_per_axis = static_cast<int>(cfg.experiment.integer("cells", d == 1 ? 201 : 41));
    cc.kind = cfg.experiment.text("kernel_kind", "metropolized") == "lazy" ? KernelKind::Lazy : KernelKind::Metropolized;
    cc.build.jobs = opt.jobs;
    std::string rho_source;
    cc.rho = rho_setting(cfg, model, beta, rho_source);
    res = conductance_sweep(model, cc, grid);
    stem = "sweep_conductance";
    value_name = "phi";
  } else {
    cfg.experiment.fail("sweep", "expected 'eta' or 'conductance'");
  }
  write_file_atomic(out_path(opt, stem + ".csv"), sweep_csv(res, value_name));
  write_file_atomic(out_path(opt, stem + ".dat"), sweep_plot_data(res));
  out << "slope = " << format_double(res.fit.slope) << " +- " << format_double(res.fit.half_width) << "\n"
      << "intercept = " << format_double(res.fit.intercept) << "\n"
      << "residual = " << format_double(res.fit.residual) << "\n";
  if (res.fit.fitted_c0) out << "fitted_c0 = " << format_double(*res.fit.fitted_c0) << "\n";
  return 0;
}

}  // namespace sgldv::cli
