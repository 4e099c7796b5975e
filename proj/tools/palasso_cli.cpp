#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "palasso/design.hpp"
#include "palasso/error.hpp"
#include "palasso/objective.hpp"
#include "palasso/optimizer.hpp"
#include "palasso/path.hpp"
#include "palasso/prox.hpp"
#include "palasso/synth.hpp"
#include "run_config.hpp"

namespace {

using namespace palasso;
using palasso::cli::RunConfig;
using nlohmann::json;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitDiverged = 3;

// Options bound to a scratch RunConfig; only the ones given on the command line
// are copied over the config-file values.
class Bindings {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T initial,
                   std::function<void(RunConfig&, const T&)> set, const std::string& help) {
    auto value = std::make_shared<T>(initial);
    CLI::Option* opt = app->add_option(name, *value, help)->capture_default_str();
    entries_.push_back({opt, [value, set](RunConfig& c) { set(c, *value); }});
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& name,
                    std::function<void(RunConfig&)> set, const std::string& help) {
    CLI::Option* opt = app->add_flag(name, help);
    entries_.push_back({opt, std::move(set)});
    return opt;
  }

  void apply(RunConfig& cfg) const {
    for (const auto& e : entries_) {
      if (e.opt->count() > 0) e.set(cfg);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(RunConfig&)> set;
  };
  std::vector<Entry> entries_;
};

void add_model_options(CLI::App* app, Bindings& b, const RunConfig& d) {
  b.add<std::string>(app, "--data", d.design.source,
                     [](RunConfig& c, const std::string& v) { c.design.source = v; },
                     "CSV file with a header row");
  b.add<std::string>(app, "--response", d.design.response_column,
                     [](RunConfig& c, const std::string& v) { c.design.response_column = v; },
                     "Response column name");
  b.flag(app, "--no-standardize", [](RunConfig& c) { c.design.standardize = false; },
         "Use the columns as given (default: center and scale)");
  b.flag(app, "--no-intercept", [](RunConfig& c) { c.design.intercept = false; },
         "Drop the unpenalized intercept");
  b.flag(app, "--second-order", [](RunConfig& c) { c.design.second_order = true; },
         "Fit mains, squares and pairwise products");
  b.add<std::string>(app, "--family", std::string(to_string(d.family)),
                     [](RunConfig& c, const std::string& v) { c.family = parse_family(v); },
                     "gaussian, bernoulli, poisson, negbin or cauchy");
  b.add<double>(app, "--aux", d.aux, [](RunConfig& c, const double& v) { c.aux = v; },
                "Initial noise sd / NegBin alpha / Cauchy scale");
  b.add<std::string>(app, "--prior", std::string(to_string(d.prior)),
                     [](RunConfig& c, const std::string& v) { c.prior = parse_prior(v); },
                     "independent, sparse_group or overlapping_group");
  b.add<std::string>(app, "--groups", "",
                     [](RunConfig& c, const std::string& v) { c.groups_path = v; },
                     "predictor_index,group_index file (second-order models default to pair groups)");
  b.add<double>(app, "--group-scale", 0.0,
                [](RunConfig& c, const double& v) { c.group_scale = v; },
                "Scale of lambda around its group value (default 1/sqrt(N))");
  b.add<double>(app, "--softmax-temp", 0.0,
                [](RunConfig& c, const double& v) { c.softmax_temp = v; },
                "Smooth-min temperature (default sqrt(P))");
  b.add<double>(app, "--barrier-a", 0.0,
                [](RunConfig& c, const double& v) { c.barrier_a = v; },
                "Coefficient of -log(lambda) (default 1/tau)");

  const OptimizerConfig& o = d.optimizer;
  b.add<std::uint64_t>(app, "--seed", o.seed,
                       [](RunConfig& c, const std::uint64_t& v) { c.optimizer.seed = v; },
                       "Seed for the held-out split and minibatches");
  b.add<std::string>(app, "--mode", "full",
                     [](RunConfig& c, const std::string& v) { c.optimizer.mode = parse_mode(v); },
                     "full, svrg or bcd");
  b.add<double>(app, "--step", o.step, [](RunConfig& c, const double& v) { c.optimizer.step = v; },
                "Adam step size");
  b.add<Eigen::Index>(app, "--minibatch", o.minibatch,
                      [](RunConfig& c, const Eigen::Index& v) { c.optimizer.minibatch = v; },
                      "SVRG minibatch size");
  b.add<int>(app, "--patience", o.patience,
             [](RunConfig& c, const int& v) { c.optimizer.patience = v; },
             "Early-stopping patience in iterations");
  b.add<Eigen::Index>(app, "--holdout", -1,
                      [](RunConfig& c, const Eigen::Index& v) { c.optimizer.holdout = v; },
                      "Held-out rows for early stopping (default min(1000, N/10); 0 disables)");
  b.add<int>(app, "--max-iters", o.max_iters,
             [](RunConfig& c, const int& v) { c.optimizer.max_iters = v; }, "Iteration cap");
  b.add<double>(app, "--tol", o.tol, [](RunConfig& c, const double& v) { c.optimizer.tol = v; },
                "Stop when no parameter moves more than this (0 disables)");
  b.add<Eigen::Index>(app, "--svrg-epoch", o.svrg_epoch,
                      [](RunConfig& c, const Eigen::Index& v) { c.optimizer.svrg_epoch = v; },
                      "SVRG inner steps per anchor (0: ceil(N/minibatch))");
  b.add<double>(app, "--bcd-eps", o.bcd_eps,
                [](RunConfig& c, const double& v) { c.optimizer.bcd_eps = v; },
                "BCD eps in lambda = 1/(|beta| + eps)");
  b.add<int>(app, "--bcd-half-steps", o.bcd_half_steps,
             [](RunConfig& c, const int& v) { c.optimizer.bcd_half_steps = v; },
             "BCD block updates");
  b.flag(app, "--fixed-aux", [](RunConfig& c) { c.optimizer.estimate_aux = false; },
         "Hold the family aux parameter at --aux");
  b.add<int>(app, "--log-every", o.log_every,
             [](RunConfig& c, const int& v) { c.optimizer.log_every = v; },
             "Progress line to stderr every k iterations (0: silent)");
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  return file;
}

LikelihoodFamily family_of(const RunConfig& cfg) {
  if (!(cfg.aux > 0.0)) throw ConfigError("aux must be > 0");
  return LikelihoodFamily{cfg.family, cfg.aux};
}

PriorSpec prior_of(const RunConfig& cfg, const Dataset& ds) {
  PriorSpec spec;
  spec.kind = cfg.prior;
  spec.group_scale = cfg.group_scale;
  spec.softmax_temp = cfg.softmax_temp;
  const Eigen::Index p = ds.data.n_features();
  if (!cfg.groups_path.empty()) {
    spec.groups = GroupStructure::load(cfg.groups_path, p);
  } else if (cfg.prior != PriorKind::independent_half_cauchy) {
    if (!ds.data.expansion) {
      throw ConfigError("prior '" + std::string(to_string(cfg.prior)) + "' needs --groups");
    }
    spec.groups = hierarchical_groups(ds.data.expansion->base_size());
  }
  return spec;
}

PenaltyConfig penalty_of(const RunConfig& cfg) {
  PenaltyConfig pc;
  pc.tau = cfg.tau.value;
  pc.per_observation = cfg.tau.per_observation;
  pc.barrier_a = cfg.barrier_a;
  return pc;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------- fit

int cmd_fit(const RunConfig& cfg, const std::string& out_path) {
  const Dataset ds = load_csv(cfg.design);
  const LikelihoodFamily fam = family_of(cfg);
  const PriorSpec spec = prior_of(cfg, ds);
  const PenaltyConfig pc = penalty_of(cfg);
  OptimizerConfig opt = cfg.optimizer;
  opt.fit_intercept = cfg.design.intercept;

  const auto t0 = std::chrono::steady_clock::now();
  const FitData fd = split_for(ds.data, opt);
  const FitResult res = run_fit(fd, fam, spec, pc, opt);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const ResolvedPenalty rp = pc.resolve(fd.train.n_obs());
  const Eigen::Index p = res.state.beta.size();
  const auto names = ds.coefficient_names();
  const bool original = ds.scaling.applied && !ds.data.expansion;
  double intercept = res.state.intercept;
  Eigen::VectorXd beta = res.state.beta;
  if (original) beta = to_original_scale(res.state.beta, ds.scaling, intercept);

  json coefs = json::array();
  json zeros = json::array();
  Eigen::Index nonzero = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const bool zero = res.state.beta[j] == 0.0;
    if (zero) {
      zeros.push_back(names[static_cast<std::size_t>(j)]);
    } else {
      ++nonzero;
    }
    coefs.push_back({{"name", names[static_cast<std::size_t>(j)]},
                     {"value", beta[j]},
                     {"standardized_value", res.state.beta[j]},
                     {"lambda", res.state.lam[j]},
                     {"zero", zero}});
  }
  json gamma = json::array();
  for (Eigen::Index g = 0; g < res.state.gamma.size(); ++g) gamma.push_back(res.state.gamma[g]);

  const double final_objective =
      res.objective_trace.empty() ? joint_objective(res.state, pc, spec, fam, fd.train)
                                  : res.objective_trace[static_cast<std::size_t>(
                                        std::min<std::size_t>(res.best_iteration,
                                                              res.objective_trace.size() - 1))];
  json report = {
      {"schema_version", 1},
      {"command", "fit"},
      {"data", cfg.design.source},
      {"response", ds.response_name},
      {"family", std::string(to_string(fam.kind))},
      {"prior", std::string(to_string(spec.kind))},
      {"mode", std::string(to_string(opt.mode))},
      {"tau_input", cli::format_tau(cfg.tau)},
      {"tau", rp.tau},
      {"barrier_a", rp.a},
      {"seed", opt.seed},
      {"n_train", fd.train.n_obs()},
      {"n_heldout", fd.heldout ? fd.heldout->n_obs() : 0},
      {"n_coefficients", p},
      {"second_order", ds.data.expansion.has_value()},
      {"coefficient_scale", original ? "original" : "standardized"},
      {"intercept", cfg.design.intercept ? json(intercept) : json(nullptr)},
      {"aux", res.state.log_aux ? json(std::exp(*res.state.log_aux)) : json(nullptr)},
      {"coefficients", coefs},
      {"zero_coefficients", zeros},
      {"nonzero_count", nonzero},
      {"gamma", gamma},
      {"train_nll", finite_or_null(res.train_nll)},
      {"heldout_nll", res.heldout_nll ? finite_or_null(*res.heldout_nll) : json(nullptr)},
      {"final_objective", finite_or_null(final_objective)},
      {"iterations", res.iterations},
      {"best_iteration", res.best_iteration},
      {"stop_reason", std::string(to_string(res.converged_reason))},
      {"timing_seconds", seconds},
  };
  std::ofstream file;
  open_out(out_path, file) << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- path

int cmd_path(const RunConfig& cfg, const std::string& out_path, const std::string& smoothed_path) {
  const Dataset ds = load_csv(cfg.design);
  const LikelihoodFamily fam = family_of(cfg);
  const PriorSpec spec = prior_of(cfg, ds);
  OptimizerConfig opt = cfg.optimizer;
  opt.fit_intercept = cfg.design.intercept;

  PathConfig pcfg = cfg.path;
  pcfg.barrier_a = cfg.barrier_a;
  if (cfg.tau_grid) {
    pcfg.tau_grid.clear();
    for (const auto& t : *cfg.tau_grid) pcfg.tau_grid.push_back(t.value);
    pcfg.per_observation = cfg.tau_grid->front().per_observation;
  } else {
    pcfg.tau_grid = default_tau_grid();
    pcfg.per_observation = true;
  }

  const PathResult res = run_path(ds.data, fam, spec, opt, pcfg);
  const auto names = ds.coefficient_names();
  std::ofstream file;
  write_path_csv(open_out(out_path, file), res, names, false);
  if (!smoothed_path.empty()) {
    std::ofstream sfile;
    write_path_csv(open_out(smoothed_path, sfile), res, names, true);
  }
  std::size_t failed = 0;
  for (const auto& pt : res.points) failed += pt.failed ? 1 : 0;
  std::cerr << "path: " << res.points.size() << " points, " << failed << " failed";
  if (res.selected >= 0) std::cerr << ", selected tau " << res.selected_tau;
  std::cerr << '\n';
  if (failed == res.points.size()) {
    throw DivergedError("every grid point failed", ParamState{}, 0);
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string family = "gaussian";
  std::string structure = "independent";
  Eigen::Index n = 1000;
  Eigen::Index p = 100;
  Eigen::Index active = 10;
  Eigen::Index group_size = 5;
  std::uint64_t seed = 0;
  double aux = 1.0;
  double coef_scale = 1.0;
  double intercept = 0.0;
  std::string out;
  std::string truth;
  std::string groups_out;
};

int cmd_simulate(const SimulateArgs& a) {
  SynthSpec s;
  s.family = parse_family(a.family);
  s.structure = parse_structure(a.structure);
  s.n = a.n;
  s.p = a.p;
  s.n_active = a.active;
  s.group_size = a.group_size;
  s.seed = a.seed;
  s.aux = a.aux;
  s.coef_scale = a.coef_scale;
  s.intercept = a.intercept;
  const SynthResult sr = generate(s);
  {
    std::ofstream file;
    write_dataset_csv(open_out(a.out, file), sr.dataset);
  }
  if (!a.truth.empty()) {
    std::ofstream file;
    write_truth_csv(open_out(a.truth, file), sr);
  }
  if (!a.groups_out.empty()) {
    if (!sr.groups) throw ConfigError("--groups-out needs a group or hierarchical structure");
    std::ofstream file;
    sr.groups->write(open_out(a.groups_out, file));
  }
  return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  int instances = 100;
  double h = 1e-6;
  double threshold = 1e-5;
  std::uint64_t seed = 0;
  std::string out;
};

double prior_fd_error(const PriorSpec& spec, const Eigen::VectorXd& lam,
                      const Eigen::VectorXd& gamma, double h) {
  const PriorGradient g = grad_log_prior(spec, lam, gamma);
  double worst = 0.0;
  auto rel = [](double fd, double an) {
    return std::abs(fd - an) / std::max({std::abs(an), std::abs(fd), 1e-2});
  };
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    Eigen::VectorXd lp = lam, lm = lam;
    lp[k] += h;
    lm[k] -= h;
    const double fd = (log_prior(spec, lp, gamma) - log_prior(spec, lm, gamma)) / (2 * h);
    worst = std::max(worst, rel(fd, g.lam[k]));
  }
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    Eigen::VectorXd gp = gamma, gm = gamma;
    gp[k] += h;
    gm[k] -= h;
    const double fd = (log_prior(spec, lam, gp) - log_prior(spec, lam, gm)) / (2 * h);
    worst = std::max(worst, rel(fd, g.gamma[k]));
  }
  return worst;
}

int cmd_gradcheck(const GradcheckArgs& a) {
  std::ofstream file;
  std::ostream& out = open_out(a.out, file);
  out << "kind,name,instances,worst_rel_error,pass\n";
  bool all_ok = true;
  const FamilyKind families[] = {FamilyKind::gaussian, FamilyKind::bernoulli_logit,
                                 FamilyKind::poisson_log, FamilyKind::negbin_log,
                                 FamilyKind::cauchy};
  for (const FamilyKind kind : families) {
    double worst = 0.0;
    for (int i = 0; i < a.instances; ++i) {
      SynthSpec s;
      s.family = kind;
      s.n = 20;
      s.p = 5;
      s.n_active = 3;
      s.aux = 2.0;
      s.coef_scale = 0.5;
      s.seed = a.seed * 1000003u + static_cast<std::uint64_t>(i);
      const SynthResult sr = generate(s);
      std::mt19937_64 rng(s.seed + 17);
      std::normal_distribution<double> normal(0.0, 0.5);
      Eigen::VectorXd beta(s.p);
      for (auto& v : beta) v = normal(rng);
      const LikelihoodFamily fam{kind, 1.5};
      worst = std::max(worst, finite_diff_check(fam, sr.dataset.data, beta, a.h, normal(rng),
                                                fam.has_aux()));
    }
    const bool ok = worst < a.threshold;
    all_ok = all_ok && ok;
    out << "likelihood," << to_string(kind) << ',' << a.instances << ',' << worst << ','
        << (ok ? "true" : "false") << '\n';
  }
  const PriorKind priors[] = {PriorKind::independent_half_cauchy, PriorKind::sparse_group,
                              PriorKind::overlapping_group};
  for (const PriorKind kind : priors) {
    double worst = 0.0;
    for (int i = 0; i < a.instances; ++i) {
      std::mt19937_64 rng(a.seed * 1000003u + static_cast<std::uint64_t>(i) + 99);
      std::uniform_real_distribution<double> pos(0.1, 3.0);
      const Eigen::Index p = 6;
      PriorSpec spec;
      spec.kind = kind;
      if (kind == PriorKind::sparse_group) spec.groups = GroupStructure::contiguous(p, 3);
      if (kind == PriorKind::overlapping_group) {
        spec.groups = GroupStructure::from_pairs(
            p, {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {3, 1}, {4, 1}, {4, 2}, {5, 2}, {0, 2}});
      }
      spec = spec.resolved(100, p);
      Eigen::VectorXd lam(p), gamma(spec.n_hyper());
      for (auto& v : lam) v = pos(rng);
      for (auto& v : gamma) v = pos(rng);
      worst = std::max(worst, prior_fd_error(spec, lam, gamma, a.h));
    }
    const bool ok = worst < a.threshold;
    all_ok = all_ok && ok;
    out << "prior," << to_string(kind) << ',' << a.instances << ',' << worst << ','
        << (ok ? "true" : "false") << '\n';
  }
  return all_ok ? 0 : 4;
}

// ---------------------------------------------------------------- prox-table

struct ProxTableArgs {
  double b = 0.5;
  double a = 0.0;
  double lam0_min = -1.0;
  double lam0_max = 3.0;
  int lam0_n = 81;
  double aa_max = 3.0;
  int aa_n = 61;
  std::string out;
};

int cmd_prox_table(const ProxTableArgs& t) {
  if (!(t.b > 0.0)) throw ConfigError("--b must be > 0");
  if (t.a < 0.0) throw ConfigError("--a must be >= 0");
  if (t.lam0_n < 2 || t.aa_n < 2) throw ConfigError("grids need at least 2 points");
  if (t.a == 0.0 && t.lam0_min < 0.0) {
    throw ConfigError("lam0 must be >= 0 without the barrier (--lam0-min)");
  }
  std::ofstream file;
  std::ostream& out = open_out(t.out, file);
  out.precision(12);
  const bool reduced = t.a == 0.0 && t.b < 1.0;
  out << "lam0,aa,b,a,lam_star,beta_star,cost" << (reduced ? ",reduced" : "") << '\n';
  for (int i = 0; i < t.lam0_n; ++i) {
    const double lam0 = t.lam0_min + (t.lam0_max - t.lam0_min) * i / (t.lam0_n - 1);
    for (int k = 0; k < t.aa_n; ++k) {
      const double aa = t.aa_max * k / (t.aa_n - 1);
      const ProxOutput po = prox_joint(ProxInput{aa, lam0, 1.0, t.b, t.a});
      out << lam0 << ',' << aa << ',' << t.b << ',' << t.a << ',' << po.lam_star << ','
          << po.beta_star << ',' << po.cost;
      if (reduced) out << ',' << reduced_prox(lam0, aa, t.b);
      out << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------- penalty-profile

struct ProfileArgs {
  double tau = 1.0;
  std::string prior = "half_cauchy";
  double rate = 1.0;
  double max = 10.0;
  int n = 1001;
  std::string out;
};

int cmd_penalty_profile(const ProfileArgs& a) {
  if (!(a.tau > 0.0)) throw ConfigError("--tau must be > 0");
  if (a.n < 2 || !(a.max > 0.0)) throw ConfigError("need --n >= 2 and --max > 0");
  ProfiledPenalty pp;
  pp.tau = a.tau;
  if (a.prior == "half_cauchy") {
    pp.prior = ScalarPrior::half_cauchy();
  } else if (a.prior == "exponential") {
    pp.prior = ScalarPrior::exponential(a.rate);
  } else {
    throw ConfigError("unknown penalty prior '" + a.prior + "' (half_cauchy or exponential)");
  }
  std::cerr << "lambda_a " << lambda_a(pp) << '\n';
  std::ofstream file;
  std::ostream& out = open_out(a.out, file);
  out.precision(12);
  out << "abs_beta,lambda_star,g,gprime,gsecond,threshold\n";
  for (int i = 0; i < a.n; ++i) {
    const double b = a.max * i / (a.n - 1);
    const PenaltyValue v = penalty_value_grad(pp, b);
    out << b << ',' << lambda_star(pp, b) << ',' << v.g << ',' << v.gprime << ',' << v.gsecond
        << ',' << b + v.gprime << '\n';
  }
  return 0;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "palasso: " << kind << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse regression with jointly optimized per-coefficient penalty weights"};
  app.require_subcommand(1);
  const RunConfig defaults;

  // fit / path share the model options.
  std::string config_path;
  std::string tau_text = cli::format_tau(defaults.tau);
  std::string out_path;
  Bindings fit_b;
  CLI::App* fit = app.add_subcommand("fit", "Fit one model and write a JSON report");
  fit->add_option("--config", config_path, "JSON config; flags override its values");
  fit->add_option("--out", out_path, "Report path (default stdout)");
  add_model_options(fit, fit_b, defaults);
  fit_b.add<std::string>(fit, "--tau", tau_text,
                         [](RunConfig& c, const std::string& v) { c.tau = cli::parse_tau(v); },
                         "Penalty strength; an N suffix multiplies by the training rows");

  Bindings path_b;
  std::string smoothed_path;
  CLI::App* path = app.add_subcommand("path", "Warm-started fits over a tau grid, CSV output");
  path->add_option("--config", config_path, "JSON config; flags override its values");
  path->add_option("--out", out_path, "Path CSV (default stdout)");
  path->add_option("--smoothed-out", smoothed_path, "Rolling-median smoothed path CSV");
  add_model_options(path, path_b, defaults);
  path_b.add<std::string>(
      path, "--tau-grid", "default",
      [](RunConfig& c, const std::string& v) {
        if (v == "default") {
          c.tau_grid.reset();
        } else {
          c.tau_grid = cli::parse_tau_grid(v);
        }
      },
      "Comma-separated taus (e.g. 1N,0.1N,0.01N); default 30 points from 1N to 0.001N");
  path_b.add<int>(path, "--median-window", defaults.path.median_window,
                  [](RunConfig& c, const int& v) { c.path.median_window = v; },
                  "Odd rolling-median window");
  path_b.add<double>(path, "--holdout-fraction", defaults.path.holdout_fraction,
                     [](RunConfig& c, const double& v) { c.path.holdout_fraction = v; },
                     "Fraction of rows for early stopping and selection");
  path_b.flag(path, "--cold", [](RunConfig& c) { c.path.warm_start = false; },
              "Start every grid point from scratch");
  path_b.flag(path, "--heldout-early-stop",
              [](RunConfig& c) { c.path.heldout_early_stop = true; },
              "Early-stop each fit on the held-out rows instead of converging");
  path_b.flag(path, "--keep-gamma", [](RunConfig& c) { c.path.reset_gamma = false; },
              "Carry group hyperparameters between grid points");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Write a synthetic dataset and its truth");
  simulate->add_option("--family", sim.family, "Response family")->capture_default_str();
  simulate->add_option("--structure", sim.structure, "independent, group or hierarchical")
      ->capture_default_str();
  simulate->add_option("--n", sim.n, "Rows")->capture_default_str();
  simulate->add_option("--p", sim.p, "Columns (base columns for hierarchical)")
      ->capture_default_str();
  simulate->add_option("--active", sim.active, "Nonzero coefficients, or groups")
      ->capture_default_str();
  simulate->add_option("--group-size", sim.group_size, "Group size")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  simulate->add_option("--aux", sim.aux, "Noise sd / NegBin alpha / Cauchy scale")
      ->capture_default_str();
  simulate->add_option("--coef-scale", sim.coef_scale, "Sd of the nonzero coefficients")
      ->capture_default_str();
  simulate->add_option("--intercept", sim.intercept, "True intercept")->capture_default_str();
  simulate->add_option("--out", sim.out, "Dataset CSV (default stdout)");
  simulate->add_option("--truth", sim.truth, "Truth CSV: index,name,true_beta");
  simulate->add_option("--groups-out", sim.groups_out, "Group file for the generated structure");

  GradcheckArgs gc;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference check of every likelihood and prior");
  gradcheck->add_option("--instances", gc.instances, "Random instances per case")
      ->capture_default_str();
  gradcheck->add_option("--fd-step", gc.h, "Central-difference step")->capture_default_str();
  gradcheck->add_option("--threshold", gc.threshold, "Pass threshold")->capture_default_str();
  gradcheck->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  gradcheck->add_option("--out", gc.out, "CSV (default stdout)");

  ProxTableArgs pt;
  CLI::App* prox_table =
      app.add_subcommand("prox-table", "Prox surface over (lam0, |beta0|/s_beta) for fixed b");
  prox_table->add_option("--b", pt.b, "s_beta * s_lam (s_beta = 1)")->capture_default_str();
  prox_table->add_option("--a", pt.a, "Log-barrier coefficient (0: no barrier)")
      ->capture_default_str();
  prox_table->add_option("--lam0-min", pt.lam0_min, "")->capture_default_str();
  prox_table->add_option("--lam0-max", pt.lam0_max, "")->capture_default_str();
  prox_table->add_option("--lam0-n", pt.lam0_n, "")->capture_default_str();
  prox_table->add_option("--aa-max", pt.aa_max, "")->capture_default_str();
  prox_table->add_option("--aa-n", pt.aa_n, "")->capture_default_str();
  prox_table->add_option("--out", pt.out, "CSV (default stdout)");

  ProfileArgs pa;
  CLI::App* profile =
      app.add_subcommand("penalty-profile", "Profiled penalty g, g' and g'' over |beta|");
  profile->add_option("--tau", pa.tau, "Penalty strength")->capture_default_str();
  profile->add_option("--prior", pa.prior, "half_cauchy or exponential")->capture_default_str();
  profile->add_option("--rate", pa.rate, "Exponential rate")->capture_default_str();
  profile->add_option("--max", pa.max, "Largest |beta|")->capture_default_str();
  profile->add_option("--n", pa.n, "Grid points")->capture_default_str();
  profile->add_option("--out", pa.out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (fit->parsed() || path->parsed()) {
      RunConfig cfg;
      if (!config_path.empty()) cli::apply_json_file(cfg, config_path);
      (fit->parsed() ? fit_b : path_b).apply(cfg);
      if (cfg.design.source.empty()) throw ConfigError("no data file (--data or data.path)");
      return fit->parsed() ? cmd_fit(cfg, out_path) : cmd_path(cfg, out_path, smoothed_path);
    }
    if (simulate->parsed()) return cmd_simulate(sim);
    if (gradcheck->parsed()) return cmd_gradcheck(gc);
    if (prox_table->parsed()) return cmd_prox_table(pt);
    if (profile->parsed()) return cmd_penalty_profile(pa);
  } catch (const ConfigError& e) {
    return report("config error", e, kExitConfig);
  } catch (const DataError& e) {
    return report("data error", e, kExitData);
  } catch (const DimensionError& e) {
    return report("data error", e, kExitData);
  } catch (const DivergedError& e) {
    return report("diverged", e, kExitDiverged);
  } catch (const NumericalError& e) {
    return report("numerical failure", e, kExitDiverged);
  } catch (const Error& e) {
    return report("error", e, kExitConfig);
  } catch (const std::exception& e) {
    return report("unexpected error", e, kExitConfig);
  }
  return 0;
}
