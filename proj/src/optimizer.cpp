#include "palasso/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "palasso/kernels.hpp"
#include "palasso/prox.hpp"

namespace palasso {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::full_batch: return "full";
    case Mode::svrg: return "svrg";
    case Mode::bcd_reweighted: return "bcd";
  }
  return "unknown";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::patience: return "patience";
    case StopReason::max_iters: return "max_iters";
    case StopReason::tolerance: return "tolerance";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "full" || name == "full_batch") return Mode::full_batch;
  if (name == "svrg") return Mode::svrg;
  if (name == "bcd" || name == "bcd_reweighted") return Mode::bcd_reweighted;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected full, svrg or bcd)");
}

Eigen::Index default_holdout(Eigen::Index n_obs) {
  return std::min<Eigen::Index>(1000, n_obs / 10);
}

namespace {

LinearModelData take_rows(const LinearModelData& d, const std::vector<Eigen::Index>& rows) {
  LinearModelData out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.X.resize(n, d.X.cols());
  out.y.resize(n);
  if (d.weights.size()) out.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    out.X.row(i) = d.X.row(r);
    out.y[i] = d.y[r];
    if (d.weights.size()) out.weights[i] = d.weights[r];
  }
  out.expansion = d.expansion;
  return out;
}

}  // namespace

FitData split_holdout(const LinearModelData& data, Eigen::Index n_holdout, std::uint64_t seed) {
  const Eigen::Index n = data.n_obs();
  if (n_holdout < 0 || n_holdout >= n) {
    throw ConfigError("holdout must be in [0, N); got " + std::to_string(n_holdout) + " for N=" +
                      std::to_string(n));
  }
  if (n_holdout == 0) return FitData{data, std::nullopt};
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Eigen::Index> held(idx.begin(), idx.begin() + n_holdout);
  std::vector<Eigen::Index> train(idx.begin() + n_holdout, idx.end());
  std::sort(held.begin(), held.end());
  std::sort(train.begin(), train.end());
  return FitData{take_rows(data, train), take_rows(data, held)};
}

FitData split_for(const LinearModelData& data, const OptimizerConfig& opt) {
  return split_holdout(data, opt.holdout.value_or(default_holdout(data.n_obs())), opt.seed);
}

namespace {

struct Problem {
  const LinearModelData* train = nullptr;
  const LinearModelData* heldout = nullptr;
  LikelihoodFamily fam;
  PriorSpec spec;
  ResolvedPenalty pen;
  bool fit_intercept = true;
  bool fit_aux = false;
  Eigen::Index p = 0;
  Eigen::Index g = 0;
  double scale = 1.0;  // N / tau

  Eigen::Index dim() const { return 2 * p + g + 2; }
  Eigen::Index off_lam() const { return p; }
  Eigen::Index off_u() const { return 2 * p; }
  Eigen::Index off_b() const { return 2 * p + g; }
  Eigen::Index off_aux() const { return 2 * p + g + 1; }
};

Problem make_problem(const FitData& data, const LikelihoodFamily& fam, const PriorSpec& spec,
                     const PenaltyConfig& cfg, const OptimizerConfig& opt) {
  validate(fam, data.train);
  if (data.heldout) {
    validate(fam, *data.heldout);
    if (data.heldout->n_features() != data.train.n_features()) {
      throw DimensionError("held-out data has a different column count");
    }
  }
  if (!(opt.step > 0.0)) throw ConfigError("step must be > 0");
  if (opt.patience < 1) throw ConfigError("patience must be >= 1");
  if (opt.max_iters < 0) throw ConfigError("max_iters must be >= 0");
  Problem pb;
  pb.train = &data.train;
  pb.heldout = data.heldout ? &*data.heldout : nullptr;
  pb.fam = fam;
  pb.p = data.train.n_features();
  pb.spec = spec.resolved(data.train.n_obs(), pb.p);
  pb.g = pb.spec.n_hyper();
  pb.pen = cfg.resolve(data.train.n_obs());
  pb.fit_intercept = opt.fit_intercept;
  pb.fit_aux = opt.estimate_aux && fam.has_aux();
  pb.scale = static_cast<double>(data.train.n_obs()) / pb.pen.tau;
  return pb;
}

ParamState initial_state(const Problem& pb, const std::optional<ParamState>& init) {
  ParamState s = init ? *init : ParamState::initial(pb.p, pb.g);
  if (s.beta.size() != pb.p || s.lam.size() != pb.p) {
    throw DimensionError("initial state has " + std::to_string(s.beta.size()) +
                         " coefficients, model has " + std::to_string(pb.p));
  }
  if (s.gamma.size() != pb.g) s.gamma = Eigen::VectorXd::Ones(pb.g);
  if ((s.lam.array() <= 0.0).any()) throw DomainError("initial penalty weights must be > 0");
  if (!pb.fit_intercept) s.intercept = 0.0;
  if (pb.fit_aux) {
    if (!s.log_aux) s.log_aux = std::log(pb.fam.aux);
  } else {
    s.log_aux.reset();
  }
  return s;
}

bool state_finite(const ParamState& s) {
  return s.beta.allFinite() && s.lam.allFinite() && s.gamma.allFinite() &&
         std::isfinite(s.intercept) && (!s.log_aux || std::isfinite(*s.log_aux)) &&
         (s.lam.array() > 0.0).all() && (s.gamma.array() > 0.0).all();
}

double penalty_terms(const Problem& pb, const ParamState& s) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < pb.p; ++j) {
    total += s.lam[j] * std::abs(s.beta[j]) - pb.pen.a * std::log(s.lam[j]);
  }
  return total - log_prior(pb.spec, s.lam, s.gamma) / pb.pen.tau;
}

double objective_value(const Problem& pb, const ParamState& s, double nll_mean) {
  return pb.scale * nll_mean + penalty_terms(pb, s);
}

kernels::Eval eval_full(const Problem& pb, const ParamState& s, bool with_grad) {
  return kernels::omp::evaluate(effective_family(pb.fam, s), *pb.train, s.beta, s.intercept,
                                with_grad);
}

double heldout_nll(const Problem& pb, const ParamState& s) {
  return kernels::omp::evaluate(effective_family(pb.fam, s), *pb.heldout, s.beta, s.intercept,
                                false)
      .value;
}

// Writes the data part of the smooth gradient (beta, intercept, log aux).
void data_grad(const Problem& pb, const kernels::Eval& ev, Eigen::VectorXd& g) {
  g.head(pb.p) = pb.scale * ev.grad;
  g[pb.off_b()] = pb.fit_intercept ? pb.scale * ev.grad_intercept : 0.0;
  g[pb.off_aux()] = pb.fit_aux ? pb.scale * ev.grad_log_aux : 0.0;
}

// Writes the prior part (lam, log gamma).
void prior_grad(const Problem& pb, const ParamState& s, Eigen::VectorXd& g) {
  const PriorGradient pg = grad_log_prior(pb.spec, s.lam, s.gamma);
  g.segment(pb.off_lam(), pb.p) = -pg.lam / pb.pen.tau;
  g.segment(pb.off_u(), pb.g) = -(pg.gamma.array() * s.gamma.array()).matrix() / pb.pen.tau;
}

struct Adam {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  Eigen::VectorXd steps;
  Eigen::VectorXd direction;
  int t = 0;
  double b1, b2, eps, lr;

  Adam(Eigen::Index dim, const OptimizerConfig& opt)
      : m(Eigen::VectorXd::Zero(dim)),
        v(Eigen::VectorXd::Zero(dim)),
        steps(dim),
        direction(dim),
        b1(opt.adam_beta1),
        b2(opt.adam_beta2),
        eps(opt.adam_eps),
        lr(opt.step) {}

  // `g` drives the step and the first moment, `gv` the second moment.
  void update(const Eigen::VectorXd& g, const Eigen::VectorXd& gv) {
    ++t;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * gv.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    direction = m / c1;
    steps = (lr / ((v / c2).array().sqrt() + eps)).matrix();
  }
};

// Second-moment input: the smooth gradient, except that lam coordinates also
// carry the derivative of lam|beta| - a log(lam), which is smooth in lam.
void scale_gradient(const Problem& pb, const ParamState& s, const Eigen::VectorXd& g,
                    Eigen::VectorXd& gv) {
  gv = g;
  gv.segment(pb.off_lam(), pb.p).array() += s.beta.array().abs() - pb.pen.a / s.lam.array();
}

// Preconditioned smooth step followed by the prox; returns the largest change.
double apply_step(const Problem& pb, ParamState& s, const Adam& adam) {
  const Eigen::Index p = pb.p;
  Eigen::VectorXd beta = s.beta - adam.steps.head(p).cwiseProduct(adam.direction.head(p));
  Eigen::VectorXd lam = s.lam - adam.steps.segment(pb.off_lam(), p)
                                    .cwiseProduct(adam.direction.segment(pb.off_lam(), p));
  prox_joint_inplace(beta, lam, adam.steps.head(p), adam.steps.segment(pb.off_lam(), p),
                     pb.pen.a);
  double delta = 0.0;
  if (p > 0) {
    delta = std::max((beta - s.beta).cwiseAbs().maxCoeff(), (lam - s.lam).cwiseAbs().maxCoeff());
  }
  s.beta = std::move(beta);
  s.lam = std::move(lam);
  if (pb.g > 0) {
    const Eigen::VectorXd du = adam.steps.segment(pb.off_u(), pb.g)
                                   .cwiseProduct(adam.direction.segment(pb.off_u(), pb.g));
    s.gamma = (s.gamma.array().log() - du.array()).exp().matrix();
    delta = std::max(delta, du.cwiseAbs().maxCoeff());
  }
  if (pb.fit_intercept) {
    const double d = adam.steps[pb.off_b()] * adam.direction[pb.off_b()];
    s.intercept -= d;
    delta = std::max(delta, std::abs(d));
  }
  if (pb.fit_aux) {
    const double d = adam.steps[pb.off_aux()] * adam.direction[pb.off_aux()];
    *s.log_aux -= d;
    delta = std::max(delta, std::abs(d));
  }
  return delta;
}

// Early stopping bookkeeping. The best state is kept on any improvement; the
// patience counter only resets on an improvement larger than min_delta.
struct Tracker {
  int patience;
  double min_delta;
  double best = std::numeric_limits<double>::infinity();
  double ref = std::numeric_limits<double>::infinity();
  int since = 0;
  int best_iter = 0;
  ParamState best_state;

  Tracker(const OptimizerConfig& opt) : patience(opt.patience), min_delta(opt.min_delta) {}

  bool update(double score, const ParamState& s, int iter) {
    if (score < best) {
      best = score;
      best_state = s;
      best_iter = iter;
    }
    if (score < ref - min_delta) {
      ref = score;
      since = 0;
    } else {
      ++since;
    }
    return since >= patience;
  }
};

void log_progress(const OptimizerConfig& opt, int it, double objective, const double* heldout) {
  if (opt.log_every <= 0 || it % opt.log_every != 0) return;
  if (heldout) {
    std::fprintf(stderr, "iter %d objective %.10g heldout_nll %.10g\n", it, objective, *heldout);
  } else {
    std::fprintf(stderr, "iter %d objective %.10g\n", it, objective);
  }
}

FitResult finish(const Problem& pb, FitResult res, const Tracker& tr) {
  res.state = tr.best_state;
  res.best_iteration = tr.best_iter;
  res.train_nll = eval_full(pb, res.state, false).value;
  if (pb.heldout) res.heldout_nll = heldout_nll(pb, res.state);
  return res;
}

[[noreturn]] void diverged(const ParamState& last, int it) {
  throw DivergedError("objective became non-finite at iteration " + std::to_string(it), last, it);
}

}  // namespace

FitResult fit(const FitData& data, const LikelihoodFamily& fam, const PriorSpec& spec,
              const PenaltyConfig& cfg, const OptimizerConfig& opt,
              const std::optional<ParamState>& init) {
  const Problem pb = make_problem(data, fam, spec, cfg, opt);
  ParamState x = initial_state(pb, init);
  ParamState last = x;
  Adam adam(pb.dim(), opt);
  Tracker tr(opt);
  FitResult res;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(pb.dim());
  Eigen::VectorXd gv(pb.dim());
  bool converged = false;
  int it = 0;
  for (;; ++it) {
    const kernels::Eval ev = eval_full(pb, x, true);
    const double f = objective_value(pb, x, ev.value);
    if (!std::isfinite(f)) diverged(last, it);
    res.objective_trace.push_back(f);
    double score = f;
    if (pb.heldout) {
      score = heldout_nll(pb, x);
      res.heldout_trace.push_back(score);
    }
    log_progress(opt, it, f, pb.heldout ? &score : nullptr);
    if (tr.update(score, x, it)) {
      res.converged_reason = StopReason::patience;
      break;
    }
    if (converged) {
      res.converged_reason = StopReason::tolerance;
      break;
    }
    if (it >= opt.max_iters) {
      res.converged_reason = StopReason::max_iters;
      break;
    }
    data_grad(pb, ev, g);
    prior_grad(pb, x, g);
    scale_gradient(pb, x, g, gv);
    adam.update(g, gv);
    last = x;
    const double delta = apply_step(pb, x, adam);
    if (!state_finite(x)) diverged(last, it + 1);
    converged = opt.tol > 0.0 && delta <= opt.tol;
  }
  res.iterations = it;
  return finish(pb, std::move(res), tr);
}

FitResult fit_svrg(const FitData& data, const LikelihoodFamily& fam, const PriorSpec& spec,
                   const PenaltyConfig& cfg, const OptimizerConfig& opt,
                   const std::optional<ParamState>& init) {
  const Problem pb = make_problem(data, fam, spec, cfg, opt);
  const Eigen::Index n = data.train.n_obs();
  if (opt.minibatch < 1 || opt.minibatch > n) {
    throw ConfigError("minibatch must be in [1, N]; got " + std::to_string(opt.minibatch));
  }
  const Eigen::Index batch = opt.minibatch;
  const Eigen::Index epoch = opt.svrg_epoch > 0 ? opt.svrg_epoch : (n + batch - 1) / batch;

  ParamState x = initial_state(pb, init);
  ParamState last = x;
  Adam adam(pb.dim(), opt);
  Tracker tr(opt);
  FitResult res;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(pb.dim());
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(pb.dim());
  Eigen::VectorXd gb = Eigen::VectorXd::Zero(pb.dim());
  Eigen::VectorXd ga = Eigen::VectorXd::Zero(pb.dim());
  Eigen::VectorXd gv(pb.dim());

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(opt.seed);
  std::size_t cursor = perm.size();
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(batch));
  auto next_batch = [&] {
    for (auto& r : rows) {
      if (cursor == perm.size()) {
        std::shuffle(perm.begin(), perm.end(), rng);
        cursor = 0;
      }
      r = perm[cursor++];
    }
  };

  bool converged = false;
  bool done = false;
  int it = 0;
  while (!done) {
    const ParamState anchor = x;
    const kernels::Eval ev = eval_full(pb, anchor, true);
    const double f = objective_value(pb, anchor, ev.value);
    if (!std::isfinite(f)) diverged(last, it);
    res.objective_trace.push_back(f);
    mu.setZero();
    data_grad(pb, ev, mu);
    const LikelihoodFamily fam_anchor = effective_family(pb.fam, anchor);

    for (Eigen::Index k = 0; k < epoch; ++k) {
      bool scored = false;
      double score = f;
      if (pb.heldout) {
        score = heldout_nll(pb, x);
        res.heldout_trace.push_back(score);
        scored = true;
      } else if (k == 0) {
        scored = true;
      }
      if (k == 0) log_progress(opt, it, f, pb.heldout ? &score : nullptr);
      if (scored && tr.update(score, x, it)) {
        res.converged_reason = StopReason::patience;
        done = true;
        break;
      }
      if (converged) {
        res.converged_reason = StopReason::tolerance;
        done = true;
        break;
      }
      if (it >= opt.max_iters) {
        res.converged_reason = StopReason::max_iters;
        done = true;
        break;
      }
      if (k == 0) {
        // x is the anchor, so the correction cancels exactly.
        g = mu;
      } else {
        next_batch();
        const auto ex = kernels::omp::evaluate_rows(effective_family(pb.fam, x), *pb.train, rows,
                                                    x.beta, x.intercept, true);
        const auto ea = kernels::omp::evaluate_rows(fam_anchor, *pb.train, rows, anchor.beta,
                                                    anchor.intercept, true);
        data_grad(pb, ex, gb);
        data_grad(pb, ea, ga);
        g = gb - ga + mu;
      }
      prior_grad(pb, x, g);
      scale_gradient(pb, x, g, gv);
      adam.update(g, gv);
      last = x;
      const double delta = apply_step(pb, x, adam);
      ++it;
      if (!state_finite(x)) diverged(last, it);
      converged = opt.tol > 0.0 && delta <= opt.tol;
    }
  }
  res.iterations = it;
  return finish(pb, std::move(res), tr);
}

FitResult run_fit(const FitData& data, const LikelihoodFamily& fam, const PriorSpec& spec,
                  const PenaltyConfig& cfg, const OptimizerConfig& opt,
                  const std::optional<ParamState>& init) {
  switch (opt.mode) {
    case Mode::full_batch: return fit(data, fam, spec, cfg, opt, init);
    case Mode::svrg: return fit_svrg(data, fam, spec, cfg, opt, init);
    case Mode::bcd_reweighted:
      if (spec.kind != PriorKind::independent_half_cauchy) {
        throw ConfigError("bcd mode supports the independent prior only");
      }
      return fit_bcd_reweighted(data, fam, cfg, opt, init);
  }
  throw ConfigError("unknown mode");
}

namespace {

// Smooth part over (beta, lam, intercept) with gamma and aux frozen, flattened
// as beta | lam | intercept.
struct PlainSmooth {
  const LinearModelData& data;
  LikelihoodFamily fam;
  PriorSpec spec;
  ResolvedPenalty pen;
  Eigen::VectorXd gamma;
  bool fit_intercept;
  double scale;
  Eigen::Index p;

  Eigen::VectorXd grad(const Eigen::VectorXd& z) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * p + 1);
    const auto ev = kernels::omp::evaluate(fam, data, z.head(p), z[2 * p], true);
    g.head(p) = scale * ev.grad;
    g.segment(p, p) = -grad_log_prior(spec, z.segment(p, p), gamma).lam / pen.tau;
    g[2 * p] = fit_intercept ? scale * ev.grad_intercept : 0.0;
    return g;
  }

  double objective(const Eigen::VectorXd& z) const {
    const double loss = kernels::omp::evaluate(fam, data, z.head(p), z[2 * p], false).value;
    double pen_sum = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      pen_sum += z[p + j] * std::abs(z[j]) - pen.a * std::log(z[p + j]);
    }
    return scale * loss + pen_sum - log_prior(spec, z.segment(p, p), gamma) / pen.tau;
  }
};

PlainSmooth make_plain(const LinearModelData& data, const LikelihoodFamily& fam,
                       const PriorSpec& spec, const PenaltyConfig& cfg, const ParamState& s,
                       bool fit_intercept) {
  validate(fam, data);
  const Eigen::Index p = data.n_features();
  PriorSpec rs = spec.resolved(data.n_obs(), p);
  const ResolvedPenalty pen = cfg.resolve(data.n_obs());
  Eigen::VectorXd gamma = s.gamma.size() == rs.n_hyper() ? s.gamma : Eigen::VectorXd::Ones(rs.n_hyper());
  return PlainSmooth{data,          effective_family(fam, s), std::move(rs),
                     pen,           std::move(gamma),         fit_intercept,
                     static_cast<double>(data.n_obs()) / pen.tau, p};
}

Eigen::VectorXd flatten(const ParamState& s, Eigen::Index p) {
  Eigen::VectorXd z(2 * p + 1);
  z << s.beta, s.lam, s.intercept;
  return z;
}

double power_iteration(const PlainSmooth& f, const Eigen::VectorXd& z, int iters) {
  const Eigen::Index d = z.size();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(d) / std::sqrt(static_cast<double>(d));
  if (!f.fit_intercept) v[d - 1] = 0.0;
  v.normalize();
  // Keep z +- h v inside lam > 0.
  double lam_min = f.p > 0 ? z.segment(f.p, f.p).minCoeff() : 1.0;
  const double h = std::min(1e-5 * std::max(1.0, z.cwiseAbs().maxCoeff()), 0.5 * lam_min);
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd hv = (f.grad(z + h * v) - f.grad(z - h * v)) / (2.0 * h);
    if (!f.fit_intercept) hv[d - 1] = 0.0;
    const double norm = hv.norm();
    if (!(norm > 0.0)) return 0.0;
    const double next = norm;
    v = hv / norm;
    if (k > 5 && std::abs(next - est) <= 1e-8 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return est;
}

}  // namespace

double estimate_smooth_lipschitz(const LinearModelData& data, const LikelihoodFamily& fam,
                                 const PriorSpec& spec, const PenaltyConfig& cfg,
                                 const ParamState& state, bool fit_intercept, int iters) {
  const PlainSmooth f = make_plain(data, fam, spec, cfg, state, fit_intercept);
  return power_iteration(f, flatten(state, f.p), iters);
}

DescentReport descent_check(const LinearModelData& data, const LikelihoodFamily& fam,
                            const PriorSpec& spec, const PenaltyConfig& cfg, double step,
                            int iters, const std::optional<ParamState>& init,
                            bool fit_intercept) {
  if (!(step > 0.0)) throw InvalidStepError("descent_check step must be > 0");
  const Eigen::Index p = data.n_features();
  ParamState s0 = init ? *init : ParamState::initial(p, 0);
  const PlainSmooth f = make_plain(data, fam, spec, cfg, s0, fit_intercept);
  Eigen::VectorXd z = flatten(s0, p);
  const Eigen::VectorXd steps = Eigen::VectorXd::Constant(p, step);
  DescentReport rep;
  double fz = f.objective(z);
  rep.trace.push_back(fz);
  for (int k = 0; k < iters; ++k) {
    const Eigen::VectorXd g = f.grad(z);
    Eigen::VectorXd beta = z.head(p) - step * g.head(p);
    Eigen::VectorXd lam = z.segment(p, p) - step * g.segment(p, p);
    prox_joint_inplace(beta, lam, steps, steps, f.pen.a);
    z.head(p) = beta;
    z.segment(p, p) = lam;
    z[2 * p] -= step * g[2 * p];
    const double next = f.objective(z);
    rep.trace.push_back(next);
    const double increase = next - fz;
    if (!std::isfinite(next) || increase > 1e-12 * std::max(1.0, std::abs(fz))) {
      rep.passed = false;
      ++rep.violations;
      rep.worst_increase = std::max(rep.worst_increase, std::isfinite(next) ? increase
                                                                             : std::numeric_limits<double>::infinity());
    }
    fz = next;
  }
  return rep;
}

}  // namespace palasso
