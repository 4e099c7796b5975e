#include <algorithm>
#include <cmath>
#include <cstdio>

#include "palasso/kernels.hpp"
#include "palasso/optimizer.hpp"
#include "palasso/prox.hpp"

namespace palasso {

Eigen::VectorXd lambda_block_update(const Eigen::Ref<const Eigen::VectorXd>& beta, double eps) {
  if (!(eps > 0.0)) throw DomainError("reweighting eps must be > 0");
  return (1.0 / (beta.array().abs() + eps)).matrix();
}

namespace {

void soft_threshold(Eigen::VectorXd& x, const Eigen::VectorXd& thresh) {
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = sto(x[j], 1.0, thresh[j]);
}

}  // namespace

LassoResult solve_weighted_lasso(const LikelihoodFamily& fam, const LinearModelData& data,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights, double scale,
                                 bool fit_intercept, double tol, int max_iters,
                                 const std::optional<Eigen::VectorXd>& beta0, double intercept0) {
  validate(fam, data);
  const Eigen::Index p = data.n_features();
  if (weights.size() != p) throw DimensionError("one Lasso weight per coefficient is required");
  if ((weights.array() < 0.0).any()) throw DomainError("Lasso weights must be >= 0");
  if (!(scale > 0.0)) throw DomainError("Lasso loss scale must be > 0");
  const Eigen::VectorXd w = weights;

  auto smooth = [&](const Eigen::VectorXd& b, double c, bool g) {
    auto ev = kernels::omp::evaluate(fam, data, b, c, g);
    ev.value *= scale;
    if (g) {
      ev.grad *= scale;
      ev.grad_intercept = fit_intercept ? scale * ev.grad_intercept : 0.0;
    }
    return ev;
  };
  auto penalty = [&](const Eigen::VectorXd& b) { return w.dot(b.cwiseAbs()); };

  Eigen::VectorXd x = beta0 ? *beta0 : Eigen::VectorXd::Zero(p);
  if (x.size() != p) throw DimensionError("Lasso start has the wrong length");
  double xb = fit_intercept ? intercept0 : 0.0;
  Eigen::VectorXd y = x;
  double yb = xb;
  double t = 1.0;
  double lip = 1.0;
  double fx = smooth(x, xb, false).value + penalty(x);

  // One backtracked proximal gradient step from (y, yb).
  auto prox_step = [&](const Eigen::VectorXd& yv, double ybv, Eigen::VectorXd& z, double& zb) {
    const auto ev = smooth(yv, ybv, true);
    for (;;) {
      z = yv - ev.grad / lip;
      soft_threshold(z, w / lip);
      zb = ybv - ev.grad_intercept / lip;
      const Eigen::VectorXd d = z - yv;
      const double db = zb - ybv;
      const double fz = smooth(z, zb, false).value;
      const double bound = ev.value + ev.grad.dot(d) + ev.grad_intercept * db +
                           0.5 * lip * (d.squaredNorm() + db * db);
      if (fz <= bound + 1e-12 * std::abs(ev.value) || lip > 1e300) return fz;
      lip *= 2.0;
    }
  };

  LassoResult res;
  Eigen::VectorXd z(p);
  double zb = 0.0;
  int k = 0;
  for (; k < max_iters; ++k) {
    const double fz = prox_step(y, yb, z, zb) + penalty(z);
    if (fz > fx && (y - x).cwiseAbs().maxCoeff() + std::abs(yb - xb) > 0.0) {
      // Function restart: drop the momentum and retry from x.
      y = x;
      yb = xb;
      t = 1.0;
      continue;
    }
    double change = std::abs(zb - xb);
    if (p > 0) change = std::max(change, (z - x).cwiseAbs().maxCoeff());
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = z + ((t - 1.0) / t_next) * (z - x);
    yb = zb + ((t - 1.0) / t_next) * (zb - xb);
    x = z;
    xb = zb;
    fx = fz;
    t = t_next;
    const double size = std::max(1.0, p > 0 ? x.cwiseAbs().maxCoeff() : 0.0);
    if (change <= tol * size) {
      // Confirm with a plain step from x before stopping.
      Eigen::VectorXd zz(p);
      double zzb = 0.0;
      prox_step(x, xb, zz, zzb);
      double resid = std::abs(zzb - xb);
      if (p > 0) resid = std::max(resid, (zz - x).cwiseAbs().maxCoeff());
      if (resid <= tol * size) break;
      y = x;
      yb = xb;
      t = 1.0;
    }
  }
  res.beta = x;
  res.intercept = xb;
  res.iterations = k;
  res.objective = smooth(x, xb, false).value + penalty(x);
  return res;
}

LassoResult fit_lasso(const LinearModelData& train, const LikelihoodFamily& fam,
                      const PenaltyConfig& cfg, const OptimizerConfig& opt,
                      const std::optional<Eigen::VectorXd>& beta0) {
  const ResolvedPenalty pen = cfg.resolve(train.n_obs());
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(train.n_features());
  return solve_weighted_lasso(fam, train, w, static_cast<double>(train.n_obs()) / pen.tau,
                              opt.fit_intercept, opt.inner_tol, opt.inner_max_iters, beta0);
}

FitResult fit_bcd_reweighted(const FitData& data, const LikelihoodFamily& fam,
                             const PenaltyConfig& cfg, const OptimizerConfig& opt,
                             const std::optional<ParamState>& init) {
  validate(fam, data.train);
  if (data.heldout) validate(fam, *data.heldout);
  const double eps = opt.bcd_eps;
  if (!(eps > 0.0)) throw ConfigError("bcd_eps must be > 0");
  if (opt.bcd_half_steps < 1) throw ConfigError("bcd_half_steps must be >= 1");
  const Eigen::Index p = data.train.n_features();
  const ResolvedPenalty pen = cfg.resolve(data.train.n_obs());
  const double scale = static_cast<double>(data.train.n_obs()) / pen.tau;

  ParamState s = init ? *init : ParamState::initial(p, 0);
  if (s.beta.size() != p || s.lam.size() != p) {
    throw DimensionError("initial state has the wrong number of coefficients");
  }
  s.gamma.resize(0);
  s.log_aux.reset();
  if (!opt.fit_intercept) s.intercept = 0.0;

  auto objective = [&](const ParamState& st, double loss) {
    double total = scale * loss;
    for (Eigen::Index j = 0; j < p; ++j) {
      total += st.lam[j] * std::abs(st.beta[j]) - std::log(st.lam[j]) + eps * st.lam[j];
    }
    return total;
  };

  FitResult res;
  res.converged_reason = StopReason::max_iters;
  bool lam_turn = init && (s.beta.array() != 0.0).any();
  bool stop_after_lam = false;
  const double stop_tol = std::max(opt.tol, 10.0 * opt.inner_tol);
  int h = 0;
  while (h < opt.bcd_half_steps) {
    if (lam_turn) {
      s.lam = lambda_block_update(s.beta, eps);
    } else {
      const LassoResult r = solve_weighted_lasso(fam, data.train, s.lam, scale, opt.fit_intercept,
                                                 opt.inner_tol, opt.inner_max_iters, s.beta,
                                                 s.intercept);
      const double change = p > 0 ? (r.beta - s.beta).cwiseAbs().maxCoeff() : 0.0;
      s.beta = r.beta;
      s.intercept = r.intercept;
      if (h > 0 && change <= stop_tol) stop_after_lam = true;
    }
    ++h;
    const double loss = kernels::omp::evaluate(fam, data.train, s.beta, s.intercept, false).value;
    res.objective_trace.push_back(objective(s, loss));
    if (data.heldout) {
      res.heldout_trace.push_back(
          kernels::omp::evaluate(fam, *data.heldout, s.beta, s.intercept, false).value);
    }
    if (opt.log_every > 0 && h % opt.log_every == 0) {
      std::fprintf(stderr, "block %d objective %.10g\n", h, res.objective_trace.back());
    }
    if (lam_turn && stop_after_lam) {
      res.converged_reason = StopReason::tolerance;
      break;
    }
    lam_turn = !lam_turn;
  }
  res.iterations = h;
  res.best_iteration = h;
  res.state = s;
  res.train_nll = kernels::omp::evaluate(fam, data.train, s.beta, s.intercept, false).value;
  if (data.heldout) {
    res.heldout_nll = kernels::omp::evaluate(fam, *data.heldout, s.beta, s.intercept, false).value;
  }
  return res;
}

}  // namespace palasso
