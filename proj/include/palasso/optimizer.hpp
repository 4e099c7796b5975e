#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "palasso/error.hpp"
#include "palasso/likelihood.hpp"
#include "palasso/objective.hpp"
#include "palasso/prior.hpp"

namespace palasso {

enum class Mode { full_batch, svrg, bcd_reweighted };
enum class StopReason { patience, max_iters, tolerance };

std::string_view to_string(Mode mode);
std::string_view to_string(StopReason reason);
/// Accepts full / full_batch, svrg, bcd / bcd_reweighted.
Mode parse_mode(std::string_view name);

struct OptimizerConfig {
  double step = 1e-2;
  Eigen::Index minibatch = 256;
  int patience = 500;
  /// Held-out rows for early stopping; unset means min(1000, N/10), 0 disables.
  std::optional<Eigen::Index> holdout;
  int max_iters = 20000;
  Mode mode = Mode::full_batch;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  /// A held-out NLL (or objective, without held-out rows) must drop by more than
  /// this to reset the patience counter. The best state is kept on any drop.
  double min_delta = 1e-9;
  /// Stop once no parameter moves by more than tol in an iteration; 0 disables.
  double tol = 1e-10;
  bool fit_intercept = true;
  /// Estimate log(aux) for families that have one.
  bool estimate_aux = true;
  /// SVRG inner steps per anchor; 0 means ceil(N / minibatch).
  Eigen::Index svrg_epoch = 0;
  /// BCD: the eps in lam_p = 1/(|beta_p| + eps).
  double bcd_eps = 1e-3;
  /// BCD: block updates to run (a beta- and a lam-update count one each).
  int bcd_half_steps = 400;
  /// BCD: tolerance of the inner weighted-Lasso solves.
  double inner_tol = 1e-10;
  int inner_max_iters = 100000;
  /// Progress line to stderr every log_every iterations; 0 is silent.
  int log_every = 0;
};

struct FitData {
  LinearModelData train;
  std::optional<LinearModelData> heldout;
};

Eigen::Index default_holdout(Eigen::Index n_obs);

/// Moves n_holdout randomly chosen rows (seeded) into the held-out set.
FitData split_holdout(const LinearModelData& data, Eigen::Index n_holdout, std::uint64_t seed);

/// Split following opt.holdout.
FitData split_for(const LinearModelData& data, const OptimizerConfig& opt);

struct FitResult {
  ParamState state;
  std::vector<double> objective_trace;
  std::vector<double> heldout_trace;
  int iterations = 0;
  int best_iteration = 0;
  StopReason converged_reason = StopReason::max_iters;
  double train_nll = 0.0;
  std::optional<double> heldout_nll;
};

/// Thrown when the objective stops being finite; carries the last finite state.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, ParamState last, int iteration)
      : Error(what), last_(std::move(last)), iteration_(iteration) {}
  const ParamState& last_state() const { return last_; }
  int iteration() const { return iteration_; }

 private:
  ParamState last_;
  int iteration_;
};

/// Full-batch proximal gradient with a diagonal Adam preconditioner. The smooth
/// part (N/tau) nll - (1/tau) log p(lam, gamma) takes a preconditioned step,
/// then every (beta_p, lam_p) pair goes through the log-barrier prox with the
/// same per-coordinate steps. gamma moves on the log scale; the intercept and
/// log(aux) take plain smooth steps.
FitResult fit(const FitData& data, const LikelihoodFamily& fam, const PriorSpec& spec,
              const PenaltyConfig& cfg, const OptimizerConfig& opt,
              const std::optional<ParamState>& init = std::nullopt);

/// SVRG variant: each anchor computes the full gradient, each inner step uses
/// grad_B(x) - grad_B(anchor) + full_grad(anchor) on a minibatch B. The
/// objective trace holds the objective at every anchor.
FitResult fit_svrg(const FitData& data, const LikelihoodFamily& fam, const PriorSpec& spec,
                   const PenaltyConfig& cfg, const OptimizerConfig& opt,
                   const std::optional<ParamState>& init = std::nullopt);

/// Block-coordinate descent on (N/tau) nll + sum_p [lam_p |beta_p| - log lam_p + eps lam_p]:
/// a weighted-Lasso solve for beta, then lam_p = 1/(|beta_p| + eps). Starts with
/// the lam-block when `init` has a nonzero beta, with the beta-block otherwise.
/// The objective trace holds the objective after every block update.
FitResult fit_bcd_reweighted(const FitData& data, const LikelihoodFamily& fam,
                             const PenaltyConfig& cfg, const OptimizerConfig& opt,
                             const std::optional<ParamState>& init = std::nullopt);

/// Dispatches on opt.mode.
FitResult run_fit(const FitData& data, const LikelihoodFamily& fam, const PriorSpec& spec,
                  const PenaltyConfig& cfg, const OptimizerConfig& opt,
                  const std::optional<ParamState>& init = std::nullopt);

/// lam_p = 1/(|beta_p| + eps).
Eigen::VectorXd lambda_block_update(const Eigen::Ref<const Eigen::VectorXd>& beta, double eps);

struct LassoResult {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  int iterations = 0;
  double objective = 0.0;
};

/// argmin over (beta, intercept) of scale * nll + sum_p w_p |beta_p| by
/// accelerated proximal gradient with backtracking and adaptive restart.
LassoResult solve_weighted_lasso(const LikelihoodFamily& fam, const LinearModelData& data,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights, double scale,
                                 bool fit_intercept, double tol, int max_iters,
                                 const std::optional<Eigen::VectorXd>& beta0 = std::nullopt,
                                 double intercept0 = 0.0);

/// Fixed-lam Lasso baseline: lam = 1, i.e. N nll + tau sum |beta|.
LassoResult fit_lasso(const LinearModelData& train, const LikelihoodFamily& fam,
                      const PenaltyConfig& cfg, const OptimizerConfig& opt,
                      const std::optional<Eigen::VectorXd>& beta0 = std::nullopt);

/// Largest |eigenvalue| of the Hessian of the smooth part over (beta, lam,
/// intercept) at `state`, by power iteration on finite-difference
/// Hessian-vector products.
double estimate_smooth_lipschitz(const LinearModelData& data, const LikelihoodFamily& fam,
                                 const PriorSpec& spec, const PenaltyConfig& cfg,
                                 const ParamState& state, bool fit_intercept = true,
                                 int iters = 100);

struct DescentReport {
  bool passed = true;
  int violations = 0;
  double worst_increase = 0.0;
  std::vector<double> trace;
};

/// Plain proximal gradient with one constant step over (beta, lam, intercept),
/// gamma and aux held fixed. Passes when the objective never increases beyond
/// rounding (1e-12 |F|).
DescentReport descent_check(const LinearModelData& data, const LikelihoodFamily& fam,
                            const PriorSpec& spec, const PenaltyConfig& cfg, double step,
                            int iters, const std::optional<ParamState>& init = std::nullopt,
                            bool fit_intercept = true);

}  // namespace palasso
