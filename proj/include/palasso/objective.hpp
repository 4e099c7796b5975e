#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "palasso/likelihood.hpp"
#include "palasso/prior.hpp"

namespace palasso {

/// Everything the optimizer moves: coefficients, their penalty weights, group
/// hyperparameters and the unpenalized extras (intercept, log of the family's
/// aux parameter when it is estimated).
struct ParamState {
  Eigen::VectorXd beta;
  Eigen::VectorXd lam;
  Eigen::VectorXd gamma;
  double intercept = 0.0;
  std::optional<double> log_aux;

  /// beta = 0, lam = 1, gamma = 1.
  static ParamState initial(Eigen::Index n_coef, Eigen::Index n_hyper);
};

/// Family with aux replaced by exp(state.log_aux) when the state carries one.
LikelihoodFamily effective_family(const LikelihoodFamily& fam, const ParamState& state);

struct ResolvedPenalty {
  double tau = 1.0;
  double a = 1.0;  // coefficient of -log(lam) in the tau-divided objective
};

/// Global penalty strength. With `per_observation` set, `tau` is a multiplier c
/// and the strength used is c * N for N training rows (tau = 0.025N style).
/// barrier_a defaults to 1/tau.
struct PenaltyConfig {
  double tau = 1.0;
  bool per_observation = false;
  std::optional<double> barrier_a;

  ResolvedPenalty resolve(Eigen::Index n_obs) const;
};

/// Joint MAP objective divided through by tau:
///
///   (N/tau) nll(beta) + sum_p [lam_p |beta_p| - a log lam_p] - (1/tau) log p(lam, gamma)
///
/// with nll the mean over the N rows of `data`. Multiplying by tau recovers
/// N*nll + sum_p [tau lam_p |beta_p| - log lam_p] - log p(lam, gamma) when a = 1/tau.
double joint_objective(const ParamState& state, const PenaltyConfig& cfg, const PriorSpec& spec,
                       const LikelihoodFamily& fam, const LinearModelData& data);

/// Same, with tau and a already resolved and the prior already resolved.
double joint_objective(const ParamState& state, const ResolvedPenalty& pen, const PriorSpec& spec,
                       const LikelihoodFamily& fam, const LinearModelData& data);

/// rho(lam) = -log p(lam) of a scalar penalty-weight prior with two derivatives.
struct ScalarPrior {
  std::function<double(double)> rho;
  std::function<double(double)> drho;
  std::function<double(double)> d2rho;

  static ScalarPrior half_cauchy();
  static ScalarPrior exponential(double rate);
};

/// g_tau(|beta|) = min_{lam > 0} tau lam |beta| - log lam + rho(lam).
struct ProfiledPenalty {
  double tau = 1.0;
  ScalarPrior prior = ScalarPrior::half_cauchy();
};

/// Minimizing lam: the root of lam (tau|beta| + rho'(lam)) = 1, by bisection.
double lambda_star(const ProfiledPenalty& pp, double abs_beta);

struct PenaltyValue {
  double g = 0.0;
  double gprime = 0.0;
  double gsecond = 0.0;
};

/// g, g' = tau lam*, g'' = tau dlam*/d|beta| = -tau^2 / (1/lam*^2 + rho''(lam*)).
PenaltyValue penalty_value_grad(const ProfiledPenalty& pp, double abs_beta);

/// Root of 1/lam = rho'(lam); the origin threshold is tau * lambda_a.
double lambda_a(const ProfiledPenalty& pp);

/// (|beta|, |beta| + g'(|beta|)) over the grid.
std::vector<std::pair<double, double>> threshold_map(const ProfiledPenalty& pp,
                                                     std::span<const double> grid);

}  // namespace palasso
