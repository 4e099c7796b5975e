#pragma once

#include <Eigen/Core>

namespace palasso {

/// One (beta, lambda) block of the variable-penalty proximal problem
///
///   argmin_{beta, lam}  lam*|beta| - a*log(lam)
///                       + (beta - beta0)^2 / (2 s_beta) + (lam - lam0)^2 / (2 s_lam)
///
/// over lam >= 0 when a == 0 and lam > 0 when a > 0.
struct ProxInput {
  double beta0 = 0.0;
  double lam0 = 0.0;
  double s_beta = 1.0;
  double s_lam = 1.0;
  double a = 0.0;
};

struct ProxOutput {
  double beta_star = 0.0;
  double lam_star = 0.0;
  double cost = 0.0;
};

/// Soft thresholding: (|x| - s*lam)^+ sgn(x).
double sto(double x, double s, double lam);

/// Proximal cost of `in` evaluated at (beta, lam). Returns +inf for lam <= 0
/// when a > 0 and for lam < 0 when a == 0.
double prox_cost(const ProxInput& in, double beta, double lam);

/// Closed-form prox of lam*|beta| (no barrier, requires in.a == 0).
///
/// For s_beta*s_lam < 1 the penalty weight is lam0 when lam0 >= |beta0|/s_beta and
/// (lam0 - s_lam|beta0|)^+ / (1 - s_beta s_lam) otherwise. For s_beta*s_lam >= 1 it is
/// lam0 if lam0/sqrt(s_lam) >= |beta0|/sqrt(s_beta) and 0 otherwise; at equality both
/// points are optimal and lam0 (sparse beta) is returned. lam_star == 0 is legal.
ProxOutput prox_vp(const ProxInput& in);

/// The penalty-weight map of prox_vp as a function of lam0, aa = |beta0|/s_beta
/// and b = s_beta*s_lam, defined for 0 < b < 1.
double reduced_prox(double lam0, double aa, double b);

/// Prox of lam*|beta| - a*log(lam), a > 0. Every stationary point is enumerated
/// (beta = 0 with the positive root of lam^2 - lam0*lam - a*s_lam = 0, plus the
/// sign-consistent roots of the nonzero-beta quadratic) and the cheapest is
/// returned. lam_star > 0 for every input, including lam0 < 0.
ProxOutput prox_vp_log(const ProxInput& in);

/// Dispatches to prox_vp (a == 0) or prox_vp_log (a > 0).
ProxOutput prox_joint(const ProxInput& in);

/// Applies prox_joint coordinate-wise, in place. Steps are per coordinate.
void prox_joint_inplace(Eigen::Ref<Eigen::VectorXd> beta, Eigen::Ref<Eigen::VectorXd> lam,
                        const Eigen::Ref<const Eigen::VectorXd>& s_beta,
                        const Eigen::Ref<const Eigen::VectorXd>& s_lam, double a);

}  // namespace palasso
