#include "palasso/prox.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "palasso/error.hpp"

namespace palasso {
namespace {

void check_steps(const ProxInput& in) {
  if (!(in.s_beta > 0.0) || !(in.s_lam > 0.0) || !std::isfinite(in.s_beta) ||
      !std::isfinite(in.s_lam)) {
    throw InvalidStepError("proximal step sizes must be finite and > 0 (s_beta=" +
                           std::to_string(in.s_beta) + ", s_lam=" + std::to_string(in.s_lam) +
                           ")");
  }
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// Positive root of lam^2 - lam0*lam - c = 0 for c > 0, written to avoid
// cancellation when lam0 is large and negative.
double positive_root(double lam0, double c) {
  const double disc = std::sqrt(lam0 * lam0 + 4.0 * c);
  if (lam0 >= 0.0) return 0.5 * (lam0 + disc);
  return 2.0 * c / (disc - lam0);
}

}  // namespace

double sto(double x, double s, double lam) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw InvalidStepError("soft thresholding step must be > 0, got " + std::to_string(s));
  }
  if (!(lam >= 0.0)) throw DomainError("soft thresholding weight must be >= 0");
  const double mag = std::abs(x) - s * lam;
  return mag > 0.0 ? sign(x) * mag : 0.0;
}

double prox_cost(const ProxInput& in, double beta, double lam) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (in.a > 0.0 ? !(lam > 0.0) : !(lam >= 0.0)) return inf;
  const double db = beta - in.beta0;
  const double dl = lam - in.lam0;
  double cost = lam * std::abs(beta) + db * db / (2.0 * in.s_beta) + dl * dl / (2.0 * in.s_lam);
  if (in.a > 0.0) cost -= in.a * std::log(lam);
  return cost;
}

ProxOutput prox_vp(const ProxInput& in) {
  check_steps(in);
  if (in.a != 0.0) throw RegimeError("prox_vp handles a == 0 only; use prox_vp_log");
  const double abs_b0 = std::abs(in.beta0);
  const double b = in.s_beta * in.s_lam;
  double lam = 0.0;
  if (b < 1.0) {
    if (in.lam0 * in.s_beta >= abs_b0) {
      lam = in.lam0;
    } else {
      lam = std::max(in.lam0 - in.s_lam * abs_b0, 0.0) / (1.0 - b);
    }
  } else {
    // Ties go to lam0, which zeroes beta.
    lam = (in.lam0 / std::sqrt(in.s_lam) >= abs_b0 / std::sqrt(in.s_beta)) ? in.lam0 : 0.0;
  }
  ProxOutput out;
  out.lam_star = lam;
  out.beta_star = sto(in.beta0, in.s_beta, lam);
  out.cost = prox_cost(in, out.beta_star, out.lam_star);
  return out;
}

double reduced_prox(double lam0, double aa, double b) {
  if (!(b > 0.0 && b < 1.0)) {
    throw RegimeError("reduced_prox requires 0 < b < 1, got b=" + std::to_string(b));
  }
  if (!(aa >= 0.0)) throw DomainError("reduced_prox requires aa >= 0");
  if (lam0 >= aa) return lam0;
  return std::max(lam0 - aa * b, 0.0) / (1.0 - b);
}

ProxOutput prox_vp_log(const ProxInput& in) {
  check_steps(in);
  if (!(in.a > 0.0) || !std::isfinite(in.a)) {
    throw RegimeError("prox_vp_log requires a > 0; use prox_vp for a == 0");
  }
  const double abs_b0 = std::abs(in.beta0);

  // beta = 0: stationarity in lam alone.
  ProxOutput best;
  best.beta_star = 0.0;
  best.lam_star = positive_root(in.lam0, in.a * in.s_lam);
  best.cost = prox_cost(in, 0.0, best.lam_star);

  if (abs_b0 == 0.0) return best;

  // beta != 0 with sgn(beta) = sgn(beta0):
  //   (1 - s_beta s_lam) lam^2 + (s_lam |beta0| - lam0) lam - a s_lam = 0.
  const double qa = 1.0 - in.s_beta * in.s_lam;
  const double qb = in.s_lam * abs_b0 - in.lam0;
  const double qc = -in.a * in.s_lam;
  double roots[2];
  int n_roots = 0;
  if (qa == 0.0) {
    if (qb != 0.0) roots[n_roots++] = -qc / qb;
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      if (q != 0.0) {
        roots[n_roots++] = q / qa;
        roots[n_roots++] = qc / q;
      }
    }
  }
  for (int k = 0; k < n_roots; ++k) {
    const double lam = roots[k];
    if (!std::isfinite(lam) || !(lam > 0.0)) continue;
    const double mag = abs_b0 - in.s_beta * lam;
    if (!(mag > 0.0)) continue;
    const double beta = sign(in.beta0) * mag;
    const double cost = prox_cost(in, beta, lam);
    if (cost < best.cost) best = ProxOutput{beta, lam, cost};
  }
  return best;
}

ProxOutput prox_joint(const ProxInput& in) { return in.a > 0.0 ? prox_vp_log(in) : prox_vp(in); }

void prox_joint_inplace(Eigen::Ref<Eigen::VectorXd> beta, Eigen::Ref<Eigen::VectorXd> lam,
                        const Eigen::Ref<const Eigen::VectorXd>& s_beta,
                        const Eigen::Ref<const Eigen::VectorXd>& s_lam, double a) {
  const Eigen::Index n = beta.size();
  if (lam.size() != n || s_beta.size() != n || s_lam.size() != n) {
    throw DimensionError("prox_joint_inplace: length mismatch");
  }
  // Nothing may throw inside the parallel region.
  if (!(a >= 0.0) || !std::isfinite(a)) throw RegimeError("barrier coefficient must be >= 0");
  for (Eigen::Index p = 0; p < n; ++p) check_steps(ProxInput{0.0, 0.0, s_beta[p], s_lam[p], a});
#pragma omp parallel for schedule(static) if (n > 8192)
  for (Eigen::Index p = 0; p < n; ++p) {
    const ProxOutput out = prox_joint(ProxInput{beta[p], lam[p], s_beta[p], s_lam[p], a});
    beta[p] = out.beta_star;
    lam[p] = out.lam_star;
  }
}

}  // namespace palasso
