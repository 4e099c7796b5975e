#include "palasso/objective.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "palasso/error.hpp"
#include "palasso/kernels.hpp"

namespace palasso {

ParamState ParamState::initial(Eigen::Index n_coef, Eigen::Index n_hyper) {
  ParamState s;
  s.beta = Eigen::VectorXd::Zero(n_coef);
  s.lam = Eigen::VectorXd::Ones(n_coef);
  s.gamma = Eigen::VectorXd::Ones(n_hyper);
  return s;
}

LikelihoodFamily effective_family(const LikelihoodFamily& fam, const ParamState& state) {
  LikelihoodFamily out = fam;
  if (state.log_aux && fam.has_aux()) out.aux = std::exp(*state.log_aux);
  return out;
}

ResolvedPenalty PenaltyConfig::resolve(Eigen::Index n_obs) const {
  ResolvedPenalty r;
  r.tau = per_observation ? tau * static_cast<double>(n_obs) : tau;
  if (!(r.tau > 0.0) || !std::isfinite(r.tau)) throw ConfigError("tau must be finite and > 0");
  r.a = barrier_a.value_or(1.0 / r.tau);
  if (!(r.a > 0.0) || !std::isfinite(r.a)) throw ConfigError("barrier coefficient must be > 0");
  return r;
}

double joint_objective(const ParamState& state, const ResolvedPenalty& pen, const PriorSpec& spec,
                       const LikelihoodFamily& fam, const LinearModelData& data) {
  const Eigen::Index p = state.beta.size();
  if (state.lam.size() != p) throw DimensionError("beta and lam lengths differ");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(state.lam[j] > 0.0)) throw DomainError("penalty weights must be > 0");
  }
  const double n = static_cast<double>(data.n_obs());
  const double loss = nll(effective_family(fam, state), data, state.beta, state.intercept);
  double pen_sum = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    pen_sum += state.lam[j] * std::abs(state.beta[j]) - pen.a * std::log(state.lam[j]);
  }
  return n / pen.tau * loss + pen_sum - log_prior(spec, state.lam, state.gamma) / pen.tau;
}

double joint_objective(const ParamState& state, const PenaltyConfig& cfg, const PriorSpec& spec,
                       const LikelihoodFamily& fam, const LinearModelData& data) {
  return joint_objective(state, cfg.resolve(data.n_obs()),
                         spec.resolved(data.n_obs(), state.beta.size()), fam, data);
}

ScalarPrior ScalarPrior::half_cauchy() {
  return ScalarPrior{
      [](double l) { return std::log(std::numbers::pi / 2.0) + std::log1p(l * l); },
      [](double l) { return 2.0 * l / (1.0 + l * l); },
      [](double l) {
        const double d = 1.0 + l * l;
        return 2.0 * (1.0 - l * l) / (d * d);
      }};
}

ScalarPrior ScalarPrior::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential rate must be > 0");
  return ScalarPrior{[rate](double l) { return -std::log(rate) + rate * l; },
                     [rate](double) { return rate; }, [](double) { return 0.0; }};
}

namespace {

// Bisection for an increasing residual with f(lo) < 0 < f(hi); runs to the
// resolution of double.
template <class F>
double bisect(F&& f, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

}  // namespace

double lambda_star(const ProfiledPenalty& pp, double abs_beta) {
  if (!(abs_beta >= 0.0)) throw DomainError("lambda_star needs |beta| >= 0");
  if (!(pp.tau > 0.0)) throw DomainError("lambda_star needs tau > 0");
  constexpr double eps = 1e-12;
  const double slope = pp.tau * abs_beta;
  auto resid = [&](double l) { return l * (slope + pp.prior.drho(l)) - 1.0; };
  const double lo = eps;
  double hi = std::max(10.0, 2.0 / (slope + eps));
  for (int k = 0; k < 60 && resid(hi) <= 0.0; ++k) hi *= 2.0;
  if (!(resid(lo) < 0.0) || !(resid(hi) > 0.0)) {
    std::ostringstream msg;
    msg << "lambda_star: no sign change on [" << lo << ", " << hi << "] (residuals " << resid(lo)
        << ", " << resid(hi) << ") for tau=" << pp.tau << " |beta|=" << abs_beta;
    throw NumericalError(msg.str());
  }
  const double l = bisect(resid, lo, hi);
  if (std::abs(resid(l)) > 1e-10) {
    throw NumericalError("lambda_star: residual " + std::to_string(resid(l)) + " above 1e-10");
  }
  return l;
}

PenaltyValue penalty_value_grad(const ProfiledPenalty& pp, double abs_beta) {
  const double l = lambda_star(pp, abs_beta);
  PenaltyValue v;
  v.g = pp.tau * l * abs_beta - std::log(l) + pp.prior.rho(l);
  v.gprime = pp.tau * l;
  v.gsecond = -pp.tau * pp.tau / (1.0 / (l * l) + pp.prior.d2rho(l));
  return v;
}

double lambda_a(const ProfiledPenalty& pp) {
  auto resid = [&](double l) { return l * pp.prior.drho(l) - 1.0; };
  const double lo = 1e-12;
  const double hi = 1e12;
  if (!(resid(lo) < 0.0) || !(resid(hi) > 0.0)) {
    throw NumericalError(
        "lambda_a: 1/lam = rho'(lam) has no bracketed root; the prior's rho must be increasing");
  }
  return bisect(resid, lo, hi);
}

std::vector<std::pair<double, double>> threshold_map(const ProfiledPenalty& pp,
                                                     std::span<const double> grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (const double b : grid) {
    if (!(b >= 0.0)) throw DomainError("threshold_map grid must be nonnegative");
    out.emplace_back(b, b + penalty_value_grad(pp, b).gprime);
  }
  return out;
}

}  // namespace palasso
