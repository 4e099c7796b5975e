#include "palasso/likelihood.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "palasso/error.hpp"
#include "palasso/kernels.hpp"

namespace palasso {

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::bernoulli_logit: return "bernoulli";
    case FamilyKind::poisson_log: return "poisson";
    case FamilyKind::negbin_log: return "negbin";
    case FamilyKind::cauchy: return "cauchy";
  }
  return "unknown";
}

FamilyKind parse_family(std::string_view name) {
  if (name == "gaussian" || name == "normal") return FamilyKind::gaussian;
  if (name == "bernoulli" || name == "bernoulli_logit" || name == "binomial") {
    return FamilyKind::bernoulli_logit;
  }
  if (name == "poisson" || name == "poisson_log") return FamilyKind::poisson_log;
  if (name == "negbin" || name == "negbin_log" || name == "negative_binomial") {
    return FamilyKind::negbin_log;
  }
  if (name == "cauchy") return FamilyKind::cauchy;
  throw ConfigError("unknown likelihood family '" + std::string(name) + "'");
}

namespace kernels {
namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

PointLoss point_loss(const LikelihoodFamily& fam, double eta, double y) {
  PointLoss out;
  switch (fam.kind) {
    case FamilyKind::gaussian: {
      const double s2 = fam.aux * fam.aux;
      const double r = y - eta;
      out.value = 0.5 * std::log(2.0 * std::numbers::pi) + std::log(fam.aux) + r * r / (2.0 * s2);
      out.d_eta = -r / s2;
      out.d_log_aux = 1.0 - r * r / s2;
      break;
    }
    case FamilyKind::bernoulli_logit:
      out.value = softplus(eta) - y * eta;
      out.d_eta = sigmoid(eta) - y;
      break;
    case FamilyKind::poisson_log: {
      const double mu = std::exp(eta);
      out.value = mu - y * eta + boost::math::lgamma(y + 1.0);
      out.d_eta = mu - y;
      break;
    }
    case FamilyKind::negbin_log: {
      const double alpha = fam.aux;
      const double log_alpha = std::log(alpha);
      const double log_am = log_add_exp(log_alpha, eta);  // log(alpha + mu)
      const double inv_am = std::exp(-log_am);
      out.value = -boost::math::lgamma(y + alpha) + boost::math::lgamma(alpha) +
                  boost::math::lgamma(y + 1.0) + (alpha + y) * log_am - alpha * log_alpha - y * eta;
      out.d_eta = alpha * (sigmoid(eta - log_alpha) - y * inv_am);
      const double d_alpha = -boost::math::digamma(y + alpha) + boost::math::digamma(alpha) +
                             log_am + (alpha + y) * inv_am - log_alpha - 1.0;
      out.d_log_aux = alpha * d_alpha;
      break;
    }
    case FamilyKind::cauchy: {
      const double s = fam.aux;
      const double r = y - eta;
      const double den = s * s + r * r;
      out.value = std::log(std::numbers::pi * s) + std::log1p((r / s) * (r / s));
      out.d_eta = -2.0 * r / den;
      out.d_log_aux = 1.0 - 2.0 * r * r / den;
      break;
    }
  }
  return out;
}

}  // namespace kernels

void validate(const LikelihoodFamily& fam, const LinearModelData& data) {
  if (fam.has_aux() && !(fam.aux > 0.0 && std::isfinite(fam.aux))) {
    throw DomainError(std::string(to_string(fam.kind)) + " needs aux > 0");
  }
  if (data.n_obs() < 1 || data.X.cols() < 1) throw DataError("design must be at least 1x1");
  if (data.y.size() != data.n_obs()) {
    throw DimensionError("response length " + std::to_string(data.y.size()) +
                         " != rows " + std::to_string(data.n_obs()));
  }
  if (data.weights.size() && data.weights.size() != data.n_obs()) {
    throw DimensionError("weights length must match rows");
  }
  if (data.expansion && data.expansion->base_size() != data.X.cols()) {
    throw DimensionError("expansion map does not match design columns");
  }
  if (!data.X.allFinite()) throw DataError("design contains non-finite values");
  for (Eigen::Index i = 0; i < data.n_obs(); ++i) {
    const double y = data.y[i];
    if (!std::isfinite(y)) throw DataError("response contains non-finite values");
    if (data.weights.size() && !(data.weights[i] >= 0.0)) {
      throw DataError("observation weights must be >= 0");
    }
    switch (fam.kind) {
      case FamilyKind::bernoulli_logit:
        if (y != 0.0 && y != 1.0) {
          throw DataError("bernoulli response must be 0 or 1 (row " + std::to_string(i) + ")");
        }
        break;
      case FamilyKind::poisson_log:
      case FamilyKind::negbin_log:
        if (y < 0.0 || y != std::floor(y)) {
          throw DataError("count response must be a nonnegative integer (row " +
                          std::to_string(i) + ")");
        }
        break;
      default: break;
    }
  }
}

double nll(const LikelihoodFamily& fam, const LinearModelData& data,
           const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept) {
  validate(fam, data);
  if (!beta.allFinite() || !std::isfinite(intercept)) throw DomainError("coefficients must be finite");
  return kernels::omp::evaluate(fam, data, beta, intercept, false).value;
}

NllGradient grad_nll(const LikelihoodFamily& fam, const LinearModelData& data,
                     const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept) {
  validate(fam, data);
  if (!beta.allFinite() || !std::isfinite(intercept)) throw DomainError("coefficients must be finite");
  kernels::Eval ev = kernels::omp::evaluate(fam, data, beta, intercept, true);
  NllGradient g;
  g.beta = std::move(ev.grad);
  g.intercept = ev.grad_intercept;
  g.log_aux = fam.has_aux() ? ev.grad_log_aux : 0.0;
  return g;
}

double finite_diff_check(const LikelihoodFamily& fam, const LinearModelData& data,
                         const Eigen::Ref<const Eigen::VectorXd>& beta, double h, double intercept,
                         bool with_aux) {
  if (!(h > 0.0)) throw DomainError("finite difference step must be > 0");
  const NllGradient g = grad_nll(fam, data, beta, intercept);
  auto rel = [](double analytic, double fd) {
    return std::abs(fd - analytic) / std::max({std::abs(analytic), std::abs(fd), 1e-2});
  };
  double worst = 0.0;
  Eigen::VectorXd b = beta;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double saved = b[j];
    b[j] = saved + h;
    const double up = nll(fam, data, b, intercept);
    b[j] = saved - h;
    const double down = nll(fam, data, b, intercept);
    b[j] = saved;
    worst = std::max(worst, rel(g.beta[j], (up - down) / (2.0 * h)));
  }
  {
    const double up = nll(fam, data, b, intercept + h);
    const double down = nll(fam, data, b, intercept - h);
    worst = std::max(worst, rel(g.intercept, (up - down) / (2.0 * h)));
  }
  if (with_aux && fam.has_aux()) {
    LikelihoodFamily hi = fam;
    LikelihoodFamily lo = fam;
    hi.aux = fam.aux * std::exp(h);
    lo.aux = fam.aux * std::exp(-h);
    const double fd = (nll(hi, data, b, intercept) - nll(lo, data, b, intercept)) / (2.0 * h);
    worst = std::max(worst, rel(g.log_aux, fd));
  }
  return worst;
}

}  // namespace palasso
