#include "palasso/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "palasso/error.hpp"

namespace palasso {
namespace {

constexpr double kLogTwoOverPi = -0.45158270528945482;  // log(2/pi)

double log_std_normal_cdf(double t) { return std::log(0.5 * std::erfc(-t / std::numbers::sqrt2)); }

double log_std_normal_pdf(double z) { return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi); }

void check_inputs(const PriorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& lam,
                  const Eigen::Ref<const Eigen::VectorXd>& gamma) {
  for (Eigen::Index p = 0; p < lam.size(); ++p) {
    if (!(lam[p] > 0.0) || !std::isfinite(lam[p])) {
      throw DomainError("penalty weights must be finite and > 0 (index " + std::to_string(p) + ")");
    }
  }
  if (spec.kind == PriorKind::independent_half_cauchy) return;
  if (!spec.groups) throw ConfigError("group prior requires a group structure");
  if (!spec.group_scale || (spec.kind == PriorKind::overlapping_group && !spec.softmax_temp)) {
    throw ConfigError("prior spec not resolved; call PriorSpec::resolved()");
  }
  if (lam.size() != spec.groups->n_predictors()) {
    throw DimensionError("penalty weight count does not match group structure");
  }
  if (gamma.size() != spec.groups->n_groups()) {
    throw DimensionError("hyperparameter count does not match group count");
  }
  for (Eigen::Index g = 0; g < gamma.size(); ++g) {
    if (!(gamma[g] > 0.0) || !std::isfinite(gamma[g])) {
      throw DomainError("group hyperparameters must be finite and > 0");
    }
  }
}

// Softmin weights of the hyperparameters listed in `idx`; returns the softmin.
double softmin_weights(const std::vector<Eigen::Index>& idx,
                       const Eigen::Ref<const Eigen::VectorXd>& gamma, double temp,
                       std::vector<double>& w) {
  w.resize(idx.size());
  double lo = gamma[idx[0]];
  for (const Eigen::Index g : idx) lo = std::min(lo, gamma[g]);
  double z = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    w[k] = std::exp(-(gamma[idx[k]] - lo) / temp);
    z += w[k];
  }
  double m = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    w[k] /= z;
    m += w[k] * gamma[idx[k]];
  }
  return m;
}

}  // namespace

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::independent_half_cauchy: return "independent";
    case PriorKind::sparse_group: return "sparse_group";
    case PriorKind::overlapping_group: return "overlapping_group";
  }
  return "unknown";
}

PriorKind parse_prior(std::string_view name) {
  if (name == "independent" || name == "independent_half_cauchy") {
    return PriorKind::independent_half_cauchy;
  }
  if (name == "sparse_group" || name == "group") return PriorKind::sparse_group;
  if (name == "overlapping_group" || name == "overlapping" || name == "hierarchical") {
    return PriorKind::overlapping_group;
  }
  throw ConfigError("unknown prior '" + std::string(name) + "'");
}

PriorSpec PriorSpec::resolved(Eigen::Index n_obs, Eigen::Index n_pred) const {
  PriorSpec out = *this;
  if (kind == PriorKind::independent_half_cauchy) return out;
  if (!groups || groups->n_groups() == 0) {
    throw ConfigError(std::string(to_string(kind)) + " prior needs a non-empty group structure");
  }
  if (groups->n_predictors() != n_pred) {
    throw ConfigError("group structure covers " + std::to_string(groups->n_predictors()) +
                      " predictors, model has " + std::to_string(n_pred));
  }
  if (kind == PriorKind::sparse_group && !groups->is_partition()) {
    throw ConfigError("sparse_group prior needs disjoint groups covering every predictor");
  }
  if (!out.group_scale) out.group_scale = 1.0 / std::sqrt(static_cast<double>(n_obs));
  if (!out.softmax_temp) out.softmax_temp = std::sqrt(static_cast<double>(n_pred));
  if (!(*out.group_scale > 0.0) || !(*out.softmax_temp > 0.0)) {
    throw ConfigError("group_scale and softmax_temp must be > 0");
  }
  return out;
}

double log_half_cauchy(double x) { return kLogTwoOverPi - std::log1p(x * x); }

double smooth_min(std::span<const double> gamma, double temp) {
  if (gamma.empty()) throw DomainError("smooth_min of an empty set");
  if (!(temp > 0.0)) throw DomainError("smooth_min temperature must be > 0");
  const Eigen::Map<const Eigen::VectorXd> g(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
  std::vector<Eigen::Index> idx(gamma.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<Eigen::Index>(k);
  std::vector<double> w;
  return softmin_weights(idx, g, temp, w);
}

double log_prior(const PriorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& lam,
                 const Eigen::Ref<const Eigen::VectorXd>& gamma) {
  check_inputs(spec, lam, gamma);
  double total = 0.0;
  if (spec.kind == PriorKind::independent_half_cauchy) {
    for (Eigen::Index p = 0; p < lam.size(); ++p) total += log_half_cauchy(lam[p]);
    return total;
  }
  const GroupStructure& gs = *spec.groups;
  const double s = *spec.group_scale;
  for (Eigen::Index g = 0; g < gamma.size(); ++g) total += log_half_cauchy(gamma[g]);
  std::vector<double> w;
  for (Eigen::Index p = 0; p < lam.size(); ++p) {
    const auto& gp = gs.groups_of(p);
    if (gp.empty()) {
      total += log_half_cauchy(lam[p]);
    } else if (spec.kind == PriorKind::sparse_group) {
      const double mu = gamma[gp.front()];
      total += log_std_normal_pdf((lam[p] - mu) / s) - std::log(s) - log_std_normal_cdf(mu / s);
    } else {
      const double m = softmin_weights(gp, gamma, *spec.softmax_temp, w);
      const double r = (lam[p] - m) / s;
      total += -std::log(std::numbers::pi * s) - std::log1p(r * r);
    }
  }
  return total;
}

PriorGradient grad_log_prior(const PriorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& lam,
                             const Eigen::Ref<const Eigen::VectorXd>& gamma) {
  check_inputs(spec, lam, gamma);
  PriorGradient out{Eigen::VectorXd::Zero(lam.size()), Eigen::VectorXd::Zero(gamma.size())};
  auto half_cauchy_slope = [](double x) { return -2.0 * x / (1.0 + x * x); };
  if (spec.kind == PriorKind::independent_half_cauchy) {
    for (Eigen::Index p = 0; p < lam.size(); ++p) out.lam[p] = half_cauchy_slope(lam[p]);
    return out;
  }
  const GroupStructure& gs = *spec.groups;
  const double s = *spec.group_scale;
  const double s2 = s * s;
  for (Eigen::Index g = 0; g < gamma.size(); ++g) out.gamma[g] = half_cauchy_slope(gamma[g]);
  std::vector<double> w;
  for (Eigen::Index p = 0; p < lam.size(); ++p) {
    const auto& gp = gs.groups_of(p);
    if (gp.empty()) {
      out.lam[p] = half_cauchy_slope(lam[p]);
    } else if (spec.kind == PriorKind::sparse_group) {
      const Eigen::Index g = gp.front();
      const double mu = gamma[g];
      const double t = mu / s;
      const double mills = std::exp(log_std_normal_pdf(t) - log_std_normal_cdf(t));
      out.lam[p] = -(lam[p] - mu) / s2;
      out.gamma[g] += (lam[p] - mu) / s2 - mills / s;
    } else {
      const double temp = *spec.softmax_temp;
      const double m = softmin_weights(gp, gamma, temp, w);
      const double d = lam[p] - m;
      const double slope = 2.0 * d / (s2 + d * d);
      out.lam[p] = -slope;
      for (std::size_t k = 0; k < gp.size(); ++k) {
        const Eigen::Index g = gp[k];
        out.gamma[g] += slope * w[k] * (1.0 - (gamma[g] - m) / temp);
      }
    }
  }
  return out;
}

}  // namespace palasso
