#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string_view>

#include "palasso/groups.hpp"

namespace palasso {

enum class PriorKind { independent_half_cauchy, sparse_group, overlapping_group };

std::string_view to_string(PriorKind kind);
PriorKind parse_prior(std::string_view name);

/// Prior on the penalty weights.
///
///  independent:  lam_p ~ C+(0, 1)
///  sparse_group: gamma_g ~ C+(0, 1),  lam_p | gamma ~ N+(gamma_g(p), group_scale)
///  overlapping:  gamma_g ~ C+(0, 1),  lam_p | gamma ~ C(m_p, group_scale),
///                m_p = softmin over gamma_g(p) with temperature softmax_temp.
///
/// group_scale defaults to 1/sqrt(N) and softmax_temp to sqrt(P); both are
/// filled in by resolved(). A predictor in no group gets the independent term.
struct PriorSpec {
  PriorKind kind = PriorKind::independent_half_cauchy;
  std::optional<GroupStructure> groups;
  std::optional<double> group_scale;
  std::optional<double> softmax_temp;

  Eigen::Index n_hyper() const {
    return kind == PriorKind::independent_half_cauchy || !groups ? 0 : groups->n_groups();
  }

  /// Copy with defaults filled for n_obs observations and n_pred predictors.
  /// Also validates the group structure against the kind.
  PriorSpec resolved(Eigen::Index n_obs, Eigen::Index n_pred) const;
};

double log_prior(const PriorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& lam,
                 const Eigen::Ref<const Eigen::VectorXd>& gamma);

struct PriorGradient {
  Eigen::VectorXd lam;
  Eigen::VectorXd gamma;
};

/// Gradient of log_prior with respect to lam and gamma.
PriorGradient grad_log_prior(const PriorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& lam,
                             const Eigen::Ref<const Eigen::VectorXd>& gamma);

/// softmax(-gamma/temp)' gamma; lies in [min gamma, max gamma].
double smooth_min(std::span<const double> gamma, double temp);

/// log density of the half-Cauchy C+(0, 1) at x >= 0.
double log_half_cauchy(double x);

}  // namespace palasso
