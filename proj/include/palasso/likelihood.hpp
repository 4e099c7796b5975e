#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>

#include "palasso/expansion.hpp"

namespace palasso {

enum class FamilyKind { gaussian, bernoulli_logit, poisson_log, negbin_log, cauchy };

std::string_view to_string(FamilyKind kind);
FamilyKind parse_family(std::string_view name);

/// Regression family with its auxiliary scale: Gaussian noise sd, Negative
/// Binomial overdispersion alpha (variance mu + mu^2/alpha) or Cauchy scale.
/// Bernoulli and Poisson ignore aux.
struct LikelihoodFamily {
  FamilyKind kind = FamilyKind::gaussian;
  double aux = 1.0;

  bool has_aux() const {
    return kind == FamilyKind::gaussian || kind == FamilyKind::negbin_log ||
           kind == FamilyKind::cauchy;
  }
};

/// Design, response and optional observation weights. When `expansion` is set,
/// X holds the base columns and the model sees the second-order columns, built
/// per block as needed.
struct LinearModelData {
  RowMatrix X;
  Eigen::VectorXd y;
  Eigen::VectorXd weights;  // empty: unit weights
  std::optional<ExpansionMap> expansion;

  Eigen::Index n_obs() const { return X.rows(); }
  Eigen::Index n_features() const {
    return expansion ? expansion->expanded_size() : X.cols();
  }
  double weight(Eigen::Index i) const { return weights.size() ? weights[i] : 1.0; }
};

/// Gradient of the mean NLL. `log_aux` is the derivative with respect to
/// log(aux) (zero for families without aux).
struct NllGradient {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double log_aux = 0.0;
};

/// Throws DataError / DimensionError when the data cannot be used with `fam`.
void validate(const LikelihoodFamily& fam, const LinearModelData& data);

/// Mean negative log-likelihood (1/N) sum_i w_i l(y_i; x_i'beta + intercept),
/// including normalizing constants such as log(y!).
double nll(const LikelihoodFamily& fam, const LinearModelData& data,
           const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept = 0.0);

NllGradient grad_nll(const LikelihoodFamily& fam, const LinearModelData& data,
                     const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept = 0.0);

/// Worst coordinate-wise discrepancy between grad_nll and central differences
/// with step h, over beta, the intercept and, when `with_aux`, log(aux).
/// Error per coordinate is |fd - g| / max(|g|, |fd|, 1e-2).
double finite_diff_check(const LikelihoodFamily& fam, const LinearModelData& data,
                         const Eigen::Ref<const Eigen::VectorXd>& beta, double h,
                         double intercept = 0.0, bool with_aux = false);

}  // namespace palasso
