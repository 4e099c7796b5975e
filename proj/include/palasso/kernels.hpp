#pragma once

// Per-observation likelihood sums. `omp::` is the production path: rows are cut
// into fixed-size chunks, chunks run in parallel and their partial sums are
// combined in chunk order, so results do not depend on the thread count.
// `serial::` is the row-by-row reference kept for tests and benchmarks.

#include <Eigen/Core>
#include <span>

#include "palasso/likelihood.hpp"

namespace palasso::kernels {

inline constexpr Eigen::Index kChunkRows = 256;

struct PointLoss {
  double value = 0.0;
  double d_eta = 0.0;
  double d_log_aux = 0.0;
};

/// Loss of one observation at linear predictor eta, with derivatives.
PointLoss point_loss(const LikelihoodFamily& fam, double eta, double y);

struct Eval {
  double value = 0.0;  // mean weighted loss over the evaluated rows
  Eigen::VectorXd grad;
  double grad_intercept = 0.0;
  double grad_log_aux = 0.0;
};

namespace omp {
Eval evaluate(const LikelihoodFamily& fam, const LinearModelData& data,
              const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept, bool with_grad);
/// Mean over the listed rows only (minibatches).
Eval evaluate_rows(const LikelihoodFamily& fam, const LinearModelData& data,
                   std::span<const Eigen::Index> rows,
                   const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept,
                   bool with_grad);
}  // namespace omp

namespace serial {
Eval evaluate(const LikelihoodFamily& fam, const LinearModelData& data,
              const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept, bool with_grad);
Eval evaluate_rows(const LikelihoodFamily& fam, const LinearModelData& data,
                   std::span<const Eigen::Index> rows,
                   const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept,
                   bool with_grad);
}  // namespace serial

}  // namespace palasso::kernels
