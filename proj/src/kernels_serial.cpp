#include <string>
#include <vector>

#include "palasso/error.hpp"
#include "palasso/kernels.hpp"

namespace palasso::kernels::serial {
namespace {

Eval run(const LikelihoodFamily& fam, const LinearModelData& data, Eigen::Index n,
         const Eigen::Index* rows, const Eigen::Ref<const Eigen::VectorXd>& beta,
         double intercept, bool with_grad) {
  if (beta.size() != data.n_features()) {
    throw DimensionError("coefficient length " + std::to_string(beta.size()) +
                         " != model columns " + std::to_string(data.n_features()));
  }
  if (n == 0) throw DataError("no observations to evaluate");
  const Eigen::Index p = data.n_features();
  Eval ev;
  if (with_grad) ev.grad = Eigen::VectorXd::Zero(p);
  std::vector<double> xbuf(static_cast<std::size_t>(p));

  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = rows ? rows[k] : k;
    if (r < 0 || r >= data.n_obs()) throw DimensionError("row index out of range");
    const double* x = &data.X(r, 0);
    if (data.expansion) {
      data.expansion->expand_row(x, xbuf.data());
      x = xbuf.data();
    }
    double eta = intercept;
    for (Eigen::Index j = 0; j < p; ++j) eta += x[j] * beta[j];
    const double w = data.weight(r);
    const PointLoss pl = point_loss(fam, eta, data.y[r]);
    ev.value += w * pl.value;
    if (with_grad) {
      const double d = w * pl.d_eta;
      for (Eigen::Index j = 0; j < p; ++j) ev.grad[j] += d * x[j];
      ev.grad_intercept += d;
      ev.grad_log_aux += w * pl.d_log_aux;
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  ev.value *= inv;
  if (with_grad) {
    ev.grad *= inv;
    ev.grad_intercept *= inv;
    ev.grad_log_aux *= inv;
  }
  return ev;
}

}  // namespace

Eval evaluate(const LikelihoodFamily& fam, const LinearModelData& data,
              const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept, bool with_grad) {
  return run(fam, data, data.n_obs(), nullptr, beta, intercept, with_grad);
}

Eval evaluate_rows(const LikelihoodFamily& fam, const LinearModelData& data,
                   std::span<const Eigen::Index> rows,
                   const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept,
                   bool with_grad) {
  return run(fam, data, static_cast<Eigen::Index>(rows.size()), rows.data(), beta, intercept,
             with_grad);
}

}  // namespace palasso::kernels::serial
