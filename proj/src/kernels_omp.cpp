#include <algorithm>
#include <vector>

#include "palasso/error.hpp"
#include "palasso/kernels.hpp"

namespace palasso::kernels {
namespace {

struct Partial {
  double value = 0.0;
  double gint = 0.0;
  double gaux = 0.0;
  Eigen::VectorXd grad;
};

// xc: chunk rows in model space (already expanded if needed).
void accumulate(const LikelihoodFamily& fam, const Eigen::Ref<const RowMatrix>& xc,
                const double* y, const double* w, const Eigen::Ref<const Eigen::VectorXd>& beta,
                double intercept, bool with_grad, Partial& out) {
  const Eigen::Index m = xc.rows();
  Eigen::VectorXd eta = xc * beta;
  Eigen::VectorXd d(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double wi = w ? w[i] : 1.0;
    const PointLoss pl = point_loss(fam, eta[i] + intercept, y[i]);
    out.value += wi * pl.value;
    d[i] = wi * pl.d_eta;
    out.gaux += wi * pl.d_log_aux;
  }
  if (with_grad) {
    out.grad.noalias() = xc.transpose() * d;
    out.gint = d.sum();
  }
}

Eval reduce(std::vector<Partial>& parts, Eigen::Index n_features, Eigen::Index n_rows,
            bool with_grad) {
  Eval ev;
  if (with_grad) ev.grad = Eigen::VectorXd::Zero(n_features);
  for (const Partial& p : parts) {
    ev.value += p.value;
    if (with_grad) {
      ev.grad += p.grad;
      ev.grad_intercept += p.gint;
      ev.grad_log_aux += p.gaux;
    }
  }
  const double inv = 1.0 / static_cast<double>(n_rows);
  ev.value *= inv;
  if (with_grad) {
    ev.grad *= inv;
    ev.grad_intercept *= inv;
    ev.grad_log_aux *= inv;
  }
  return ev;
}

void check_beta(const LinearModelData& data, const Eigen::Ref<const Eigen::VectorXd>& beta) {
  if (beta.size() != data.n_features()) {
    throw DimensionError("coefficient length " + std::to_string(beta.size()) +
                         " != model columns " + std::to_string(data.n_features()));
  }
}

}  // namespace

namespace omp {

Eval evaluate(const LikelihoodFamily& fam, const LinearModelData& data,
              const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept, bool with_grad) {
  check_beta(data, beta);
  const Eigen::Index n = data.n_obs();
  if (n == 0) throw DataError("no observations to evaluate");
  const Eigen::Index n_chunks = (n + kChunkRows - 1) / kChunkRows;
  std::vector<Partial> parts(static_cast<std::size_t>(n_chunks));
  const double* w = data.weights.size() ? data.weights.data() : nullptr;

#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < n_chunks; ++c) {
    const Eigen::Index start = c * kChunkRows;
    const Eigen::Index len = std::min(kChunkRows, n - start);
    Partial& part = parts[static_cast<std::size_t>(c)];
    const double* wc = w ? w + start : nullptr;
    if (data.expansion) {
      const RowMatrix xe = data.expansion->expand_rows(data.X.middleRows(start, len));
      accumulate(fam, xe, data.y.data() + start, wc, beta, intercept, with_grad, part);
    } else {
      accumulate(fam, data.X.middleRows(start, len), data.y.data() + start, wc, beta, intercept,
                 with_grad, part);
    }
  }
  return reduce(parts, data.n_features(), n, with_grad);
}

Eval evaluate_rows(const LikelihoodFamily& fam, const LinearModelData& data,
                   std::span<const Eigen::Index> rows,
                   const Eigen::Ref<const Eigen::VectorXd>& beta, double intercept,
                   bool with_grad) {
  check_beta(data, beta);
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw DataError("no observations to evaluate");
  for (const Eigen::Index r : rows) {
    if (r < 0 || r >= data.n_obs()) throw DimensionError("row index out of range");
  }
  const Eigen::Index n_chunks = (n + kChunkRows - 1) / kChunkRows;
  std::vector<Partial> parts(static_cast<std::size_t>(n_chunks));
  const Eigen::Index base_cols = data.X.cols();

#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < n_chunks; ++c) {
    const Eigen::Index start = c * kChunkRows;
    const Eigen::Index len = std::min(kChunkRows, n - start);
    RowMatrix xc(len, base_cols);
    Eigen::VectorXd yc(len);
    Eigen::VectorXd wc(data.weights.size() ? len : 0);
    for (Eigen::Index i = 0; i < len; ++i) {
      const Eigen::Index r = rows[static_cast<std::size_t>(start + i)];
      xc.row(i) = data.X.row(r);
      yc[i] = data.y[r];
      if (wc.size()) wc[i] = data.weights[r];
    }
    Partial& part = parts[static_cast<std::size_t>(c)];
    const double* wp = wc.size() ? wc.data() : nullptr;
    if (data.expansion) {
      accumulate(fam, data.expansion->expand_rows(xc), yc.data(), wp, beta, intercept, with_grad,
                 part);
    } else {
      accumulate(fam, xc, yc.data(), wp, beta, intercept, with_grad, part);
    }
  }
  return reduce(parts, data.n_features(), n, with_grad);
}

}  // namespace omp
}  // namespace palasso::kernels
