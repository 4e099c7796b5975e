#include "palasso/expansion.hpp"

#include <string>

#include "palasso/error.hpp"

namespace palasso {

ExpansionMap::ExpansionMap(Eigen::Index base_size) : base_(base_size) {
  if (base_size < 1) throw DomainError("expansion needs at least one base column");
  terms_.reserve(static_cast<std::size_t>(expanded_count(base_size)));
  for (Eigen::Index i = 0; i < base_; ++i) terms_.push_back({TermKind::main, i, i});
  for (Eigen::Index i = 0; i < base_; ++i) terms_.push_back({TermKind::quadratic, i, i});
  for (Eigen::Index i = 0; i < base_; ++i) {
    for (Eigen::Index j = i + 1; j < base_; ++j) terms_.push_back({TermKind::interaction, i, j});
  }
}

Eigen::Index ExpansionMap::interaction_index(Eigen::Index i, Eigen::Index j) const {
  if (i > j) std::swap(i, j);
  if (i == j || i < 0 || j >= base_) throw DomainError("interaction needs 0 <= i < j < P");
  // Pairs before row i: sum_{k<i} (P-1-k).
  const Eigen::Index before = i * (2 * base_ - i - 1) / 2;
  return 2 * base_ + before + (j - i - 1);
}

void ExpansionMap::expand_row(const double* xrow, double* out) const {
  const Eigen::Index p = base_;
  for (Eigen::Index i = 0; i < p; ++i) out[i] = xrow[i];
  for (Eigen::Index i = 0; i < p; ++i) out[p + i] = xrow[i] * xrow[i];
  double* dst = out + 2 * p;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double xi = xrow[i];
    for (Eigen::Index j = i + 1; j < p; ++j) *dst++ = xi * xrow[j];
  }
}

RowMatrix ExpansionMap::expand_rows(const Eigen::Ref<const RowMatrix>& block) const {
  if (block.cols() != base_) {
    throw DimensionError("expand_rows: block has " + std::to_string(block.cols()) +
                         " columns, expected " + std::to_string(base_));
  }
  RowMatrix out(block.rows(), expanded_size());
  for (Eigen::Index r = 0; r < block.rows(); ++r) expand_row(block.row(r).data(), out.row(r).data());
  return out;
}

Eigen::VectorXd expand_second_order(const Eigen::Ref<const Eigen::VectorXd>& xrow,
                                    const ExpansionMap& map) {
  if (xrow.size() != map.base_size()) {
    throw DimensionError("expand_second_order: row length " + std::to_string(xrow.size()) +
                         " != " + std::to_string(map.base_size()));
  }
  Eigen::VectorXd out(map.expanded_size());
  map.expand_row(xrow.data(), out.data());
  return out;
}

}  // namespace palasso
