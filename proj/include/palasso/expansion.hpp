#pragma once

#include <Eigen/Core>
#include <vector>

namespace palasso {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class TermKind { main, quadratic, interaction };

struct ExpansionTerm {
  TermKind kind = TermKind::main;
  Eigen::Index first = 0;   // parent column
  Eigen::Index second = 0;  // second parent (== first unless interaction)
};

/// Column layout of a full second-order model over P base columns:
/// P mains, then P squares, then the C(P,2) products x_i*x_j (i < j, row-major
/// pair order). Pair (i, j) has the same index among interactions as the group
/// built for it by hierarchical_groups().
class ExpansionMap {
 public:
  explicit ExpansionMap(Eigen::Index base_size);

  static Eigen::Index expanded_count(Eigen::Index base_size) {
    return 2 * base_size + base_size * (base_size - 1) / 2;
  }

  Eigen::Index base_size() const { return base_; }
  Eigen::Index expanded_size() const { return static_cast<Eigen::Index>(terms_.size()); }
  const ExpansionTerm& term(Eigen::Index k) const { return terms_[static_cast<std::size_t>(k)]; }

  /// Index of the interaction column for pair i < j.
  Eigen::Index interaction_index(Eigen::Index i, Eigen::Index j) const;

  /// Writes the expanded row into `out` (length expanded_size()).
  void expand_row(const double* xrow, double* out) const;

  /// Expands every row of a block; only this block is materialized.
  RowMatrix expand_rows(const Eigen::Ref<const RowMatrix>& block) const;

 private:
  Eigen::Index base_;
  std::vector<ExpansionTerm> terms_;
};

Eigen::VectorXd expand_second_order(const Eigen::Ref<const Eigen::VectorXd>& xrow,
                                    const ExpansionMap& map);

}  // namespace palasso
