#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace palasso {

/// Possibly overlapping assignment of predictors to groups. Predictors may
/// belong to no group, one group, or several.
class GroupStructure {
 public:
  GroupStructure() = default;

  /// `memberships[p]` lists the groups of predictor p. Every group index in
  /// [0, n_groups) must be used at least once.
  GroupStructure(std::vector<std::vector<Eigen::Index>> memberships, Eigen::Index n_groups);

  /// From (predictor, group) pairs; duplicates are ignored.
  static GroupStructure from_pairs(Eigen::Index n_predictors,
                                   const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs);

  /// Contiguous blocks 0..size-1, size..2size-1, ...; n_predictors % size == 0.
  static GroupStructure contiguous(Eigen::Index n_predictors, Eigen::Index size);

  /// Reads `predictor_index,group_index` lines (0-based). Blank lines, lines
  /// starting with '#' and a non-numeric header line are skipped.
  static GroupStructure read(std::istream& in, Eigen::Index n_predictors);
  static GroupStructure load(const std::string& path, Eigen::Index n_predictors);
  void write(std::ostream& out) const;

  Eigen::Index n_predictors() const { return static_cast<Eigen::Index>(memberships_.size()); }
  Eigen::Index n_groups() const { return static_cast<Eigen::Index>(members_.size()); }
  const std::vector<Eigen::Index>& groups_of(Eigen::Index p) const {
    return memberships_[static_cast<std::size_t>(p)];
  }
  const std::vector<Eigen::Index>& members(Eigen::Index g) const {
    return members_[static_cast<std::size_t>(g)];
  }

  /// Every predictor in exactly one group.
  bool is_partition() const;

 private:
  std::vector<std::vector<Eigen::Index>> memberships_;
  std::vector<std::vector<Eigen::Index>> members_;
};

}  // namespace palasso
