#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "palasso/groups.hpp"
#include "palasso/likelihood.hpp"

namespace palasso {

struct DesignSpec {
  std::string source;
  std::string response_column;
  bool standardize = true;
  bool intercept = true;  // unpenalized; kept outside X
  bool second_order = false;
};

/// Column means and population sds of the base columns as loaded. Constant
/// columns are centered only and flagged.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::vector<bool> constant;
  bool applied = false;
};

struct Dataset {
  LinearModelData data;
  bool intercept = true;
  std::vector<std::string> base_names;
  std::string response_name;
  Standardization scaling;

  /// One name per model coefficient: base names, then "a^2", then "a:b".
  std::vector<std::string> coefficient_names() const;
};

Dataset load_csv(const DesignSpec& spec);
/// As load_csv, reading from a stream; `spec.source` is used in messages only.
Dataset read_csv(std::istream& in, const DesignSpec& spec);

/// Centers and scales the columns of X in place.
Standardization standardize_columns(RowMatrix& X);

/// Maps coefficients on the standardized base columns back to the original
/// scale; `intercept` is adjusted in place. Requires a model without
/// expansion (second-order terms do not map back column by column).
Eigen::VectorXd to_original_scale(const Eigen::Ref<const Eigen::VectorXd>& beta,
                                  const Standardization& scaling, double& intercept);

/// One group per unordered pair (i, j) of base columns holding both mains,
/// both squares and the interaction, laid out as in ExpansionMap.
GroupStructure hierarchical_groups(Eigen::Index base_size);

}  // namespace palasso
