#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "palasso/design.hpp"
#include "palasso/groups.hpp"
#include "palasso/likelihood.hpp"

namespace palasso {

enum class Structure { independent, group, hierarchical };

std::string_view to_string(Structure s);
Structure parse_structure(std::string_view name);

/// Synthetic regression problem: X iid N(0, 1), nonzero coefficients iid
/// N(0, coef_scale^2), response drawn from the family at the true predictor.
///
///  independent:  n_active of the p coefficients are nonzero
///  group:        p/group_size contiguous groups, n_active of them nonzero
///  hierarchical: p base columns, second-order model, n_active pair groups
///                (both mains, both squares and the product) nonzero
struct SynthSpec {
  FamilyKind family = FamilyKind::gaussian;
  Structure structure = Structure::independent;
  Eigen::Index n = 1000;
  Eigen::Index p = 100;
  Eigen::Index n_active = 10;
  Eigen::Index group_size = 5;
  std::uint64_t seed = 0;
  /// Gaussian noise sd, NegBin alpha or Cauchy scale.
  double aux = 1.0;
  double coef_scale = 1.0;
  double intercept = 0.0;
};

struct SynthResult {
  Dataset dataset;  // X as drawn (not standardized), response "y"
  Eigen::VectorXd true_beta;
  std::optional<GroupStructure> groups;
};

SynthResult generate(const SynthSpec& spec);

/// Header x0..x{P-1},y and full-precision values.
void write_dataset_csv(std::ostream& out, const Dataset& ds);

/// Columns index,name,true_beta.
void write_truth_csv(std::ostream& out, const SynthResult& sr);

}  // namespace palasso
