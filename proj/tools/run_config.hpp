#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "palasso/design.hpp"
#include "palasso/likelihood.hpp"
#include "palasso/optimizer.hpp"
#include "palasso/path.hpp"
#include "palasso/prior.hpp"

namespace palasso::cli {

/// Penalty strength as written by the user: "0.025N" is per observation.
struct TauValue {
  double value = 0.025;
  bool per_observation = true;
};

TauValue parse_tau(std::string_view text);
std::vector<TauValue> parse_tau_grid(std::string_view text);
std::string format_tau(const TauValue& t);

struct RunConfig {
  DesignSpec design{"", "y", true, true, false};
  FamilyKind family = FamilyKind::gaussian;
  double aux = 1.0;
  PriorKind prior = PriorKind::independent_half_cauchy;
  std::string groups_path;
  std::optional<double> group_scale;
  std::optional<double> softmax_temp;
  TauValue tau;
  std::optional<double> barrier_a;
  OptimizerConfig optimizer;
  std::optional<std::vector<TauValue>> tau_grid;
  PathConfig path;
};

/// Applies a JSON config on top of `cfg`. Unknown keys and wrong types throw
/// ConfigError naming the offending key.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
void apply_json_file(RunConfig& cfg, const std::string& path);

/// JSON view of a config (same layout apply_json reads).
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace palasso::cli
