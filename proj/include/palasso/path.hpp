#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "palasso/optimizer.hpp"

namespace palasso {

struct PathConfig {
  /// Strictly monotone. Read as multiples of N when per_observation is set.
  std::vector<double> tau_grid;
  bool per_observation = true;
  bool warm_start = true;
  bool reset_gamma = true;
  int median_window = 5;
  /// Fraction of rows held out for early stopping and tau selection.
  double holdout_fraction = 0.5;
  /// Early-stop each fit on the held-out rows. Off: every fit runs to
  /// convergence on the training objective and the held-out rows only score
  /// the grid points.
  bool heldout_early_stop = false;
  std::optional<double> barrier_a;
};

/// n points log-spaced from hi down to lo (multiples of N by default: 1 to 1e-3).
std::vector<double> default_tau_grid(int n = 30, double lo = 1e-3, double hi = 1.0);

struct PathPoint {
  double tau_input = 0.0;
  double tau = 0.0;  // resolved strength
  int iterations = 0;
  StopReason reason = StopReason::max_iters;
  Eigen::Index nonzero = 0;
  double train_nll = 0.0;
  double heldout_nll = 0.0;
  bool failed = false;
  bool cold_start = false;
  std::string error;
};

struct PathResult {
  std::vector<PathPoint> points;
  Eigen::MatrixXd coef;      // tau x P; NaN rows for failed points
  Eigen::MatrixXd smoothed;  // column-wise rolling median of coef
  Eigen::VectorXd intercept;
  Eigen::Index selected = -1;
  double selected_tau = 0.0;
  std::vector<ParamState> states;
};

/// Fits the grid in order, each fit starting from the previous state (gamma
/// reset to 1 when reset_gamma). A failed point is recorded and the next one
/// starts cold. Selection is the raw held-out NLL argmin.
PathResult run_path(const LinearModelData& data, const LikelihoodFamily& fam,
                    const PriorSpec& spec, const OptimizerConfig& opt, const PathConfig& pcfg);

/// Centered rolling median; the window shrinks symmetrically at the ends.
/// NaN entries are skipped.
std::vector<double> rolling_median(const std::vector<double>& traj, int window);

/// Columns: tau, tau_per_obs, nonzero, train_nll, heldout_nll, iterations,
/// stop, status, selected, intercept, then one column per coefficient.
void write_path_csv(std::ostream& out, const PathResult& res,
                    const std::vector<std::string>& names, bool smoothed = false);

}  // namespace palasso
