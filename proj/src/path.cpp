#include "palasso/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace palasso {

std::vector<double> default_tau_grid(int n, double lo, double hi) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw ConfigError("bad tau grid request");
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double step = std::log(lo / hi) / (n - 1);
  for (int k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = hi * std::exp(step * k);
  grid.back() = lo;
  return grid;
}

std::vector<double> rolling_median(const std::vector<double>& traj, int window) {
  if (window < 1 || window % 2 == 0) throw ConfigError("median window must be odd and positive");
  if (static_cast<std::size_t>(window) > traj.size()) {
    throw ConfigError("median window longer than the sequence");
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(traj.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<double> out(traj.size());
  std::vector<double> buf;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    buf.clear();
    for (std::ptrdiff_t k = i - h; k <= i + h; ++k) {
      if (!std::isnan(traj[static_cast<std::size_t>(k)])) buf.push_back(traj[static_cast<std::size_t>(k)]);
    }
    if (buf.empty()) {
      out[static_cast<std::size_t>(i)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    double m = *mid;
    if (buf.size() % 2 == 0) {
      m = 0.5 * (m + *std::max_element(buf.begin(), mid));
    }
    out[static_cast<std::size_t>(i)] = m;
  }
  return out;
}

PathResult run_path(const LinearModelData& data, const LikelihoodFamily& fam,
                    const PriorSpec& spec, const OptimizerConfig& opt, const PathConfig& pcfg) {
  const auto& grid = pcfg.tau_grid;
  if (grid.empty()) throw ConfigError("empty tau grid");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0)) throw ConfigError("tau grid values must be > 0");
  }
  if (grid.size() > 1) {
    const bool up = grid[1] > grid[0];
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if ((grid[k] > grid[k - 1]) != up || grid[k] == grid[k - 1]) {
        throw ConfigError("tau grid must be strictly monotone");
      }
    }
  }
  if (pcfg.median_window < 1 || pcfg.median_window % 2 == 0) {
    throw ConfigError("median window must be odd and positive");
  }
  if (!(pcfg.holdout_fraction >= 0.0 && pcfg.holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must be in [0, 1)");
  }

  const auto n_hold = static_cast<Eigen::Index>(
      std::floor(pcfg.holdout_fraction * static_cast<double>(data.n_obs())));
  const FitData split = split_holdout(data, n_hold, opt.seed);
  const FitData train_only{split.train, std::nullopt};
  const Eigen::Index p = data.n_features();
  const auto t = static_cast<Eigen::Index>(grid.size());

  PathResult res;
  res.coef = Eigen::MatrixXd::Constant(t, p, std::numeric_limits<double>::quiet_NaN());
  res.intercept = Eigen::VectorXd::Constant(t, std::numeric_limits<double>::quiet_NaN());
  std::optional<ParamState> prev;
  for (Eigen::Index k = 0; k < t; ++k) {
    PenaltyConfig cfg{grid[static_cast<std::size_t>(k)], pcfg.per_observation, pcfg.barrier_a};
    PathPoint pt;
    pt.tau_input = cfg.tau;
    pt.tau = cfg.resolve(split.train.n_obs()).tau;
    std::optional<ParamState> init;
    if (pcfg.warm_start && prev) {
      init = prev;
      if (pcfg.reset_gamma) init->gamma.setOnes();
    }
    pt.cold_start = !init.has_value();
    try {
      const FitResult fr = pcfg.heldout_early_stop ? run_fit(split, fam, spec, cfg, opt, init)
                                                   : run_fit(train_only, fam, spec, cfg, opt, init);
      pt.iterations = fr.iterations;
      pt.reason = fr.converged_reason;
      pt.nonzero = (fr.state.beta.array() != 0.0).count();
      pt.train_nll = fr.train_nll;
      pt.heldout_nll = std::numeric_limits<double>::quiet_NaN();
      if (split.heldout) {
        pt.heldout_nll = nll(effective_family(fam, fr.state), *split.heldout, fr.state.beta,
                             fr.state.intercept);
      }
      res.coef.row(k) = fr.state.beta.transpose();
      res.intercept[k] = fr.state.intercept;
      res.states.push_back(fr.state);
      prev = fr.state;
    } catch (const DivergedError& e) {
      pt.failed = true;
      pt.error = e.what();
      res.states.push_back(e.last_state());
      prev.reset();
    } catch (const NumericalError& e) {
      pt.failed = true;
      pt.error = e.what();
      res.states.emplace_back();
      prev.reset();
    }
    res.points.push_back(std::move(pt));
  }

  res.smoothed = res.coef;
  if (t >= pcfg.median_window) {
    std::vector<double> col(static_cast<std::size_t>(t));
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index k = 0; k < t; ++k) col[static_cast<std::size_t>(k)] = res.coef(k, j);
      const auto sm = rolling_median(col, pcfg.median_window);
      for (Eigen::Index k = 0; k < t; ++k) res.smoothed(k, j) = sm[static_cast<std::size_t>(k)];
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < t; ++k) {
    const auto& pt = res.points[static_cast<std::size_t>(k)];
    const double score = split.heldout ? pt.heldout_nll : pt.train_nll;
    if (!pt.failed && score < best) {
      best = score;
      res.selected = k;
    }
  }
  if (res.selected >= 0) res.selected_tau = res.points[static_cast<std::size_t>(res.selected)].tau;
  return res;
}

void write_path_csv(std::ostream& out, const PathResult& res,
                    const std::vector<std::string>& names, bool smoothed) {
  const Eigen::MatrixXd& m = smoothed ? res.smoothed : res.coef;
  out << "tau,tau_per_obs,nonzero,train_nll,heldout_nll,iterations,stop,status,selected,intercept";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < res.points.size(); ++k) {
    const auto& pt = res.points[k];
    const auto row = static_cast<Eigen::Index>(k);
    const Eigen::Index nnz = smoothed ? (m.row(row).array() != 0.0).count() : pt.nonzero;
    out << pt.tau << ',' << pt.tau_input << ',' << nnz << ',' << pt.train_nll << ','
        << pt.heldout_nll << ',' << pt.iterations << ',' << to_string(pt.reason) << ','
        << (pt.failed ? "failed" : (pt.cold_start ? "cold" : "warm")) << ','
        << (row == res.selected ? 1 : 0) << ',' << res.intercept[row];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << m(row, j);
    out << '\n';
  }
}

}  // namespace palasso
