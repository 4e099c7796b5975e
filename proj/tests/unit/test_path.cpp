#include <doctest.h>

#include <cmath>
#include <sstream>

#include "palasso/path.hpp"
#include "palasso/synth.hpp"

using namespace palasso;

namespace {

PathResult toy_path(std::uint64_t seed, bool warm) {
  const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 400, 50, 5, 5, seed, 1.0, 0.5});
  PathConfig pc;
  pc.tau_grid = default_tau_grid(15, 1e-3, 1.0);
  pc.warm_start = warm;
  OptimizerConfig opt;
  opt.max_iters = 5000;
  return run_path(r.dataset.data, {FamilyKind::gaussian, 1.0}, PriorSpec{}, opt, pc);
}

int total_iterations(const PathResult& res) {
  int t = 0;
  for (const auto& p : res.points) t += p.iterations;
  return t;
}

}  // namespace

TEST_SUITE("pathrunner") {
  TEST_CASE("default grid") {
    const auto g = default_tau_grid();
    REQUIRE(g.size() == 30);
    CHECK(g.front() == doctest::Approx(1.0));
    CHECK(g.back() == doctest::Approx(1e-3));
    for (std::size_t k = 1; k < g.size(); ++k) {
      CHECK(g[k] / g[k - 1] == doctest::Approx(std::pow(1e-3, 1.0 / 29)));
    }
    CHECK_THROWS_AS(default_tau_grid(1), ConfigError);
    CHECK_THROWS_AS(default_tau_grid(5, 1.0, 0.5), ConfigError);
  }

  TEST_CASE("rolling median") {
    const std::vector<double> t{5, 1, 4, 2, 3};
    CHECK(rolling_median(t, 1) == t);
    CHECK(rolling_median(t, 3) == std::vector<double>{5, 4, 2, 3, 3});
    CHECK(rolling_median(t, 5) == std::vector<double>{5, 4, 3, 3, 3});
    const std::vector<double> with_nan{1, NAN, 3, 10, 2};
    const auto m = rolling_median(with_nan, 3);
    CHECK(m[1] == 2.0);
    CHECK(m[2] == 6.5);
    CHECK_THROWS_AS(rolling_median(t, 4), ConfigError);
    CHECK_THROWS_AS(rolling_median(t, 7), ConfigError);
  }

  TEST_CASE("warm start matches cold start with fewer iterations") {
    const PathResult warm = toy_path(1, true);
    const PathResult cold = toy_path(1, false);
    REQUIRE(warm.selected >= 0);
    CHECK(warm.selected == cold.selected);
    const Eigen::VectorXd a = warm.coef.row(warm.selected), b = cold.coef.row(cold.selected);
    CHECK(((a.array() != 0.0) == (b.array() != 0.0)).all());
    CHECK(total_iterations(warm) <= total_iterations(cold));
    CHECK(cold.points[3].cold_start);
    CHECK_FALSE(warm.points[3].cold_start);
  }

  TEST_CASE("held-out curve has an interior minimum") {
    const PathResult res = toy_path(1, true);
    const auto& pts = res.points;
    const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
    CHECK(res.selected > 0);
    CHECK(res.selected < n - 1);
    const double best = pts[static_cast<std::size_t>(res.selected)].heldout_nll;
    CHECK(pts.front().heldout_nll > best);
    CHECK(pts.back().heldout_nll > best);
    for (const auto& p : pts) CHECK(p.heldout_nll >= best);
    CHECK(pts.front().nonzero <= pts.back().nonzero);
    CHECK(res.selected_tau == doctest::Approx(pts[static_cast<std::size_t>(res.selected)].tau));
  }

  TEST_CASE("reproducible selection and csv") {
    const PathResult a = toy_path(2, true), b = toy_path(2, true);
    CHECK(a.selected == b.selected);
    CHECK(a.coef == b.coef);
    CHECK(a.smoothed.rows() == a.coef.rows());
    std::vector<std::string> names;
    for (int j = 0; j < 50; ++j) names.push_back("x" + std::to_string(j));
    std::ostringstream out;
    write_path_csv(out, a, names);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line.rfind("tau,tau_per_obs,nonzero,train_nll,heldout_nll,iterations,stop,status,selected,intercept,x0,", 0) == 0);
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 15);
  }

  TEST_CASE("huge penalty point is empty") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 200, 10, 3, 5, 3});
    PathConfig pc;
    pc.tau_grid = {1e6, 0.1, 0.01};
    pc.median_window = 1;
    const PathResult res = run_path(r.dataset.data, {FamilyKind::gaussian, 1.0}, PriorSpec{}, OptimizerConfig{}, pc);
    CHECK(res.points[0].nonzero == 0);
    CHECK(res.points[2].nonzero >= 3);
  }

  TEST_CASE("bad path configs") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 50, 3, 1, 5, 3});
    PathConfig pc;
    pc.tau_grid = {0.1, 0.2, 0.1};
    CHECK_THROWS_AS(run_path(r.dataset.data, {}, PriorSpec{}, OptimizerConfig{}, pc), ConfigError);
    pc.tau_grid = {};
    CHECK_THROWS_AS(run_path(r.dataset.data, {}, PriorSpec{}, OptimizerConfig{}, pc), ConfigError);
    pc.tau_grid = {0.1, 0.01};
    pc.holdout_fraction = 1.0;
    CHECK_THROWS_AS(run_path(r.dataset.data, {}, PriorSpec{}, OptimizerConfig{}, pc), ConfigError);
  }
}
