#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "palasso/error.hpp"
#include "palasso/objective.hpp"

using namespace palasso;

namespace {

// Direct minimization of tau lam b - log lam + rho(lam) over log lam by golden
// section; good to about sqrt(machine eps) relative.
double argmin_profile(const ProfiledPenalty& pp, double b) {
  auto f = [&](double t) {
    const double lam = std::exp(t);
    return pp.tau * lam * b - t + pp.prior.rho(lam);
  };
  double lo = -40.0, hi = 10.0;
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::exp(0.5 * (lo + hi));
}

ScalarPrior flat() {
  return ScalarPrior{[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("joint objective at the default start") {
    LinearModelData d;
    d.X = RowMatrix::Random(30, 4);
    d.y = Eigen::VectorXd::Random(30);
    const LikelihoodFamily fam{FamilyKind::gaussian, 1.0};
    const PenaltyConfig cfg{2.0, false, std::nullopt};
    const ParamState s = ParamState::initial(4, 0);
    const double expect = 30.0 / 2.0 * nll(fam, d, Eigen::VectorXd::Zero(4)) - 4.0 / 2.0 * std::log(1 / std::numbers::pi);
    CHECK(joint_objective(s, cfg, PriorSpec{}, fam, d) == doctest::Approx(expect).epsilon(1e-14));
  }

  TEST_CASE("single-coordinate hand computation") {
    LinearModelData d;
    d.X.resize(2, 1);
    d.X << 1, 2;
    d.y.resize(2);
    d.y << 1, 0;
    ParamState s = ParamState::initial(1, 0);
    s.beta[0] = 0.5;
    s.lam[0] = 2.0;
    const double tau = 2.0, a = 0.25;
    // residuals 0.5 and -1; mean nll = (0.125 + 0.5)/2 + 0.5 log(2 pi)
    const double mean_nll = (0.125 + 0.5) / 2 + 0.5 * std::log(2 * std::numbers::pi);
    const double log_p = std::log(2 / std::numbers::pi) - std::log(5.0);
    const double expect = 2 / tau * mean_nll + 2.0 * 0.5 - a * std::log(2.0) - log_p / tau;
    CHECK(joint_objective(s, PenaltyConfig{tau, false, a}, PriorSpec{}, {FamilyKind::gaussian, 1.0}, d) ==
          doctest::Approx(expect).epsilon(1e-14));
  }

  TEST_CASE("penalty resolution") {
    const ResolvedPenalty r = PenaltyConfig{0.025, true, std::nullopt}.resolve(400);
    CHECK(r.tau == doctest::Approx(10.0));
    CHECK(r.a == doctest::Approx(0.1));
    CHECK((PenaltyConfig{3.0, false, 0.7}.resolve(400).a) == 0.7);
    CHECK_THROWS_AS((PenaltyConfig{0.0, false, std::nullopt}.resolve(10)), ConfigError);
    CHECK_THROWS_AS((PenaltyConfig{1.0, false, -1.0}.resolve(10)), ConfigError);
    ParamState s = ParamState::initial(1, 0);
    s.lam[0] = 0.0;
    LinearModelData d;
    d.X = RowMatrix::Ones(2, 1);
    d.y = Eigen::VectorXd::Zero(2);
    CHECK_THROWS(joint_objective(s, PenaltyConfig{}, PriorSpec{}, {FamilyKind::gaussian, 1.0}, d));
  }

  TEST_CASE("lambda_star") {
    const ProfiledPenalty hc{1.0, ScalarPrior::half_cauchy()};
    CHECK(lambda_star(hc, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(argmin_profile(hc, 0.0) == doctest::Approx(1.0).epsilon(1e-7));
    const double l10 = lambda_star(hc, 10.0);
    CHECK(l10 > 1.0 / 11);
    CHECK(l10 < 1.0 / 10);
    CHECK(std::abs(l10 - argmin_profile(hc, 10.0)) < 1e-7);
    CHECK(lambda_star(ProfiledPenalty{2.0, flat()}, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> lt(std::log(1e-2), std::log(1e2)), lb(std::log(1e-4), std::log(1e3));
    for (int i = 0; i < 200; ++i) {
      const ProfiledPenalty pp{std::exp(lt(rng)), ScalarPrior::half_cauchy()};
      const double b = std::exp(lb(rng));
      const double ls = lambda_star(pp, b);
      CHECK(std::abs(ls - argmin_profile(pp, b)) < 1e-6 * std::max(1.0, ls));
      CHECK(std::abs(ls * (pp.tau * b + pp.prior.drho(ls)) - 1) < 1e-10);
    }
  }

  TEST_CASE("penalty derivatives") {
    const ProfiledPenalty hc{1.0, ScalarPrior::half_cauchy()};
    CHECK(penalty_value_grad(hc, 0.0).gprime == doctest::Approx(hc.tau * lambda_a(hc)).epsilon(1e-12));
    CHECK(penalty_value_grad(hc, 1e6).gprime * 1e6 == doctest::Approx(1.0).epsilon(1e-5));
    for (double b : {100.0, 1e3, 1e4, 1e5}) {
      const double v = penalty_value_grad(hc, b).gprime * b;
      CHECK(v >= 0.9);
      CHECK(v <= 1.0);
    }
    for (const ProfiledPenalty& pp :
         {hc, ProfiledPenalty{7.0, ScalarPrior::half_cauchy()}, ProfiledPenalty{0.3, ScalarPrior::exponential(2.0)}}) {
      for (double b : {0.05, 0.4, 1.0, 3.0, 25.0}) {
        const double h = 1e-5 * std::max(1.0, b);
        const PenaltyValue v = penalty_value_grad(pp, b);
        const double fd1 = (penalty_value_grad(pp, b + h).g - penalty_value_grad(pp, b - h).g) / (2 * h);
        const double fd2 = (penalty_value_grad(pp, b + h).gprime - penalty_value_grad(pp, b - h).gprime) / (2 * h);
        CHECK(std::abs(fd1 - v.gprime) <= 1e-6 * std::abs(v.gprime));
        CHECK(std::abs(fd2 - v.gsecond) <= 1e-5 * std::abs(v.gsecond));
      }
    }
  }

  TEST_CASE("lambda_a") {
    CHECK(lambda_a({1.0, ScalarPrior::half_cauchy()}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lambda_a({1.0, ScalarPrior::exponential(1.0)}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lambda_a({1.0, ScalarPrior::exponential(2.0)}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_a({1.0, flat()}), NumericalError);
  }

  TEST_CASE("threshold map") {
    std::vector<double> grid;
    for (int i = 0; i <= 5000; ++i) grid.push_back(i * 1e-3);
    {
      const double tau = 1.0;
      const auto tm = threshold_map({tau, ScalarPrior::half_cauchy()}, grid);
      std::size_t arg = 0;
      for (std::size_t i = 1; i < tm.size(); ++i) {
        if (tm[i].second < tm[arg].second) arg = i;
      }
      CHECK(arg == 0);
      CHECK(tm[0].second == doctest::Approx(tau).epsilon(1e-3));
      for (std::size_t i = 1; i < tm.size(); ++i) {
        CHECK(tm[i].second - tm[i].first <= tm[i - 1].second - tm[i - 1].first);
      }
    }
    // Stronger penalty: the map dips below its value at zero.
    const auto tm10 = threshold_map({10.0, ScalarPrior::half_cauchy()}, grid);
    CHECK(tm10[0].second == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(tm10[100].second < tm10[0].second);
    const double neg[] = {-1.0};
    CHECK_THROWS_AS(threshold_map({1.0, ScalarPrior::half_cauchy()}, neg), DomainError);
  }
}
