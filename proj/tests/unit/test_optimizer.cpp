#include <doctest.h>

#include <Eigen/QR>
#include <cmath>
#include <random>

#include "palasso/optimizer.hpp"
#include "palasso/path.hpp"
#include "palasso/synth.hpp"

using namespace palasso;

namespace {

Eigen::VectorXd least_squares(const LinearModelData& d, double& intercept) {
  Eigen::MatrixXd A(d.n_obs(), d.X.cols() + 1);
  A.leftCols(d.X.cols()) = d.X;
  A.col(d.X.cols()).setOnes();
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(d.y);
  intercept = sol[d.X.cols()];
  return sol.head(d.X.cols());
}

OptimizerConfig no_holdout() {
  OptimizerConfig opt;
  opt.holdout = 0;
  return opt;
}

bool same_support(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return ((a.array() != 0.0) == (b.array() != 0.0)).all();
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("support recovery on a gaussian toy beats the lasso") {
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(10);
    truth[1] = 8;
    truth[4] = -6;
    truth[7] = 5;
    const double sigma = 10.0;
    auto rel_err = [&](const Eigen::VectorXd& b) {
      double num = 0, den = 0;
      for (Eigen::Index j = 0; j < 10; ++j) {
        if (truth[j] != 0.0) {
          num += (b[j] - truth[j]) * (b[j] - truth[j]);
          den += truth[j] * truth[j];
        }
      }
      return std::sqrt(num / den);
    };
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      CAPTURE(seed);
      SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 200, 10, 0, 5, seed});
      LinearModelData& d = r.dataset.data;
      std::mt19937_64 rng(seed + 77);
      std::normal_distribution<double> nd;
      for (Eigen::Index i = 0; i < 200; ++i) d.y[i] = d.X.row(i).dot(truth) + sigma * nd(rng);

      const LikelihoodFamily fam{FamilyKind::gaussian, sigma};
      const OptimizerConfig opt = no_holdout();
      const FitResult fr = fit({d, std::nullopt}, fam, PriorSpec{}, PenaltyConfig{0.025, true, std::nullopt}, opt);
      CHECK(same_support(fr.state.beta, truth));

      // Lasso: best error among the grid points that also find the support.
      double lasso_best = INFINITY;
      std::optional<Eigen::VectorXd> warm;
      for (double t : default_tau_grid(40, 1e-4, 1.0)) {
        const LassoResult lr = fit_lasso(d, fam, PenaltyConfig{t, true, std::nullopt}, opt, warm);
        warm = lr.beta;
        if (same_support(lr.beta, truth)) lasso_best = std::min(lasso_best, rel_err(lr.beta));
      }
      CHECK(rel_err(fr.state.beta) < lasso_best);
    }
  }

  TEST_CASE("huge penalty zeros everything") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 200, 10, 3, 5, 1});
    const FitResult fr = fit({r.dataset.data, std::nullopt}, {FamilyKind::gaussian, 1.0}, PriorSpec{},
                             PenaltyConfig{1e6, true, std::nullopt}, no_holdout());
    CHECK(fr.state.beta.isZero(0.0));
    CHECK((fr.state.lam.array() > 0.0).all());
  }

  TEST_CASE("vanishing penalty gives least squares") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 500, 5, 5, 5, 3, 1.0, 2.0, 0.5});
    double ls_icpt = 0.0;
    const Eigen::VectorXd ls = least_squares(r.dataset.data, ls_icpt);
    OptimizerConfig opt = no_holdout();
    opt.max_iters = 50000;
    const FitResult fr = fit({r.dataset.data, std::nullopt}, {FamilyKind::gaussian, 1.0}, PriorSpec{},
                             PenaltyConfig{1e-6, false, std::nullopt}, opt);
    CHECK((fr.state.beta - ls).cwiseAbs().maxCoeff() < 1e-3);
    CHECK(std::abs(fr.state.intercept - ls_icpt) < 1e-3);
    CHECK(fr.converged_reason == StopReason::tolerance);
  }

  TEST_CASE("runs are reproducible") {
    const SynthResult r = generate({FamilyKind::bernoulli_logit, Structure::independent, 600, 12, 3, 5, 2});
    OptimizerConfig opt;
    opt.seed = 5;
    opt.max_iters = 2000;
    for (Mode m : {Mode::full_batch, Mode::svrg}) {
      opt.mode = m;
      const FitData fd = split_for(r.dataset.data, opt);
      CHECK(fd.heldout);
      const FitResult a = run_fit(fd, {FamilyKind::bernoulli_logit}, PriorSpec{},
                                  PenaltyConfig{0.025, true, std::nullopt}, opt);
      const FitResult b = run_fit(fd, {FamilyKind::bernoulli_logit}, PriorSpec{},
                                  PenaltyConfig{0.025, true, std::nullopt}, opt);
      CHECK(a.state.beta == b.state.beta);
      CHECK(a.objective_trace == b.objective_trace);
      CHECK(a.heldout_trace == b.heldout_trace);
      CHECK((a.state.lam.array() > 0.0).all());
      CHECK(a.heldout_nll.has_value());
      CHECK(a.best_iteration <= a.iterations);
    }
  }

  TEST_CASE("holdout split") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 100, 3, 1, 5, 2});
    const FitData fd = split_holdout(r.dataset.data, 30, 9);
    CHECK(fd.train.n_obs() == 70);
    CHECK(fd.heldout->n_obs() == 30);
    CHECK(default_holdout(100) == 10);
    CHECK(default_holdout(50000) == 1000);
    CHECK_THROWS_AS(split_holdout(r.dataset.data, 100, 9), ConfigError);
  }

  TEST_CASE("group priors fit with gamma") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::group, 300, 20, 1, 5, 6});
    PriorSpec spec{PriorKind::sparse_group, r.groups, std::nullopt, std::nullopt};
    OptimizerConfig opt = no_holdout();
    opt.max_iters = 3000;
    const FitResult fr = fit({r.dataset.data, std::nullopt}, {FamilyKind::gaussian, 1.0}, spec,
                             PenaltyConfig{0.025, true, std::nullopt}, opt);
    CHECK(fr.state.gamma.size() == 4);
    CHECK((fr.state.gamma.array() > 0.0).all());
    CHECK((fr.state.lam.array() > 0.0).all());
    CHECK(std::isfinite(fr.objective_trace.back()));
  }

  TEST_CASE("bcd with a huge eps is least squares") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 300, 4, 4, 5, 8});
    double ls_icpt = 0.0;
    const Eigen::VectorXd ls = least_squares(r.dataset.data, ls_icpt);
    OptimizerConfig opt = no_holdout();
    opt.mode = Mode::bcd_reweighted;
    opt.bcd_eps = 1e9;
    opt.bcd_half_steps = 4;
    const FitResult fr = run_fit({r.dataset.data, std::nullopt}, {FamilyKind::gaussian, 1.0}, PriorSpec{},
                                 PenaltyConfig{1.0, false, std::nullopt}, opt);
    CHECK((fr.state.beta - ls).cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::VectorXd lam = lambda_block_update(Eigen::Vector3d(0.0, -1.0, 3.0), 0.5);
    CHECK(lam[0] == 2.0);
    CHECK(lam[1] == doctest::Approx(1.0 / 1.5));
    CHECK(lam[2] == doctest::Approx(1.0 / 3.5));
  }

  TEST_CASE("svrg with a full minibatch matches full batch") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 300, 6, 2, 5, 4});
    OptimizerConfig opt = no_holdout();
    opt.max_iters = 200;
    const PenaltyConfig pen{0.025, true, std::nullopt};
    const FitResult full = fit({r.dataset.data, std::nullopt}, {FamilyKind::gaussian, 1.0}, PriorSpec{}, pen, opt);
    opt.mode = Mode::svrg;
    opt.minibatch = 300;
    opt.svrg_epoch = 1;
    const FitResult sv = run_fit({r.dataset.data, std::nullopt}, {FamilyKind::gaussian, 1.0}, PriorSpec{}, pen, opt);
    CHECK(sv.objective_trace == full.objective_trace);
    CHECK(sv.state.beta == full.state.beta);
  }

  TEST_CASE("lipschitz estimate and descent") {
    const SynthResult r = generate({FamilyKind::gaussian, Structure::independent, 200, 10, 3, 5, 4});
    const PenaltyConfig pen{0.025, true, std::nullopt};
    const ParamState s0 = ParamState::initial(10, 0);
    const double l = estimate_smooth_lipschitz(r.dataset.data, {FamilyKind::gaussian, 1.0}, PriorSpec{}, pen, s0);
    CHECK(l > 0.0);
    const DescentReport rep = descent_check(r.dataset.data, {FamilyKind::gaussian, 1.0}, PriorSpec{}, pen, 0.5 / l, 200);
    CHECK(rep.passed);
    CHECK(rep.trace.size() >= 200);
    CHECK_THROWS_AS(descent_check(r.dataset.data, {FamilyKind::gaussian, 1.0}, PriorSpec{}, pen, 0.0, 10),
                    InvalidStepError);
  }

  TEST_CASE("failures") {
    const SynthResult p = generate({FamilyKind::poisson_log, Structure::independent, 100, 5, 5, 5, 3});
    OptimizerConfig opt = no_holdout();
    opt.step = 100.0;
    opt.max_iters = 50;
    try {
      fit({p.dataset.data, std::nullopt}, {FamilyKind::poisson_log}, PriorSpec{}, PenaltyConfig{0.025, true, std::nullopt}, opt);
      FAIL("expected divergence");
    } catch (const DivergedError& e) {
      CHECK(e.last_state().beta.allFinite());
      CHECK(e.iteration() >= 1);
    }

    const LinearModelData& d = p.dataset.data;
    const PenaltyConfig pen{0.025, true, std::nullopt};
    OptimizerConfig bad = no_holdout();
    bad.step = 0.0;
    CHECK_THROWS_AS(fit({d, std::nullopt}, {FamilyKind::poisson_log}, PriorSpec{}, pen, bad), ConfigError);
    bad = no_holdout();
    bad.patience = 0;
    CHECK_THROWS_AS(fit({d, std::nullopt}, {FamilyKind::poisson_log}, PriorSpec{}, pen, bad), ConfigError);
    bad = no_holdout();
    bad.mode = Mode::svrg;
    bad.minibatch = 101;
    CHECK_THROWS_AS(run_fit({d, std::nullopt}, {FamilyKind::poisson_log}, PriorSpec{}, pen, bad), ConfigError);
    bad = no_holdout();
    bad.mode = Mode::bcd_reweighted;
    const PriorSpec grp{PriorKind::sparse_group, GroupStructure::contiguous(5, 5), std::nullopt, std::nullopt};
    CHECK_THROWS_AS(run_fit({d, std::nullopt}, {FamilyKind::poisson_log}, grp, pen, bad), ConfigError);
    ParamState wrong = ParamState::initial(4, 0);
    CHECK_THROWS_AS(fit({d, std::nullopt}, {FamilyKind::poisson_log}, PriorSpec{}, pen, no_holdout(), wrong),
                    DimensionError);
    CHECK_THROWS_AS(parse_mode("newton"), ConfigError);
    CHECK(parse_mode("full_batch") == Mode::full_batch);
    CHECK(to_string(Mode::bcd_reweighted) == "bcd");
  }
}
