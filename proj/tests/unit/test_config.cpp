#include <doctest.h>

#include "palasso/error.hpp"
#include "run_config.hpp"

using namespace palasso;
using namespace palasso::cli;
using nlohmann::json;

TEST_SUITE("cli") {
  TEST_CASE("tau parsing") {
    const TauValue a = parse_tau("0.025N");
    CHECK(a.value == 0.025);
    CHECK(a.per_observation);
    const TauValue b = parse_tau(" 12.5 ");
    CHECK(b.value == 12.5);
    CHECK_FALSE(b.per_observation);
    CHECK(parse_tau("0.5*N").per_observation);
    for (const char* bad : {"", "N", "-1", "0", "abc", "1.0x"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_tau(bad), ConfigError);
    }
    CHECK(format_tau(a) == "0.025000000000000001N");
    CHECK(parse_tau(format_tau(a)).value == a.value);
    const auto grid = parse_tau_grid("1N,0.1N,0.01N");
    REQUIRE(grid.size() == 3);
    CHECK(grid[2].value == 0.01);
    CHECK_THROWS_AS(parse_tau_grid("1N,0.1"), ConfigError);
  }

  TEST_CASE("json config") {
    RunConfig cfg;
    apply_json(cfg, json::parse(R"({"family": {"name": "poisson"}, "penalty": {"tau": "0.1N"},
                                    "optimizer": {"step": 0.05, "mode": "svrg"},
                                    "path": {"tau_grid": [1, 0.5], "median_window": 3}})"));
    CHECK(cfg.family == FamilyKind::poisson_log);
    CHECK(cfg.tau.value == 0.1);
    CHECK(cfg.optimizer.step == 0.05);
    CHECK(cfg.optimizer.mode == Mode::svrg);
    REQUIRE(cfg.tau_grid);
    CHECK_FALSE(cfg.tau_grid->front().per_observation);
    CHECK(cfg.path.median_window == 3);

    RunConfig again;
    apply_json(again, to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));
  }

  TEST_CASE("config errors name the key") {
    RunConfig cfg;
    auto message = [&](const char* text) {
      try {
        apply_json(cfg, json::parse(text));
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message(R"({"optimiser": {}})").find("optimiser") != std::string::npos);
    CHECK(message(R"({"optimizer": {"stepsize": 1}})").find("optimizer.stepsize") != std::string::npos);
    CHECK(message(R"({"optimizer": {"step": "big"}})").find("optimizer.step") != std::string::npos);
    CHECK(message(R"({"penalty": {"tau": -2}})").find("penalty.tau") != std::string::npos);
    CHECK(message(R"({"family": {"name": "gamma"}})") != "");
    CHECK_THROWS_AS(apply_json_file(cfg, "/nonexistent/config.json"), ConfigError);
  }
}
