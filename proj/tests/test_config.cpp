#include <catch_amalgamated.hpp>

#include <sstream>

#include "spdc3q/config.hpp"

using namespace spdc3q;

TEST_CASE("config text: comments, lists, ranges") {
  RunConfig cfg;
  std::istringstream in(R"(# comment
g0 = 0.2
t_final = 10   # trailing
cutoff = 4
omega = 1, 3, 2
g = 0.05
grid_g0 = 0.1:0.1:0.3
grid_t = 1, 2, 4:1:5
method = b
strict = true
)");
  apply_config_text(cfg, in);
  CHECK(cfg.space.pump_coupling == 0.2);
  CHECK(cfg.t_final == 10.0);
  CHECK(cfg.space.cutoffs == std::array<int, 3>{4, 4, 4});
  CHECK(cfg.space.mode_freqs == std::array<double, 3>{1.0, 3.0, 2.0});
  CHECK(cfg.space.drive_freq() == 6.0);
  CHECK(cfg.space.rabi_couplings == std::array<double, 3>{0.05, 0.05, 0.05});
  REQUIRE(cfg.grid.g0_values.size() == 3);
  CHECK(cfg.grid.g0_values[2] == Catch::Approx(0.3));
  CHECK(cfg.grid.times == std::vector<double>{1.0, 2.0, 4.0, 5.0});
  CHECK(cfg.method == Method::midpoint_exp);
  CHECK(cfg.strict);
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("config errors name the problem") {
  RunConfig cfg;
  std::istringstream unknown("bogus = 1\n");
  CHECK_THROWS_WITH(apply_config_text(cfg, unknown, "f.cfg"), Catch::Matchers::ContainsSubstring("f.cfg:1") &&
                                                                  Catch::Matchers::ContainsSubstring("bogus"));
  std::istringstream nan_text("\n\ng0 = abc\n");
  CHECK_THROWS_WITH(apply_config_text(cfg, nan_text, "f.cfg"), Catch::Matchers::ContainsSubstring("f.cfg:3"));
  std::istringstream no_eq("g0 0.1\n");
  CHECK_THROWS_AS(apply_config_text(cfg, no_eq), ConfigError);
  CHECK_THROWS_WITH(apply_config_file(cfg, "/nonexistent/run.cfg"),
                    Catch::Matchers::ContainsSubstring("/nonexistent/run.cfg"));
  CHECK_THROWS_AS(apply_setting(cfg, "cutoff", "2.5"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "omega", "1,2"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "method", "c"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "strict", "maybe"), ConfigError);
}

TEST_CASE("flag spellings map onto config keys") {
  RunConfig cfg;
  apply_setting(cfg, "t-final", "3");
  apply_setting(cfg, "use-literal-P", "1");
  CHECK(cfg.t_final == 3.0);
  CHECK(cfg.use_literal_projector);
}

TEST_CASE("effective config echoes defaults") {
  const RunConfig cfg;
  const auto j = cfg.to_json();
  CHECK(j["space"]["cutoffs"] == std::array<int, 3>{6, 6, 6});
  CHECK(j["space"]["pump_coupling"] == 0.1);
  CHECK(j["dt"] == default_step(4.0));
  CHECK(j["method"] == "a");
  CHECK(j["grid"]["g0"].size() == 20);
  RunConfig bad;
  bad.jobs = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}
