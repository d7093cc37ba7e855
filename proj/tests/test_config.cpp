#include <catch2/catch_amalgamated.hpp>

#include "chainscope/report.hpp"
#include "chainscope/zoo.hpp"

using namespace chainscope;

TEST_CASE("config round-trips through json", "[config]") {
  auto cfg = zoo_lookup("golden-mean").config;
  auto j = to_json(cfg);
  auto back = parse_config(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("unknown config keys are rejected", "[config]") {
  auto j = to_json(zoo_lookup("identity").config);
  j["surprise"] = 1;
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  auto j2 = to_json(zoo_lookup("identity").config);
  j2["model"]["quux"] = true;
  CHECK_THROWS_AS(parse_config(j2), ConfigError);
}

TEST_CASE("schedules below the resolution floor are rejected with the floor "
          "named",
          "[config]") {
  auto cfg = zoo_lookup("doubling").config;
  cfg.schedule.epsilons = {0.25, 1e-6};
  try {
    SystemAnalysis sa(cfg);
    FAIL("expected ResolutionError");
  } catch (const ResolutionError& e) {
    std::string msg = e.what();
    CHECK(msg.find("floor") != std::string::npos);
  }
}

TEST_CASE("config hash ignores output plumbing", "[config]") {
  auto a = zoo_lookup("identity").config;
  auto b = a;
  b.out_dir = "elsewhere";
  b.jobs = 7;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = a.seed + 1;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("analysis outputs are deterministic", "[config]") {
  auto cfg = zoo_lookup("identity").config;
  SystemAnalysis sa1(cfg), sa2(cfg);
  CHECK(points_json(sa1).dump() == points_json(sa2).dump());
  CHECK(entropy_csv(sa1) == entropy_csv(sa2));
  CHECK(components_json(sa1).dump() == components_json(sa2).dump());
  CHECK(model_export_csv(cfg, sa1.model()) ==
        model_export_csv(cfg, sa2.model()));
}

TEST_CASE("model export lists every point once", "[config]") {
  auto cfg = zoo_lookup("golden-mean").config;
  SystemAnalysis sa(cfg);
  auto csv = model_export_csv(cfg, sa.model());
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == sa.model().size() + 3);  // 2 comments + header + rows
}
