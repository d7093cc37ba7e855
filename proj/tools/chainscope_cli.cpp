// Command-line front end: build models, run analyses and theorem checks from
// config files or the built-in zoo, and export reports.
//
// Exit codes: 0 success, 1 check violation or partial result, 2 config
// error, 3 capacity error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainscope/report.hpp"
#include "chainscope/zoo.hpp"

namespace cs = chainscope;

namespace {

cs::RunConfig load_config(const std::string& config_path,
                          const std::string& zoo_name) {
  if (!config_path.empty() && !zoo_name.empty())
    throw cs::ConfigError("pass either --config or --zoo, not both");
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw cs::ConfigError("cannot read config " + config_path);
    cs::json j;
    try {
      is >> j;
    } catch (const std::exception& e) {
      throw cs::ConfigError(std::string("config parse error: ") + e.what());
    }
    return cs::parse_config(j);
  }
  if (!zoo_name.empty()) return cs::zoo_lookup(zoo_name).config;
  throw cs::ConfigError("need --config PATH or --zoo NAME");
}

void apply_overrides(cs::RunConfig& cfg, const std::string& out_dir,
                     unsigned jobs, bool jobs_set, std::uint64_t seed,
                     bool seed_set) {
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (jobs_set) cfg.jobs = jobs;
  if (seed_set) cfg.seed = seed;
}

int run_zoo(const std::string& action, const std::string& name) {
  if (action == "list") {
    for (const auto& e : cs::zoo_systems()) std::printf("%s\n", e.name.c_str());
    return 0;
  }
  if (action == "describe") {
    const auto& e = cs::zoo_lookup(name);
    std::printf("%s: %s\n", e.name.c_str(), e.description.c_str());
    std::printf("%s\n", cs::to_json(e.config).dump(2).c_str());
    return 0;
  }
  throw cs::ConfigError("zoo action must be 'list' or 'describe'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-model analysis of discrete dynamical systems"};
  app.require_subcommand(1);

  std::string config_path, zoo_name, out_dir;
  unsigned jobs = 0;
  std::uint64_t seed = 0;
  bool jobs_set = false, seed_set = false;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--zoo", zoo_name, "use a built-in system's default config");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker threads (1 = sequential)")
      ->each([&](const std::string&) { jobs_set = true; });
  app.add_option("--seed", seed, "seed for randomized sampling")
      ->each([&](const std::string&) { seed_set = true; });

  auto* analyze = app.add_subcommand(
      "analyze", "build the model and write the full report bundle");
  auto* check = app.add_subcommand(
      "check", "run theorem checks (all systems in the zoo when no config)");
  std::vector<std::string> theorem_ids;
  bool check_all = false;
  check->add_option("ids", theorem_ids, "theorem ids (e.g. 1.2 A.1 B.1)");
  check->add_flag("--all", check_all, "run every check");
  auto* entropy = app.add_subcommand("entropy", "write entropy tables only");
  auto* export_dot =
      app.add_subcommand("export-dot", "write the condensation DOT file");
  auto* zoo = app.add_subcommand("zoo", "list or describe built-in systems");
  std::string zoo_action = "list", zoo_target;
  zoo->add_option("action", zoo_action, "list | describe");
  zoo->add_option("name", zoo_target, "system name for describe");

  CLI11_PARSE(app, argc, argv);

  try {
    if (zoo->parsed()) return run_zoo(zoo_action, zoo_target);

    if (check->parsed()) {
      if (!check_all && theorem_ids.empty())
        throw cs::ConfigError("check: pass theorem ids or --all");
      std::vector<std::string> ids;
      if (!check_all)
        for (const auto& id : theorem_ids)
          ids.push_back(cs::canonical_theorem_id(id));
      int exit_code = 0;
      if (config_path.empty() && zoo_name.empty()) {
        // No config: run over the whole zoo.
        for (const auto& e : cs::zoo_systems()) {
          cs::RunConfig cfg = e.config;
          apply_overrides(cfg, out_dir, jobs, jobs_set, seed, seed_set);
          cs::SystemAnalysis sa(cfg);
          auto checks = cs::run_checks(sa, ids);
          int rc = cs::write_checks(sa, checks, cfg.out_dir);
          exit_code = std::max(exit_code, rc);
          for (const auto& chk : checks)
            std::printf("%-12s %-6s %s\n", chk.system.c_str(),
                        chk.theorem_id.c_str(), cs::to_string(chk.status));
        }
      } else {
        cs::RunConfig cfg = load_config(config_path, zoo_name);
        apply_overrides(cfg, out_dir, jobs, jobs_set, seed, seed_set);
        cs::SystemAnalysis sa(cfg);
        auto checks = cs::run_checks(sa, ids);
        exit_code = cs::write_checks(sa, checks, cfg.out_dir);
        for (const auto& chk : checks)
          std::printf("%-12s %-6s %s\n", chk.system.c_str(),
                      chk.theorem_id.c_str(), cs::to_string(chk.status));
      }
      return exit_code;
    }

    cs::RunConfig cfg = load_config(config_path, zoo_name);
    apply_overrides(cfg, out_dir, jobs, jobs_set, seed, seed_set);
    cs::SystemAnalysis sa(cfg);
    if (analyze->parsed()) {
      cs::write_analysis(sa);
      std::printf("wrote %s\n", cfg.out_dir.c_str());
      return 0;
    }
    if (entropy->parsed()) {
      cs::write_file(std::filesystem::path(cfg.out_dir) / "entropy.csv",
                     cs::entropy_csv(sa));
      std::printf("wrote %s/entropy.csv\n", cfg.out_dir.c_str());
      return 0;
    }
    if (export_dot->parsed()) {
      cs::write_file(std::filesystem::path(cfg.out_dir) / "condensation.dot",
                     cs::condensation_dot_annotated(sa));
      std::printf("wrote %s/condensation.dot\n", cfg.out_dir.c_str());
      return 0;
    }
    throw cs::ConfigError("no subcommand");
  } catch (const cs::CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return 3;
  } catch (const cs::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
