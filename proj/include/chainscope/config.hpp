#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chainscope/common.hpp"
#include "chainscope/model.hpp"

namespace chainscope {

using json = nlohmann::ordered_json;

struct ModelSpec {
  std::string kind = "grid";  // grid | subshift | example31
  // grid
  std::string map = "identity";
  double param = 0.0;
  double lo = 0.0, hi = 1.0;
  bool torus = true;
  double mesh = 0.0625;
  // subshift
  int alphabet = 2;
  std::vector<std::string> forbidden;
  int window = 3;
  // example31
  int levels = 1;
  std::vector<double> s{0.5};
  std::size_t node_cap = 200000;
};

struct Thresholds {
  double theta = 0.02;  // positivity threshold for "entropy > 0" verdicts
  std::size_t exact_separated_cap = 24;
  std::size_t chain_enum_cap = 5000;
  std::size_t fixpoint_state_cap = 500000;
  std::size_t product_pair_cap = 30000000;
  std::size_t cc_step_cap = 20000;
  std::size_t cover_profile_cap = 200000;
  int cover_exact_n = 10;
  std::size_t point_report_cap = 4000;
  std::size_t check_pair_samples = 40;  // pairs sampled by the chain-implication check
};

struct EntropyGrid {
  std::vector<double> r_grid{0.25};
  std::vector<double> b_grid{0.05};
  int n_min = 1, n_max = 6;
  int cover_n_max = 8;
};

struct RunConfig {
  std::string system;  // zoo name when applicable ("" for ad-hoc configs)
  ModelSpec model;
  ResolutionSchedule schedule;
  EntropyGrid entropy;
  Thresholds thresholds;
  std::uint64_t seed = 1;
  unsigned jobs = 0;  // 0 = all hardware threads
  std::string out_dir = "out";
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (auto k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline FiniteModel build_model(const ModelSpec& ms) {
  if (ms.kind == "grid")
    return build_grid_model(ms.map, ms.param, ms.lo, ms.hi, ms.torus, ms.mesh,
                            ms.node_cap);
  if (ms.kind == "subshift")
    return build_subshift_model(static_cast<std::size_t>(ms.alphabet),
                                ms.forbidden, ms.window, ms.node_cap);
  if (ms.kind == "example31")
    return build_example31_model(ms.levels, ms.window, ms.s, ms.node_cap);
  throw ConfigError("config: unknown model kind '" + ms.kind + "'");
}

inline ModelSpec parse_model_spec(const json& j) {
  detail::reject_unknown(j,
                         {"kind", "map", "param", "lo", "hi", "torus", "mesh",
                          "alphabet", "forbidden", "window", "levels", "s",
                          "node_cap"},
                         "model");
  ModelSpec ms;
  detail::read(j, "kind", ms.kind);
  detail::read(j, "map", ms.map);
  detail::read(j, "param", ms.param);
  detail::read(j, "lo", ms.lo);
  detail::read(j, "hi", ms.hi);
  detail::read(j, "torus", ms.torus);
  detail::read(j, "mesh", ms.mesh);
  detail::read(j, "alphabet", ms.alphabet);
  detail::read(j, "forbidden", ms.forbidden);
  detail::read(j, "window", ms.window);
  detail::read(j, "levels", ms.levels);
  detail::read(j, "s", ms.s);
  detail::read(j, "node_cap", ms.node_cap);
  return ms;
}

inline RunConfig parse_config(const json& j) {
  detail::reject_unknown(j,
                         {"system", "model", "schedule", "entropy",
                          "thresholds", "seed", "jobs", "out_dir"},
                         "config");
  RunConfig cfg;
  detail::read(j, "system", cfg.system);
  if (!j.contains("model")) throw ConfigError("config: missing 'model'");
  cfg.model = parse_model_spec(j.at("model"));
  if (!j.contains("schedule")) throw ConfigError("config: missing 'schedule'");
  {
    const auto& s = j.at("schedule");
    detail::reject_unknown(s, {"epsilons", "deltas", "radii"}, "schedule");
    detail::read(s, "epsilons", cfg.schedule.epsilons);
    detail::read(s, "deltas", cfg.schedule.deltas);
    detail::read(s, "radii", cfg.schedule.radii);
  }
  if (j.contains("entropy")) {
    const auto& e = j.at("entropy");
    detail::reject_unknown(e, {"r_grid", "b_grid", "n_min", "n_max", "cover_n_max"},
                           "entropy");
    detail::read(e, "r_grid", cfg.entropy.r_grid);
    detail::read(e, "b_grid", cfg.entropy.b_grid);
    detail::read(e, "n_min", cfg.entropy.n_min);
    detail::read(e, "n_max", cfg.entropy.n_max);
    detail::read(e, "cover_n_max", cfg.entropy.cover_n_max);
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    detail::reject_unknown(
        t,
        {"theta", "exact_separated_cap", "chain_enum_cap", "fixpoint_state_cap",
         "product_pair_cap", "cc_step_cap", "cover_profile_cap",
         "cover_exact_n", "point_report_cap", "check_pair_samples"},
        "thresholds");
    detail::read(t, "theta", cfg.thresholds.theta);
    detail::read(t, "exact_separated_cap", cfg.thresholds.exact_separated_cap);
    detail::read(t, "chain_enum_cap", cfg.thresholds.chain_enum_cap);
    detail::read(t, "fixpoint_state_cap", cfg.thresholds.fixpoint_state_cap);
    detail::read(t, "product_pair_cap", cfg.thresholds.product_pair_cap);
    detail::read(t, "cc_step_cap", cfg.thresholds.cc_step_cap);
    detail::read(t, "cover_profile_cap", cfg.thresholds.cover_profile_cap);
    detail::read(t, "cover_exact_n", cfg.thresholds.cover_exact_n);
    detail::read(t, "point_report_cap", cfg.thresholds.point_report_cap);
    detail::read(t, "check_pair_samples", cfg.thresholds.check_pair_samples);
  }
  detail::read(j, "seed", cfg.seed);
  detail::read(j, "jobs", cfg.jobs);
  detail::read(j, "out_dir", cfg.out_dir);
  return cfg;
}

inline json to_json(const RunConfig& cfg) {
  json j;
  j["system"] = cfg.system;
  json mj;
  mj["kind"] = cfg.model.kind;
  if (cfg.model.kind == "grid") {
    mj["map"] = cfg.model.map;
    mj["param"] = cfg.model.param;
    mj["lo"] = cfg.model.lo;
    mj["hi"] = cfg.model.hi;
    mj["torus"] = cfg.model.torus;
    mj["mesh"] = cfg.model.mesh;
  } else if (cfg.model.kind == "subshift") {
    mj["alphabet"] = cfg.model.alphabet;
    mj["forbidden"] = cfg.model.forbidden;
    mj["window"] = cfg.model.window;
  } else {
    mj["levels"] = cfg.model.levels;
    mj["s"] = cfg.model.s;
    mj["window"] = cfg.model.window;
  }
  mj["node_cap"] = cfg.model.node_cap;
  j["model"] = mj;
  j["schedule"] = {{"epsilons", cfg.schedule.epsilons},
                   {"deltas", cfg.schedule.deltas},
                   {"radii", cfg.schedule.radii}};
  j["entropy"] = {{"r_grid", cfg.entropy.r_grid},
                  {"b_grid", cfg.entropy.b_grid},
                  {"n_min", cfg.entropy.n_min},
                  {"n_max", cfg.entropy.n_max},
                  {"cover_n_max", cfg.entropy.cover_n_max}};
  j["thresholds"] = {{"theta", cfg.thresholds.theta},
                     {"exact_separated_cap", cfg.thresholds.exact_separated_cap},
                     {"chain_enum_cap", cfg.thresholds.chain_enum_cap},
                     {"fixpoint_state_cap", cfg.thresholds.fixpoint_state_cap},
                     {"product_pair_cap", cfg.thresholds.product_pair_cap},
                     {"cc_step_cap", cfg.thresholds.cc_step_cap},
                     {"cover_profile_cap", cfg.thresholds.cover_profile_cap},
                     {"cover_exact_n", cfg.thresholds.cover_exact_n},
                     {"point_report_cap", cfg.thresholds.point_report_cap},
                     {"check_pair_samples", cfg.thresholds.check_pair_samples}};
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  j["out_dir"] = cfg.out_dir;
  return j;
}

// Hash of the canonical config serialization (out_dir and jobs do not affect
// results, so they are excluded).
inline std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("out_dir");
  j.erase("jobs");
  auto h = fnv1a64(j.dump());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace chainscope
