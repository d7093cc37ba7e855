#pragma once

#include <string>
#include <vector>

#include "chainscope/config.hpp"

namespace chainscope {

struct ZooEntry {
  std::string name;
  std::string description;
  RunConfig config;
};

// Built-in systems with default run configurations. The schedules are tuned
// so that each system's analyses run at desk scale; finer ladders can be set
// through a config file.
inline std::vector<ZooEntry> zoo_systems() {
  std::vector<ZooEntry> out;

  auto add = [&](std::string name, std::string desc, RunConfig cfg) {
    cfg.system = name;
    out.push_back({std::move(name), std::move(desc), std::move(cfg)});
  };

  {
    RunConfig c;
    c.model.kind = "grid";
    c.model.map = "identity";
    c.model.torus = false;
    c.model.lo = 0;
    c.model.hi = 1;
    c.model.mesh = 1.0 / 16;
    c.schedule.epsilons = {0.2, 0.1};
    c.schedule.deltas = {0.02, 0.01};
    c.schedule.radii = {0.2, 0.1};
    c.entropy.r_grid = {0.5, 0.25};
    c.entropy.b_grid = {0.1, 0.05};
    c.entropy.n_min = 1;
    c.entropy.n_max = 6;
    add("identity", "identity map on [0,1]; every point is a fixed point", c);
  }
  {
    RunConfig c;
    c.model.kind = "grid";
    c.model.map = "rotation";
    c.model.param = 0.5;
    c.model.torus = true;
    c.model.mesh = 1.0 / 16;
    c.schedule.epsilons = {0.2, 0.1};
    c.schedule.deltas = {0.02, 0.01};
    c.schedule.radii = {0.2, 0.1};
    c.entropy.r_grid = {0.5, 0.25};
    c.entropy.b_grid = {0.1, 0.05};
    add("rotation", "circle rotation by 1/2; an isometry with 2-cycles", c);
  }
  {
    RunConfig c;
    c.model.kind = "grid";
    c.model.map = "doubling";
    c.model.torus = true;
    c.model.mesh = 1.0 / 256;
    c.schedule.epsilons = {0.25, 0.0625};
    c.schedule.deltas = {1.0 / 64, 1.0 / 128};
    c.schedule.radii = {0.125, 0.0625};
    c.entropy.r_grid = {0.25};
    c.entropy.b_grid = {0.1};
    c.entropy.n_min = 1;
    c.entropy.n_max = 6;
    add("doubling", "angle doubling on the circle; expanding and mixing", c);
  }
  {
    RunConfig c;
    c.model.kind = "grid";
    c.model.map = "tent";
    c.model.torus = false;
    c.model.mesh = 1.0 / 128;
    c.schedule.epsilons = {0.25, 0.0625};
    c.schedule.deltas = {1.0 / 32, 1.0 / 64};
    c.schedule.radii = {0.125, 0.0625};
    c.entropy.r_grid = {0.25};
    c.entropy.b_grid = {0.1};
    add("tent", "tent map on [0,1]; piecewise expanding", c);
  }
  {
    RunConfig c;
    c.model.kind = "grid";
    c.model.map = "northsouth";
    c.model.param = 0.1;
    c.model.torus = true;
    c.model.mesh = 1.0 / 129;
    c.schedule.epsilons = {0.3, 0.15};
    c.schedule.deltas = {0.012, 0.004};
    c.schedule.radii = {0.05, 0.025};
    c.entropy.r_grid = {0.25};
    c.entropy.b_grid = {0.05};
    c.entropy.n_min = 1;
    c.entropy.n_max = 20;
    add("northsouth",
        "north-south circle map: one repelling and one attracting fixed point",
        c);
  }
  {
    RunConfig c;
    c.model.kind = "subshift";
    c.model.alphabet = 2;
    c.model.forbidden = {};
    c.model.window = 3;
    c.schedule.epsilons = {1.0, 0.5};
    c.schedule.deltas = {0.25, 0.125};
    c.schedule.radii = {0.5, 0.25, 0.125};
    c.entropy.r_grid = {0.5};
    c.entropy.b_grid = {0.1};
    add("full-shift", "full 2-shift on windows of radius 3", c);
  }
  {
    RunConfig c;
    c.model.kind = "subshift";
    c.model.alphabet = 2;
    c.model.forbidden = {"11"};
    c.model.window = 3;
    c.schedule.epsilons = {1.0, 0.5};
    c.schedule.deltas = {0.25, 0.125};
    c.schedule.radii = {0.5, 0.25};
    c.entropy.r_grid = {0.5};
    c.entropy.b_grid = {0.1};
    add("golden-mean", "golden-mean shift (no adjacent 1s) on windows", c);
  }
  {
    RunConfig c;
    c.model.kind = "example31";
    c.model.levels = 1;
    c.model.s = {0.5};
    c.model.window = 4;
    c.schedule.epsilons = {0.2, 0.1};
    c.schedule.deltas = {0.125, 0.0625};
    c.schedule.radii = {0.5, 0.25};
    c.entropy.r_grid = {0.5};
    c.entropy.b_grid = {0.05};
    c.entropy.n_min = 1;
    c.entropy.n_max = 8;
    add("example31",
        "level-stratified shift: low-level strata carry entropy, the top "
        "stratum is the unique terminal component",
        c);
  }
  return out;
}

inline const ZooEntry& zoo_lookup(const std::string& name) {
  static const std::vector<ZooEntry> systems = zoo_systems();
  for (const auto& e : systems)
    if (e.name == name) return e;
  throw ConfigError("unknown zoo system '" + name + "'");
}

}  // namespace chainscope
