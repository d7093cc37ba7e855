#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chainscope/config.hpp"
#include "chainscope/harness.hpp"

namespace chainscope {

inline json run_meta(const RunConfig& cfg) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(cfg);
  return j;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << content;
}

inline std::string csv_header_comment(const RunConfig& cfg) {
  return std::string("# ") + kToolName + " " + kVersion +
         " config=" + config_hash(cfg) + "\n";
}

// One row per point: index, label, image index. Stable across runs.
inline std::string model_export_csv(const RunConfig& cfg,
                                    const FiniteModel& m) {
  std::ostringstream os;
  os << csv_header_comment(cfg);
  os << "# kind=" << m.kind << " proj_error=" << format_double(m.proj_error)
     << " mesh=" << format_double(m.mesh) << " size=" << m.size() << "\n";
  os << "index,label,image\n";
  for (std::size_t i = 0; i < m.size(); ++i)
    os << i << "," << m.label(static_cast<NodeId>(i)) << "," << m.image[i]
       << "\n";
  return os.str();
}

inline json components_json(SystemAnalysis& sa) {
  json out;
  out["meta"] = run_meta(sa.config());
  out["system"] = sa.config().system;
  json per_delta = json::array();
  for (std::size_t di = 0; di < sa.delta_count(); ++di) {
    const auto& d = sa.decomp(di);
    const auto& g = sa.digraph(di);
    json dj;
    dj["delta"] = sa.config().schedule.deltas[di];
    dj["cr_node_count"] = d.cr_nodes.count();
    json comps = json::array();
    for (std::size_t c = 0; c < d.component_count(); ++c) {
      json cj;
      cj["id"] = c;
      cj["size"] = d.components[c].size();
      cj["terminal"] = static_cast<bool>(d.terminal[c]);
      cj["stability_margin"] = chain_stability_margin(
          sa.model(), g, d, static_cast<std::int32_t>(c));
      cj["nodes"] = d.components[c];
      comps.push_back(cj);
    }
    dj["components"] = comps;
    per_delta.push_back(dj);
  }
  out["per_delta"] = per_delta;
  return out;
}

// Per-point verdict grids with witnesses as index sequences.
inline json points_json(SystemAnalysis& sa) {
  const auto& cfg = sa.config();
  json out;
  out["meta"] = run_meta(cfg);
  out["system"] = cfg.system;
  out["epsilons"] = cfg.schedule.epsilons;
  out["deltas"] = cfg.schedule.deltas;
  out["radii"] = cfg.schedule.radii;
  out["r_grid"] = cfg.entropy.r_grid;
  std::size_t limit =
      std::min<std::size_t>(sa.model().size(), cfg.thresholds.point_report_cap);
  if (limit < sa.model().size()) out["truncated_to"] = limit;
  json pts = json::array();
  PointwiseEngine& eng = sa.engine();
  for (std::size_t xi = 0; xi < limit; ++xi) {
    NodeId x = static_cast<NodeId>(xi);
    json pj;
    pj["node"] = x;
    pj["label"] = sa.model().label(x);
    json shadow = json::array(), cc = json::array();
    for (std::size_t ei = 0; ei < sa.eps_count(); ++ei) {
      json srow = json::array(), crow = json::array();
      for (std::size_t di = 0; di < sa.delta_count(); ++di) {
        auto sv = sa.shadow(x, ei, di);
        auto cv = sa.chain_cont(x, ei, di);
        srow.push_back(sv ? json(*sv) : json("capped"));
        crow.push_back(cv ? json(*cv) : json("capped"));
      }
      shadow.push_back(srow);
      cc.push_back(crow);
    }
    pj["shadowable"] = shadow;
    pj["chain_continuous"] = cc;
    json eq = json::array();
    for (double eps : cfg.schedule.epsilons)
      eq.push_back(
          is_equicontinuous(sa.model(), x, eps, cfg.schedule.radii));
    pj["equicontinuous"] = eq;
    json sens = json::object();
    for (double r : cfg.entropy.r_grid) {
      auto res = is_sensitive(sa.model(), x, r, cfg.schedule.radii);
      json rj;
      rj["verdict"] = res.verdict;
      if (res.witness)
        rj["witness"] = {{"y", res.witness->y},
                         {"z", res.witness->z},
                         {"step", res.witness->step},
                         {"separation", res.witness->separation}};
      sens[format_double(r)] = rj;
    }
    pj["sensitive"] = sens;
    json csens = json::object();
    for (double r : cfg.entropy.r_grid) {
      auto res = chain_sensitive_star(sa.model(), sa.finest_digraph(), x, r,
                                      cfg.thresholds.product_pair_cap);
      json rj;
      if (res.capped) {
        rj["verdict"] = "capped";
      } else {
        rj["verdict"] = *res.verdict;
        if (*res.verdict) {
          rj["chain0"] = res.chain0;
          rj["chain1"] = res.chain1;
        }
      }
      csens[format_double(r)] = rj;
    }
    pj["chain_sensitive"] = csens;
    pts.push_back(pj);
  }
  (void)eng;
  out["points"] = pts;
  return out;
}

// (n, r, delta, region, count, slope) rows:
//   - separated-count series per r on the whole node set,
//   - chain-entropy (spectral) rows per delta for the whole digraph and per
//     chain component.
inline std::string entropy_csv(SystemAnalysis& sa) {
  const auto& cfg = sa.config();
  std::ostringstream os;
  os << csv_header_comment(cfg);
  os << "n,r,delta,region,count,slope\n";
  std::vector<NodeId> whole;
  for (std::size_t i = 0; i < sa.model().size(); ++i)
    whole.push_back(static_cast<NodeId>(i));
  for (double r : cfg.entropy.r_grid) {
    auto est = entropy_slope(sa.model(), whole, r, cfg.entropy.n_min,
                             cfg.entropy.n_max,
                             cfg.thresholds.exact_separated_cap);
    for (auto [n, c] : est.counts)
      os << n << "," << format_double(r) << ",,X," << format_double(c) << ","
         << format_double(est.value) << "\n";
  }
  for (std::size_t di = 0; di < sa.delta_count(); ++di) {
    double delta = cfg.schedule.deltas[di];
    auto est = spectral_chain_entropy(sa.digraph(di));
    os << ",," << format_double(delta) << ",X,," << format_double(est.value)
       << "\n";
    const auto& d = sa.decomp(di);
    for (std::size_t c = 0; c < d.component_count(); ++c) {
      auto sub = induced_subgraph(sa.digraph(di), d.components[c]);
      auto ce = spectral_chain_entropy(sub);
      os << ",," << format_double(delta) << ",component:" << c << ",,"
         << format_double(ce.value) << "\n";
    }
  }
  return os.str();
}

inline std::string condensation_dot_annotated(SystemAnalysis& sa) {
  const auto& d = sa.finest_decomp();
  std::vector<std::string> notes(d.component_count());
  for (std::size_t c = 0; c < d.component_count(); ++c) {
    auto sub = induced_subgraph(sa.finest_digraph(), d.components[c]);
    auto est = spectral_chain_entropy(sub);
    notes[c] = "h=" + format_double(est.value);
  }
  return condensation_dot(sa.finest_digraph(), d, notes);
}

// Writes the full analyze bundle into cfg.out_dir. Deterministic content:
// identical configs yield byte-identical files.
inline void write_analysis(SystemAnalysis& sa) {
  const auto& cfg = sa.config();
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  {
    json run = run_meta(cfg);
    run["config"] = to_json(cfg);
    write_file(dir / "run.json", run.dump(2) + "\n");
  }
  write_file(dir / "model.csv", model_export_csv(cfg, sa.model()));
  write_file(dir / "components.json", components_json(sa).dump(2) + "\n");
  write_file(dir / "points.json", points_json(sa).dump(2) + "\n");
  write_file(dir / "entropy.csv", entropy_csv(sa));
  write_file(dir / "condensation.dot", condensation_dot_annotated(sa));
  write_file(dir / "edges.csv",
             csv_header_comment(cfg) + edges_csv(sa.finest_digraph()));
}

// Writes per-theorem reports and a summary; returns the CLI exit code
// (0 = all confirmed or vacuous, 1 = any violated or partial).
inline int write_checks(SystemAnalysis& sa,
                        const std::vector<TheoremCheck>& checks,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  bool bad = false;
  std::ostringstream summary;
  summary << csv_header_comment(sa.config());
  summary << "system,theorem,status\n";
  for (const auto& chk : checks) {
    json j = chk.to_json();
    j["meta"] = run_meta(sa.config());
    std::string stem = "check_" + chk.system + "_" + chk.theorem_id;
    for (auto& ch : stem)
      if (ch == '.') ch = '_';
    write_file(dir / (stem + ".json"), j.dump(2) + "\n");
    summary << chk.system << "," << chk.theorem_id << ","
            << to_string(chk.status) << "\n";
    if (!chk.passing()) bad = true;
  }
  write_file(dir / ("summary_" + sa.config().system + ".csv"), summary.str());
  return bad ? 1 : 0;
}

}  // namespace chainscope
