#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chainscope/config.hpp"
#include "chainscope/digraph.hpp"
#include "chainscope/entropy.hpp"
#include "chainscope/model.hpp"
#include "chainscope/pointwise.hpp"

namespace chainscope {

enum class CheckStatus { confirmed, vacuous, violated, partial };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::confirmed: return "confirmed";
    case CheckStatus::vacuous: return "vacuous";
    case CheckStatus::violated: return "violated-at-resolution";
    case CheckStatus::partial: return "partial";
  }
  return "?";
}

struct TheoremCheck {
  std::string theorem_id;
  std::string system;
  CheckStatus status = CheckStatus::vacuous;
  json hypotheses = json::object();
  json conclusions = json::object();
  json witnesses = json::array();
  std::string note;

  json to_json() const {
    json j;
    j["schema_version"] = 1;
    j["theorem"] = theorem_id;
    j["system"] = system;
    j["status"] = to_string(status);
    j["hypotheses"] = hypotheses;
    j["conclusions"] = conclusions;
    j["witnesses"] = witnesses;
    if (!note.empty()) j["note"] = note;
    return j;
  }

  bool passing() const {
    return status == CheckStatus::confirmed || status == CheckStatus::vacuous;
  }
};

// Shared, memoized analysis state for one system at one configuration.
// Set-level memberships follow the quantifier pattern "for every scheduled
// epsilon there is a scheduled delta": since verdicts are monotone in delta,
// the existential is decided at the finest delta.
class SystemAnalysis {
public:
  explicit SystemAnalysis(const RunConfig& cfg)
      : cfg_(cfg), model_(build_model(cfg.model)) {
    cfg_.schedule.validate(model_);
    for (double r : cfg_.entropy.r_grid)
      if (!(r > 2.0 * model_.resolution_floor()))
        throw ResolutionError("r grid value " + format_double(r) +
                              " not above twice the resolution floor " +
                              format_double(model_.resolution_floor()));
    for (double d : cfg_.schedule.deltas)
      digraphs_.push_back(build_chain_digraph(model_, d, cfg_.jobs));
    for (const auto& g : digraphs_) decomps_.push_back(decompose(g));
    engine_ = std::make_unique<PointwiseEngine>(model_);
    const std::size_t n = model_.size();
    shadow_cache_.assign(n * eps_count() * delta_count(), -1);
    cc_cache_.assign(n * eps_count() * delta_count(), -1);
  }

  SystemAnalysis(const SystemAnalysis&) = delete;
  SystemAnalysis& operator=(const SystemAnalysis&) = delete;

  const RunConfig& config() const { return cfg_; }
  const FiniteModel& model() const { return model_; }
  std::size_t eps_count() const { return cfg_.schedule.epsilons.size(); }
  std::size_t delta_count() const { return cfg_.schedule.deltas.size(); }
  std::size_t finest_delta_index() const { return delta_count() - 1; }
  const ChainDigraph& digraph(std::size_t di) const { return digraphs_[di]; }
  const ComponentDecomposition& decomp(std::size_t di) const {
    return decomps_[di];
  }
  const ChainDigraph& finest_digraph() const { return digraphs_.back(); }
  const ComponentDecomposition& finest_decomp() const {
    return decomps_.back();
  }
  PointwiseEngine& engine() { return *engine_; }

  // --- per-(x, eps, delta) verdicts, tri-state cached -----------------------

  std::optional<bool> shadow(NodeId x, std::size_t ei, std::size_t di) {
    auto& slot = shadow_cache_[cache_index(x, ei, di)];
    if (slot == -1) {
      auto r = is_shadowable(*engine_, digraphs_[di], x,
                             cfg_.schedule.epsilons[ei],
                             cfg_.thresholds.fixpoint_state_cap);
      slot = r.capped ? 2 : (r.value() ? 1 : 0);
    }
    if (slot == 2) return std::nullopt;
    return slot == 1;
  }

  std::optional<bool> chain_cont(NodeId x, std::size_t ei, std::size_t di) {
    auto& slot = cc_cache_[cache_index(x, ei, di)];
    if (slot == -1) {
      auto r = is_chain_continuous(model_, digraphs_[di], x,
                                   cfg_.schedule.epsilons[ei],
                                   cfg_.thresholds.cc_step_cap);
      slot = r.capped ? 2 : (r.value() ? 1 : 0);
    }
    if (slot == 2) return std::nullopt;
    return slot == 1;
  }

  // --- schedule-quantified memberships --------------------------------------

  std::optional<bool> sh_member(NodeId x) {
    for (std::size_t ei = 0; ei < eps_count(); ++ei) {
      auto v = shadow(x, ei, finest_delta_index());
      if (!v) return std::nullopt;
      if (!*v) return false;
    }
    return true;
  }

  std::optional<bool> cc_member(NodeId x) {
    for (std::size_t ei = 0; ei < eps_count(); ++ei) {
      auto v = chain_cont(x, ei, finest_delta_index());
      if (!v) return std::nullopt;
      if (!*v) return false;
    }
    return true;
  }

  bool sensitive(NodeId x, double r) {
    auto key = std::make_pair(x, r);
    auto it = sen_cache_.find(key);
    if (it != sen_cache_.end()) return it->second;
    bool v = is_sensitive(model_, x, r, cfg_.schedule.radii).verdict;
    sen_cache_.emplace(key, v);
    return v;
  }

  // Interior sensitivity: the whole smallest scheduled ball around x is
  // r-sensitive.
  bool interior_sensitive(NodeId x, double r) {
    auto key = std::make_pair(x, r);
    auto it = int_sen_cache_.find(key);
    if (it != int_sen_cache_.end()) return it->second;
    bool v = true;
    for (NodeId y : ball_nodes(model_, x, cfg_.schedule.radii.back()))
      if (!sensitive(y, r)) {
        v = false;
        break;
      }
    int_sen_cache_.emplace(key, v);
    return v;
  }

  bool entropy_point(NodeId x, double s) {
    auto key = std::make_pair(x, s);
    auto it = ent_cache_.find(key);
    if (it != ent_cache_.end()) return it->second.verdict;
    auto r = entropy_point_test(model_, x, s, cfg_.schedule.radii,
                                cfg_.entropy.n_min, cfg_.entropy.n_max,
                                cfg_.thresholds.theta,
                                cfg_.thresholds.exact_separated_cap);
    return ent_cache_.emplace(key, std::move(r)).first->second.verdict;
  }

  double entropy_point_min_slope(NodeId x, double s) {
    entropy_point(x, s);
    const auto& per = ent_cache_.at(std::make_pair(x, s)).per_radius;
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& e : per) mn = std::min(mn, e.value);
    return mn;
  }

  bool uniform_entropy_point(NodeId x) {
    auto it = entup_cache_.find(x);
    if (it != entup_cache_.end()) return it->second;
    bool v = ent_up_member(model_, x, cfg_.entropy.r_grid, cfg_.entropy.b_grid,
                           cfg_.schedule.radii, cfg_.entropy.n_min,
                           cfg_.entropy.n_max,
                           cfg_.thresholds.exact_separated_cap);
    entup_cache_.emplace(x, v);
    return v;
  }

  // All nodes shadowable at the finest scheduled resolution (the strongest
  // finite reading of a denseness hypothesis).
  std::optional<bool> all_shadowable_finest() {
    if (all_sh_finest_.has_value()) return all_sh_finest_;
    bool capped = false;
    bool all = true;
    for (std::size_t x = 0; x < model_.size() && all; ++x) {
      auto v = shadow(static_cast<NodeId>(x), eps_count() - 1,
                      finest_delta_index());
      if (!v) {
        capped = true;
        break;
      }
      if (!*v) all = false;
    }
    if (capped) return std::nullopt;
    all_sh_finest_ = all;
    return all_sh_finest_;
  }

  std::int32_t omega_comp(NodeId x) {
    if (omega_cache_.empty()) omega_cache_.assign(model_.size(), -2);
    if (omega_cache_[x] == -2)
      omega_cache_[x] = omega_component(model_, finest_decomp(), x);
    return omega_cache_[x];
  }

  // --- restricted models ----------------------------------------------------

  // Memoized restricted analysis on a component of the finest decomposition
  // (schedules inherited; deltas below the restricted proj_error dropped).
  struct Restricted {
    FiniteModel model;
    std::vector<double> deltas;
    std::vector<ChainDigraph> graphs;
    std::unique_ptr<PointwiseEngine> engine;
    std::vector<NodeId> nodes;  // original ids, sorted (restricted id = rank)
    bool no_valid_delta = false;

    std::optional<NodeId> local_id(NodeId orig) const {
      auto it = std::lower_bound(nodes.begin(), nodes.end(), orig);
      if (it == nodes.end() || *it != orig) return std::nullopt;
      return static_cast<NodeId>(it - nodes.begin());
    }
  };

  const Restricted& restricted(const std::vector<NodeId>& nodes) {
    auto key = nodes;
    std::sort(key.begin(), key.end());
    auto it = restricted_cache_.find(key);
    if (it != restricted_cache_.end()) return *it->second;
    auto r = std::make_unique<Restricted>();
    r->nodes = key;
    r->model = restrict_model(model_, key);
    for (double d : cfg_.schedule.deltas)
      if (d >= r->model.proj_error) r->deltas.push_back(d);
    if (r->deltas.empty())
      r->no_valid_delta = true;
    else
      for (double d : r->deltas)
        r->graphs.push_back(build_chain_digraph(r->model, d, cfg_.jobs));
    r->engine = std::make_unique<PointwiseEngine>(r->model);
    return *restricted_cache_.emplace(std::move(key), std::move(r))
                .first->second;
  }

  // Chain continuity membership inside the restricted model.
  std::optional<bool> cc_member_restricted(const Restricted& r, NodeId orig) {
    if (r.no_valid_delta) return std::nullopt;
    auto lid = r.local_id(orig);
    if (!lid) throw Error("cc_member_restricted: node not in restriction");
    const auto& g = r.graphs.back();
    for (double eps : cfg_.schedule.epsilons) {
      if (eps < r.model.resolution_floor()) return std::nullopt;
      auto v = is_chain_continuous(r.model, g, *lid, eps,
                                   cfg_.thresholds.cc_step_cap);
      if (v.capped) return std::nullopt;
      if (!v.value()) return false;
    }
    return true;
  }

  std::optional<bool> sh_member_restricted(const Restricted& r, NodeId orig,
                                           double slack) {
    if (r.no_valid_delta) return std::nullopt;
    auto lid = r.local_id(orig);
    if (!lid) throw Error("sh_member_restricted: node not in restriction");
    const auto& g = r.graphs.back();
    for (double eps : cfg_.schedule.epsilons) {
      double e = eps + slack;
      if (e < r.model.resolution_floor()) return std::nullopt;
      auto v = is_shadowable(*r.engine, g, *lid, e,
                             cfg_.thresholds.fixpoint_state_cap);
      if (v.capped) return std::nullopt;
      if (!v.value()) return false;
    }
    return true;
  }

private:
  std::size_t cache_index(NodeId x, std::size_t ei, std::size_t di) const {
    return (static_cast<std::size_t>(x) * eps_count() + ei) * delta_count() +
           di;
  }

  RunConfig cfg_;
  FiniteModel model_;
  std::vector<ChainDigraph> digraphs_;
  std::vector<ComponentDecomposition> decomps_;
  std::unique_ptr<PointwiseEngine> engine_;
  std::vector<std::int8_t> shadow_cache_, cc_cache_;
  std::map<std::pair<NodeId, double>, bool> sen_cache_, int_sen_cache_;
  std::map<std::pair<NodeId, double>, EntropyPointResult> ent_cache_;
  std::map<NodeId, bool> entup_cache_;
  std::vector<std::int32_t> omega_cache_;
  std::optional<bool> all_sh_finest_;
  std::map<std::vector<NodeId>, std::unique_ptr<Restricted>> restricted_cache_;
};

// ---------------------------------------------------------------------------
// Individual checks
// ---------------------------------------------------------------------------

namespace detail {

inline void finalize_status(TheoremCheck& chk, bool any_scope, bool violated,
                            bool capped) {
  if (violated)
    chk.status = CheckStatus::violated;
  else if (capped)
    chk.status = CheckStatus::partial;
  else if (any_scope)
    chk.status = CheckStatus::confirmed;
  else
    chk.status = CheckStatus::vacuous;
}

}  // namespace detail

// Every node reaches some terminal component.
inline TheoremCheck check_every_node_reaches_terminal(SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "L1.1";
  chk.system = sa.config().system;
  const auto& g = sa.finest_digraph();
  const auto& d = sa.finest_decomp();
  auto ok = reaches_terminal_component(g, d);
  bool violated = false;
  for (std::size_t v = 0; v < ok.size(); ++v)
    if (!ok[v]) {
      violated = true;
      chk.witnesses.push_back({{"node", v}});
    }
  std::size_t terminals = 0;
  for (auto t : d.terminal)
    if (t) ++terminals;
  chk.hypotheses["delta"] = g.delta;
  chk.conclusions["terminal_components"] = terminals;
  chk.conclusions["components"] = d.component_count();
  detail::finalize_status(chk, true, violated, false);
  return chk;
}

// Shadowable sensitive points over terminal omega-components are entropy
// points at every smaller scale (checked at s = r/2); interior sensitivity
// is checked as a second clause.
inline TheoremCheck check_sensitive_terminal_entropy(SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "T1.1";
  chk.system = sa.config().system;
  const auto& d = sa.finest_decomp();
  bool any_scope = false, violated = false, capped = false;
  std::size_t scope1 = 0, scope2 = 0;
  double min_slope = std::numeric_limits<double>::infinity();
  for (double r : sa.config().entropy.r_grid) {
    double s = r / 2.0;
    for (std::size_t xi = 0; xi < sa.model().size(); ++xi) {
      NodeId x = static_cast<NodeId>(xi);
      auto sh = sa.sh_member(x);
      if (!sh) {
        capped = true;
        continue;
      }
      if (!*sh) continue;
      bool clause1 = d.terminal[sa.omega_comp(x)] && sa.sensitive(x, r);
      bool clause2 = sa.interior_sensitive(x, r);
      if (!clause1 && !clause2) continue;
      any_scope = true;
      if (clause1) ++scope1;
      if (clause2) ++scope2;
      bool concl = sa.entropy_point(x, s);
      min_slope = std::min(min_slope, sa.entropy_point_min_slope(x, s));
      if (!concl) {
        violated = true;
        if (chk.witnesses.size() < 10)
          chk.witnesses.push_back({{"node", x},
                                   {"label", sa.model().label(x)},
                                   {"r", r},
                                   {"s", s},
                                   {"clause", clause1 ? 1 : 2}});
      }
    }
  }
  chk.hypotheses["terminal_sensitive_nodes"] = scope1;
  chk.hypotheses["interior_sensitive_nodes"] = scope2;
  if (any_scope) chk.conclusions["min_ball_slope"] = min_slope;
  detail::finalize_status(chk, any_scope, violated, capped);
  return chk;
}

// Under a dense-shadowing surrogate, interior sensitivity forces entropy
// points at s = r/2.
inline TheoremCheck check_dense_shadowing_sensitivity_entropy(
    SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "T1.2";
  chk.system = sa.config().system;
  auto all_sh = sa.all_shadowable_finest();
  if (!all_sh) {
    chk.status = CheckStatus::partial;
    chk.note = "shadowing verdicts capped";
    return chk;
  }
  chk.hypotheses["all_nodes_shadowable_at_finest"] = *all_sh;
  if (!*all_sh) {
    chk.status = CheckStatus::vacuous;
    chk.note = "dense-shadowing surrogate fails";
    return chk;
  }
  bool any_scope = false, violated = false;
  double min_slope = std::numeric_limits<double>::infinity();
  std::size_t scope = 0;
  for (double r : sa.config().entropy.r_grid) {
    double s = r / 2.0;
    for (std::size_t xi = 0; xi < sa.model().size(); ++xi) {
      NodeId x = static_cast<NodeId>(xi);
      if (!sa.interior_sensitive(x, r)) continue;
      any_scope = true;
      ++scope;
      if (!sa.entropy_point(x, s)) {
        violated = true;
        if (chk.witnesses.size() < 10)
          chk.witnesses.push_back(
              {{"node", x}, {"label", sa.model().label(x)}, {"r", r}});
      }
      min_slope = std::min(min_slope, sa.entropy_point_min_slope(x, s));
    }
  }
  chk.hypotheses["interior_sensitive_nodes"] = scope;
  if (any_scope) chk.conclusions["min_ball_slope"] = min_slope;
  detail::finalize_status(chk, any_scope, violated, false);
  if (!any_scope) chk.note = "no interior-sensitive nodes";
  return chk;
}

// At zero spectral chain entropy, dense shadowing and dense chain
// continuity must agree (both directions reported).
inline TheoremCheck check_zero_entropy_shadowing_vs_continuity(
    SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "T1.3";
  chk.system = sa.config().system;
  auto spec = spectral_chain_entropy(sa.finest_digraph());
  chk.hypotheses["spectral_entropy"] = spec.value;
  chk.hypotheses["theta"] = sa.config().thresholds.theta;
  if (spec.capped) {
    chk.status = CheckStatus::partial;
    return chk;
  }
  if (spec.value > sa.config().thresholds.theta) {
    chk.status = CheckStatus::vacuous;
    chk.note = "spectral entropy above theta";
    return chk;
  }
  bool capped = false;
  bool all_sh = true, all_cc = true;
  std::optional<NodeId> sh_witness, cc_witness;
  for (std::size_t xi = 0; xi < sa.model().size(); ++xi) {
    NodeId x = static_cast<NodeId>(xi);
    auto sv = sa.sh_member(x);
    auto cv = sa.cc_member(x);
    if (!sv || !cv) {
      capped = true;
      continue;
    }
    if (!*sv && all_sh) {
      all_sh = false;
      sh_witness = x;
    }
    if (!*cv && all_cc) {
      all_cc = false;
      cc_witness = x;
    }
  }
  chk.conclusions["dense_shadowing"] = all_sh;
  chk.conclusions["dense_chain_continuity"] = all_cc;
  chk.conclusions["forward_implication"] = (!all_sh || all_cc);
  chk.conclusions["backward_implication"] = (!all_cc || all_sh);
  bool violated = all_sh != all_cc;
  if (violated) {
    if (sh_witness) chk.witnesses.push_back({{"non_shadowable", *sh_witness}});
    if (cc_witness)
      chk.witnesses.push_back({{"non_chain_continuous", *cc_witness}});
  }
  detail::finalize_status(chk, true, violated, capped);
  return chk;
}

// Under total shadowing, "every node is a uniform entropy point" must agree
// with "every terminal component carries positive spectral entropy".
inline TheoremCheck check_uniform_entropy_vs_terminal_entropy(
    SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "T1.4";
  chk.system = sa.config().system;
  auto all_sh = sa.all_shadowable_finest();
  if (!all_sh) {
    chk.status = CheckStatus::partial;
    return chk;
  }
  chk.hypotheses["all_nodes_shadowable_at_finest"] = *all_sh;
  if (!*all_sh) {
    chk.status = CheckStatus::vacuous;
    chk.note = "total-shadowing surrogate fails";
    return chk;
  }
  bool a_side = true;
  std::optional<NodeId> a_witness;
  for (std::size_t xi = 0; xi < sa.model().size(); ++xi) {
    if (!sa.uniform_entropy_point(static_cast<NodeId>(xi))) {
      a_side = false;
      a_witness = static_cast<NodeId>(xi);
      break;
    }
  }
  const auto& d = sa.finest_decomp();
  bool b_side = true;
  json comp_entropies = json::array();
  for (std::size_t c = 0; c < d.component_count(); ++c) {
    if (!d.terminal[c]) continue;
    auto sub = induced_subgraph(sa.finest_digraph(), d.components[c]);
    auto est = spectral_chain_entropy(sub);
    comp_entropies.push_back({{"component", c},
                              {"size", d.components[c].size()},
                              {"entropy", est.value}});
    if (!(est.value > sa.config().thresholds.theta)) b_side = false;
  }
  chk.conclusions["all_uniform_entropy_points"] = a_side;
  chk.conclusions["all_terminal_components_positive"] = b_side;
  chk.conclusions["terminal_component_entropies"] = comp_entropies;
  bool violated = a_side != b_side;
  if (violated && a_witness)
    chk.witnesses.push_back({{"non_uniform_entropy_node", *a_witness}});
  detail::finalize_status(chk, true, violated, false);
  return chk;
}

// Four equivalent descriptions of chain-continuity points, checked per node.
inline TheoremCheck check_chain_continuity_equivalences(SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "A.1";
  chk.system = sa.config().system;
  const auto& d = sa.finest_decomp();
  bool violated = false, capped = false;
  std::size_t cc_nodes = 0;
  for (std::size_t xi = 0; xi < sa.model().size(); ++xi) {
    NodeId x = static_cast<NodeId>(xi);
    auto a = sa.cc_member(x);
    if (!a) {
      capped = true;
      continue;
    }
    auto comp = sa.omega_comp(x);
    bool term = d.terminal[comp];
    std::optional<bool> b, c, dd;
    if (!term) {
      b = c = dd = false;
    } else {
      const auto& rest = sa.restricted(d.components[comp]);
      bool all_cc = true, sub_all = true, sub_any = false, node_capped = false;
      for (NodeId y : d.components[comp]) {
        auto v = sa.cc_member(y);
        auto w = sa.cc_member_restricted(rest, y);
        if (!v || !w) {
          node_capped = true;
          break;
        }
        all_cc = all_cc && *v;
        sub_all = sub_all && *w;
        sub_any = sub_any || *w;
      }
      if (node_capped) {
        capped = true;
        continue;
      }
      b = all_cc;
      c = sub_all;
      dd = sub_any;
    }
    if (*a) ++cc_nodes;
    bool agree = (*a == *b) && (*a == *c) && (*a == *dd);
    if (!agree) {
      violated = true;
      if (chk.witnesses.size() < 10)
        chk.witnesses.push_back({{"node", x},
                                 {"label", sa.model().label(x)},
                                 {"A_cc", *a},
                                 {"B_terminal_and_component_cc", *b},
                                 {"C_restricted_cc_everywhere", *c},
                                 {"D_restricted_cc_somewhere", *dd}});
    }
  }
  chk.conclusions["chain_continuity_points"] = cc_nodes;
  detail::finalize_status(chk, true, violated, capped);
  return chk;
}

// Shadowable chain-recurrent nodes stay shadowable in the restriction to the
// chain-recurrent set (epsilon slack = growth in projection error).
inline TheoremCheck check_shadowing_restricts_to_recurrent(SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "B.1";
  chk.system = sa.config().system;
  const auto& d = sa.finest_decomp();
  auto cr = d.cr_nodes.to_vector();
  if (cr.empty()) {
    chk.status = CheckStatus::vacuous;
    chk.note = "no chain-recurrent nodes";
    return chk;
  }
  const auto& rest = sa.restricted(cr);
  double slack =
      std::max(0.0, rest.model.proj_error - sa.model().proj_error);
  chk.hypotheses["cr_nodes"] = cr.size();
  chk.hypotheses["slack"] = slack;
  bool any_scope = false, violated = false, capped = false;
  for (NodeId x : cr) {
    auto sh = sa.sh_member(x);
    if (!sh) {
      capped = true;
      continue;
    }
    if (!*sh) continue;
    any_scope = true;
    auto rv = sa.sh_member_restricted(rest, x, slack);
    if (!rv) {
      capped = true;
      continue;
    }
    if (!*rv) {
      violated = true;
      if (chk.witnesses.size() < 10)
        chk.witnesses.push_back(
            {{"node", x}, {"label", sa.model().label(x)}});
    }
  }
  detail::finalize_status(chk, any_scope, violated, capped);
  if (!any_scope && !violated && !capped)
    chk.note = "no shadowable chain-recurrent nodes";
  return chk;
}

// Shadowability propagates along chain reachability (sampled pairs, one
// epsilon step of slack allowed and reported).
inline TheoremCheck check_shadowing_propagates(SystemAnalysis& sa) {
  TheoremCheck chk;
  chk.theorem_id = "L2.1";
  chk.system = sa.config().system;
  const auto& g = sa.finest_digraph();
  std::mt19937_64 rng(sa.config().seed);
  const std::size_t n = sa.model().size();
  std::size_t strict = 0, slack = 0;
  bool any_scope = false, violated = false, capped = false;
  std::size_t samples = sa.config().thresholds.check_pair_samples;
  for (std::size_t t = 0; t < samples; ++t) {
    NodeId x = static_cast<NodeId>(rng() % n);
    // Random reachable target: a short random walk.
    NodeId y = x;
    std::size_t steps = 1 + rng() % 6;
    for (std::size_t s = 0; s < steps; ++s) {
      auto out = g.out(y);
      if (out.empty()) break;
      y = out[rng() % out.size()];
    }
    for (std::size_t ei = 0; ei < sa.eps_count(); ++ei) {
      auto sx = sa.shadow(x, ei, sa.finest_delta_index());
      if (!sx) {
        capped = true;
        continue;
      }
      if (!*sx) continue;
      any_scope = true;
      auto sy = sa.shadow(y, ei, sa.finest_delta_index());
      if (!sy) {
        capped = true;
        continue;
      }
      if (*sy) {
        ++strict;
        continue;
      }
      bool ok_with_slack = false;
      if (ei > 0) {
        auto sy2 = sa.shadow(y, ei - 1, sa.finest_delta_index());
        if (!sy2)
          capped = true;
        else
          ok_with_slack = *sy2;
      }
      if (ok_with_slack) {
        ++slack;
      } else {
        violated = true;
        if (chk.witnesses.size() < 10)
          chk.witnesses.push_back({{"from", x},
                                   {"to", y},
                                   {"epsilon", sa.config().schedule.epsilons[ei]}});
      }
    }
  }
  chk.hypotheses["sampled_pairs"] = samples;
  chk.conclusions["strict"] = strict;
  chk.conclusions["with_slack"] = slack;
  detail::finalize_status(chk, any_scope, violated, capped);
  return chk;
}

// ---------------------------------------------------------------------------
// Check registry
// ---------------------------------------------------------------------------

inline std::vector<std::string> all_theorem_ids() {
  return {"L1.1", "T1.1", "T1.2", "T1.3", "T1.4", "A.1", "B.1", "L2.1"};
}

inline std::string canonical_theorem_id(std::string id) {
  for (auto& c : id) c = static_cast<char>(std::toupper(c));
  if (id == "1.1") return "T1.1";
  if (id == "1.2") return "T1.2";
  if (id == "1.3") return "T1.3";
  if (id == "1.4") return "T1.4";
  if (id == "A1") return "A.1";
  if (id == "B1") return "B.1";
  if (id == "L11" || id == "L1.1") return "L1.1";
  if (id == "L21" || id == "L2.1") return "L2.1";
  for (const auto& known : all_theorem_ids())
    if (id == known) return known;
  throw ConfigError("unknown theorem id '" + id + "'");
}

inline TheoremCheck run_check(SystemAnalysis& sa, const std::string& id) {
  auto cid = canonical_theorem_id(id);
  if (cid == "L1.1") return check_every_node_reaches_terminal(sa);
  if (cid == "T1.1") return check_sensitive_terminal_entropy(sa);
  if (cid == "T1.2") return check_dense_shadowing_sensitivity_entropy(sa);
  if (cid == "T1.3") return check_zero_entropy_shadowing_vs_continuity(sa);
  if (cid == "T1.4") return check_uniform_entropy_vs_terminal_entropy(sa);
  if (cid == "A.1") return check_chain_continuity_equivalences(sa);
  if (cid == "B.1") return check_shadowing_restricts_to_recurrent(sa);
  if (cid == "L2.1") return check_shadowing_propagates(sa);
  throw ConfigError("unknown theorem id '" + id + "'");
}

inline std::vector<TheoremCheck> run_checks(SystemAnalysis& sa,
                                            std::vector<std::string> ids) {
  if (ids.empty()) ids = all_theorem_ids();
  std::vector<TheoremCheck> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(run_check(sa, id));
  return out;
}

}  // namespace chainscope
