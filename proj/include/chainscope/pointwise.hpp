#pragma once

#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chainscope/common.hpp"
#include "chainscope/digraph.hpp"
#include "chainscope/model.hpp"

namespace chainscope {

// Closed-ball membership helper with per-epsilon caching.
class BallCache {
public:
  BallCache(const FiniteModel& m, double eps) : m_(&m), eps_(eps) {}

  const NodeSet& ball(NodeId center) {
    auto it = cache_.find(center);
    if (it != cache_.end()) return it->second;
    NodeSet s(m_->size());
    for (std::size_t j = 0; j < m_->size(); ++j)
      if (m_->dist(center, static_cast<NodeId>(j)) <= eps_)
        s.set(j);
    return cache_.emplace(center, std::move(s)).first->second;
  }

  double epsilon() const { return eps_; }

private:
  const FiniteModel* m_;
  double eps_;
  std::unordered_map<NodeId, NodeSet> cache_;
};

// Per-node transition-target bitsets (the model's own dynamics, not the
// delta-digraph).
inline std::vector<NodeSet> successor_bitsets(const FiniteModel& m) {
  std::vector<NodeSet> out(m.size(), NodeSet(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (NodeId s : m.succ(static_cast<NodeId>(i))) out[i].set(s);
  return out;
}

struct ShadowResult {
  std::optional<bool> verdict;  // nullopt when the state cap was hit
  bool capped = false;
  std::vector<NodeId> counterexample_chain;  // nonempty when verdict == false
  std::size_t states = 0;

  bool value() const {
    if (!verdict) throw CapacityError("shadowing verdict capped");
    return *verdict;
  }
};

// Shared per-model scratch for pointwise analyses: transition bitsets and
// closed-ball caches keyed by epsilon.
class PointwiseEngine {
public:
  explicit PointwiseEngine(const FiniteModel& m)
      : m_(&m), succ_bits_(successor_bitsets(m)) {}

  const FiniteModel& model() const { return *m_; }
  const std::vector<NodeSet>& succ_bits() const { return succ_bits_; }

  const NodeSet& ball(double eps, NodeId center) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& per_eps = balls_[eps];
    auto it = per_eps.find(center);
    if (it != per_eps.end()) return it->second;
    NodeSet s(m_->size());
    for (std::size_t j = 0; j < m_->size(); ++j)
      if (m_->dist(center, static_cast<NodeId>(j)) <= eps) s.set(j);
    return per_eps.emplace(center, std::move(s)).first->second;
  }

private:
  const FiniteModel* m_;
  std::vector<NodeSet> succ_bits_;
  std::mutex mutex_;
  std::map<double, std::unordered_map<NodeId, NodeSet>> balls_;
};

// Exact pointwise shadowing at fixed (epsilon, delta).
//
// A state is (chain head v, candidate set Y): Y holds every point whose
// trajectory so far tracks the chain within epsilon. The verdict is false
// exactly when a chain drives Y empty. Transitions follow edges of the
// delta-digraph; candidates advance along the model's own transition sets.
// States are memoized per head with subset pruning: a state (v, Y) is
// subsumed by a visited (v, Y') with Y' a subset of Y, because any chain
// suffix that empties Y also empties Y'.
inline ShadowResult is_shadowable(PointwiseEngine& eng, const ChainDigraph& g,
                                  NodeId x, double eps,
                                  std::size_t state_cap = 2000000) {
  const FiniteModel& m = eng.model();
  if (eps < m.resolution_floor())
    throw ResolutionError("is_shadowable: epsilon " + format_double(eps) +
                          " below resolution floor " +
                          format_double(m.resolution_floor()));
  const std::size_t n = m.size();
  const auto& succ_bits = eng.succ_bits();

  struct State {
    NodeId v;
    NodeSet y;
    std::int64_t parent;
  };
  std::vector<State> arena;
  std::vector<std::vector<std::size_t>> antichain(n);

  auto subsumed = [&](NodeId v, const NodeSet& y) {
    for (auto si : antichain[v])
      if (arena[si].y.is_subset_of(y)) return true;
    return false;
  };
  auto remember = [&](NodeId v, std::size_t idx) {
    auto& list = antichain[v];
    list.erase(std::remove_if(list.begin(), list.end(),
                              [&](std::size_t si) {
                                return arena[idx].y.is_subset_of(arena[si].y);
                              }),
               list.end());
    list.push_back(idx);
  };

  ShadowResult res;
  arena.push_back({x, eng.ball(eps, x), -1});
  remember(x, 0);
  std::deque<std::size_t> queue{0};

  auto rebuild_chain = [&](std::size_t idx, NodeId tail) {
    std::vector<NodeId> chain{tail};
    std::int64_t cur = static_cast<std::int64_t>(idx);
    while (cur >= 0) {
      chain.push_back(arena[cur].v);
      cur = arena[cur].parent;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
  };

  NodeSet advanced(n);
  while (!queue.empty()) {
    std::size_t idx = queue.front();
    queue.pop_front();
    NodeId v = arena[idx].v;
    advanced.reset();
    arena[idx].y.for_each([&](NodeId yv) { advanced |= succ_bits[yv]; });
    for (NodeId w : g.out(v)) {
      NodeSet cand = advanced;
      cand &= eng.ball(eps, w);
      if (cand.empty()) {
        res.verdict = false;
        res.counterexample_chain = rebuild_chain(idx, w);
        res.states = arena.size();
        return res;
      }
      if (subsumed(w, cand)) continue;
      if (arena.size() >= state_cap) {
        res.capped = true;
        res.states = arena.size();
        return res;
      }
      arena.push_back({w, std::move(cand), static_cast<std::int64_t>(idx)});
      remember(w, arena.size() - 1);
      queue.push_back(arena.size() - 1);
    }
  }
  res.verdict = true;
  res.states = arena.size();
  return res;
}

inline ShadowResult is_shadowable(const FiniteModel& m, const ChainDigraph& g,
                                  NodeId x, double eps,
                                  std::size_t state_cap = 2000000) {
  PointwiseEngine eng(m);
  return is_shadowable(eng, g, x, eps, state_cap);
}

// True iff the fixed chain is epsilon-tracked by some trajectory of the
// model (used by the entropy certificate).
inline bool chain_is_shadowed(const FiniteModel& m,
                              const std::vector<NodeId>& chain, double eps) {
  if (chain.empty()) return true;
  auto succ_bits = successor_bitsets(m);
  BallCache balls(m, eps);
  NodeSet y = balls.ball(chain[0]);
  NodeSet scratch(m.size());
  for (std::size_t t = 1; t < chain.size(); ++t) {
    scratch.reset();
    y.for_each([&](NodeId yv) { scratch |= succ_bits[yv]; });
    scratch &= balls.ball(chain[t]);
    if (scratch.empty()) return false;
    y = scratch;
  }
  return true;
}

inline std::vector<std::optional<bool>> sh_set(const FiniteModel& m,
                                               const ChainDigraph& g,
                                               double eps,
                                               std::size_t state_cap = 2000000,
                                               unsigned jobs = 1) {
  PointwiseEngine eng(m);
  std::vector<std::optional<bool>> out(m.size());
  parallel_for(m.size(), jobs, [&](std::size_t i) {
    out[i] =
        is_shadowable(eng, g, static_cast<NodeId>(i), eps, state_cap).verdict;
  });
  return out;
}

// Canonical orbit with cycle structure: positions for all t via pre-period
// and period.
struct Orbit {
  std::vector<NodeId> prefix;  // positions 0 .. pre+period-1
  std::size_t pre = 0, period = 1;

  NodeId at(std::size_t t) const {
    if (t < prefix.size()) return prefix[t];
    return prefix[pre + (t - pre) % period];
  }
  std::size_t closure_length() const { return pre + period; }
};

inline Orbit compute_orbit(const FiniteModel& m, NodeId x) {
  Orbit o;
  std::vector<std::int64_t> when(m.size(), -1);
  NodeId cur = x;
  while (when[cur] == -1) {
    when[cur] = static_cast<std::int64_t>(o.prefix.size());
    o.prefix.push_back(cur);
    cur = m.image[cur];
  }
  o.pre = static_cast<std::size_t>(when[cur]);
  o.period = o.prefix.size() - o.pre;
  return o;
}

struct ChainContinuityResult {
  std::optional<bool> verdict;
  bool capped = false;
  std::vector<NodeId> counterexample_chain;
  std::size_t steps = 0;

  bool value() const {
    if (!verdict) throw CapacityError("chain-continuity verdict capped");
    return *verdict;
  }
};

// Exact chain continuity at fixed (epsilon, delta): every chain layer
// reachable from x must stay within epsilon of the canonical orbit. The pair
// (orbit position, layer) evolves deterministically in a finite space, so we
// iterate until it repeats.
inline ChainContinuityResult is_chain_continuous(const FiniteModel& m,
                                                 const ChainDigraph& g,
                                                 NodeId x, double eps,
                                                 std::size_t step_cap = 20000) {
  if (eps < m.resolution_floor())
    throw ResolutionError("is_chain_continuous: epsilon below resolution floor");
  ChainContinuityResult res;
  Orbit orbit = compute_orbit(m, x);

  std::vector<NodeSet> layers;
  NodeSet layer(m.size());
  layer.set(x);
  layers.push_back(layer);
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::size_t, std::size_t>>>
      seen;  // hash -> (canonical orbit index, layer history index)

  auto canon_orbit_index = [&](std::size_t t) {
    return t < orbit.prefix.size() ? t : orbit.pre + (t - orbit.pre) % orbit.period;
  };

  for (std::size_t t = 0;; ++t) {
    NodeId pos = orbit.at(t);
    // Check the layer against the orbit position.
    std::optional<NodeId> violator;
    layers[t].for_each([&](NodeId v) {
      if (violator) return;
      if (m.dist(pos, v) > eps) violator = v;
    });
    if (violator) {
      res.verdict = false;
      res.steps = t;
      // Rebuild a violating chain backwards through the stored layers.
      std::vector<NodeId> chain{*violator};
      for (std::size_t back = t; back > 0; --back) {
        NodeId want = chain.back();
        NodeId found = x;
        bool ok = false;
        layers[back - 1].for_each([&](NodeId u) {
          if (ok) return;
          if (g.has_edge(u, want)) {
            found = u;
            ok = true;
          }
        });
        chain.push_back(found);
      }
      std::reverse(chain.begin(), chain.end());
      res.counterexample_chain = std::move(chain);
      return res;
    }

    // Cycle detection on (canonical orbit index, layer).
    std::size_t ci = canon_orbit_index(t);
    std::uint64_t h = layers[t].hash() * 1315423911ull + ci;
    auto& bucket = seen[h];
    for (auto [oi, li] : bucket) {
      if (oi == ci && layers[li] == layers[t]) {
        res.verdict = true;
        res.steps = t;
        return res;
      }
    }
    bucket.emplace_back(ci, t);

    if (t + 1 >= step_cap) {
      res.capped = true;
      res.steps = t;
      return res;
    }
    NodeSet next(m.size());
    layers[t].for_each([&](NodeId v) {
      for (NodeId w : g.out(v)) next.set(w);
    });
    layers.push_back(std::move(next));
  }
}

// Equicontinuity at epsilon: some scheduled radius rho has every y in the
// rho-ball tracking the orbit of x within epsilon forever.
inline bool is_equicontinuous(const FiniteModel& m, NodeId x, double eps,
                              const std::vector<double>& radii) {
  for (double rho : radii) {
    bool all_ok = true;
    for (std::size_t yi = 0; yi < m.size() && all_ok; ++yi) {
      NodeId y = static_cast<NodeId>(yi);
      if (m.dist(x, y) > rho) continue;
      NodeId a = x, b = y;
      std::unordered_set<std::uint64_t> seen;
      for (;;) {
        if (m.dist(a, b) > eps) {
          all_ok = false;
          break;
        }
        std::uint64_t key = static_cast<std::uint64_t>(a) * m.size() + b;
        if (!seen.insert(key).second) break;
        a = m.image[a];
        b = m.image[b];
      }
    }
    if (all_ok) return true;
  }
  return false;
}

struct SensitivityWitness {
  NodeId y = 0, z = 0;
  std::size_t step = 0;
  double separation = 0.0;
};

struct SensitivityResult {
  bool verdict = false;
  // Witness at the smallest scheduled radius when the verdict is positive.
  std::optional<SensitivityWitness> witness;
};

// r-sensitivity: at every scheduled radius, some pair in the ball around x
// develops orbit separation exceeding r.
inline SensitivityResult is_sensitive(const FiniteModel& m, NodeId x, double r,
                                      const std::vector<double>& radii) {
  if (!(r > 2.0 * m.resolution_floor()))
    throw ResolutionError("is_sensitive: r " + format_double(r) +
                          " not above twice the resolution floor " +
                          format_double(m.resolution_floor()));
  SensitivityResult res;
  std::optional<SensitivityWitness> smallest_witness;

  for (double rho : radii) {
    std::vector<NodeId> ball;
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m.dist(x, static_cast<NodeId>(j)) <= rho)
        ball.push_back(static_cast<NodeId>(j));
    std::optional<SensitivityWitness> found;
    for (std::size_t a = 0; a < ball.size() && !found; ++a) {
      for (std::size_t b = a; b < ball.size() && !found; ++b) {
        NodeId u = ball[a], v = ball[b];
        std::unordered_set<std::uint64_t> seen;
        std::size_t step = 0;
        NodeId pu = u, pv = v;
        for (;;) {
          double d = m.dist(pu, pv);
          if (d > r) {
            found = SensitivityWitness{u, v, step, d};
            break;
          }
          std::uint64_t key = static_cast<std::uint64_t>(pu) * m.size() + pv;
          if (!seen.insert(key).second) break;
          pu = m.image[pu];
          pv = m.image[pv];
          ++step;
        }
      }
    }
    if (!found) {
      res.verdict = false;
      res.witness.reset();
      return res;
    }
    smallest_witness = found;  // radii descend; the last kept is the smallest
  }
  res.verdict = true;
  res.witness = smallest_witness;
  return res;
}

struct ChainSensitivityResult {
  std::optional<bool> verdict;
  bool capped = false;
  std::vector<NodeId> chain0, chain1;  // equal-length witness chains from x
  double separation = 0.0;
};

// Chain sensitivity: two delta-chains from x whose endpoints separate by
// more than r. Decided by BFS over the product digraph.
inline ChainSensitivityResult chain_sensitive_star(
    const FiniteModel& m, const ChainDigraph& g, NodeId x, double r,
    std::size_t pair_cap = 30000000) {
  ChainSensitivityResult res;
  const std::size_t n = g.node_count;
  if (n * n > pair_cap) {
    res.capped = true;
    return res;
  }
  struct PairState {
    NodeId u, v;
    std::int64_t parent;
  };
  std::vector<PairState> arena;
  std::vector<char> visited(n * n, 0);
  auto key = [n](NodeId a, NodeId b) {
    NodeId lo = std::min(a, b), hi = std::max(a, b);
    return static_cast<std::size_t>(lo) * n + hi;
  };

  arena.push_back({x, x, -1});
  visited[key(x, x)] = 1;
  std::deque<std::size_t> q{0};

  auto rebuild = [&](std::size_t idx) {
    std::vector<NodeId> c0, c1;
    std::int64_t cur = static_cast<std::int64_t>(idx);
    while (cur >= 0) {
      c0.push_back(arena[cur].u);
      c1.push_back(arena[cur].v);
      cur = arena[cur].parent;
    }
    std::reverse(c0.begin(), c0.end());
    std::reverse(c1.begin(), c1.end());
    res.chain0 = std::move(c0);
    res.chain1 = std::move(c1);
  };

  while (!q.empty()) {
    std::size_t idx = q.front();
    q.pop_front();
    NodeId u = arena[idx].u, v = arena[idx].v;
    for (NodeId nu : g.out(u)) {
      for (NodeId nv : g.out(v)) {
        double d = m.dist(nu, nv);
        if (d > r) {
          arena.push_back({nu, nv, static_cast<std::int64_t>(idx)});
          res.verdict = true;
          res.separation = d;
          rebuild(arena.size() - 1);
          return res;
        }
        auto k = key(nu, nv);
        if (!visited[k]) {
          visited[k] = 1;
          if (arena.size() >= pair_cap) {
            res.capped = true;
            return res;
          }
          arena.push_back({nu, nv, static_cast<std::int64_t>(idx)});
          q.push_back(arena.size() - 1);
        }
      }
    }
  }
  res.verdict = false;
  return res;
}

}  // namespace chainscope
