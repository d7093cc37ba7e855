#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "chainscope/common.hpp"
#include "chainscope/digraph.hpp"
#include "chainscope/model.hpp"
#include "chainscope/pointwise.hpp"

namespace chainscope {

// A single entropy figure with its method, parameters, and bound direction.
// Values are in nats.
struct EntropyEstimate {
  double value = 0.0;
  std::string method;  // separated-slope | spectral | path-count | certificate | cover
  std::string bound;   // lower | upper | estimate
  std::map<std::string, std::string> params;
  std::vector<std::pair<int, double>> counts;  // (n, count) samples
  bool capped = false;
  double bracket_lo = 0.0, bracket_hi = 0.0;  // set when iteration hit its cap
};

inline std::vector<NodeId> ball_nodes(const FiniteModel& m, NodeId x,
                                      double rho) {
  std::vector<NodeId> out;
  for (std::size_t j = 0; j < m.size(); ++j)
    if (m.dist(x, static_cast<NodeId>(j)) <= rho)
      out.push_back(static_cast<NodeId>(j));
  return out;
}

// ---------------------------------------------------------------------------
// (n, r)-separated subsets of a region
// ---------------------------------------------------------------------------

namespace detail {

// Pairwise "separated within n steps" bit matrix over the region K.
inline std::vector<NodeSet> separation_matrix(const FiniteModel& m,
                                              const std::vector<NodeId>& K,
                                              std::size_t n, double r) {
  const std::size_t k = K.size();
  // Orbit rows f^t for t < n.
  std::vector<std::vector<NodeId>> rows(k, std::vector<NodeId>(n));
  for (std::size_t a = 0; a < k; ++a) {
    NodeId cur = K[a];
    for (std::size_t t = 0; t < n; ++t) {
      rows[a][t] = cur;
      cur = m.image[cur];
    }
  }
  std::vector<NodeSet> sep(k, NodeSet(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      for (std::size_t t = 0; t < n; ++t) {
        if (m.dist(rows[a][t], rows[b][t]) > r) {
          sep[a].set(b);
          sep[b].set(a);
          break;
        }
      }
    }
  }
  return sep;
}

// Exact maximum pairwise-adjacent subset (max clique) in the given relation,
// by branch and bound. Vertices are branched in degree-descending order.
class MaxCliqueSolver {
public:
  MaxCliqueSolver(const std::vector<NodeSet>& adj, std::size_t node_budget)
      : adj_(adj), budget_(node_budget) {}

  std::size_t solve() {
    const std::size_t k = adj_.size();
    order_.resize(k);
    for (std::size_t i = 0; i < k; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      auto da = adj_[a].count(), db = adj_[b].count();
      if (da != db) return da > db;
      return a < b;
    });
    NodeSet cand(k);
    for (std::size_t i = 0; i < k; ++i) cand.set(i);
    best_ = 0;
    expand(cand, 0);
    return best_;
  }

  bool capped() const { return capped_; }

private:
  void expand(const NodeSet& cand, std::size_t depth) {
    if (visited_++ > budget_) {
      capped_ = true;
      return;
    }
    if (depth + cand.count() <= best_) return;
    if (cand.empty()) {
      best_ = std::max(best_, depth);
      return;
    }
    // Branch on the highest-degree remaining candidate.
    std::size_t pick = adj_.size();
    for (std::size_t oi = 0; oi < order_.size(); ++oi) {
      if (cand.test(order_[oi])) {
        pick = order_[oi];
        break;
      }
    }
    NodeSet with = cand;
    with &= adj_[pick];
    expand(with, depth + 1);
    best_ = std::max(best_, depth);  // in case `with` pruned immediately
    NodeSet without = cand;
    without.clear(pick);
    if (depth + without.count() > best_) expand(without, depth);
  }

  const std::vector<NodeSet>& adj_;
  std::size_t budget_;
  std::vector<std::size_t> order_;
  std::size_t best_ = 0;
  std::size_t visited_ = 0;
  bool capped_ = false;
};

}  // namespace detail

enum class SeparatedMode { exact, greedy };

// Largest cardinality of an (n, r)-separated subset of K (exact mode), or a
// deterministic greedy lower bound.
inline std::size_t separated_count(const FiniteModel& m,
                                   const std::vector<NodeId>& K, std::size_t n,
                                   double r, SeparatedMode mode,
                                   std::size_t exact_cap = 24) {
  if (K.empty()) return 0;
  if (n == 0) throw ConfigError("separated_count: n must be >= 1");
  if (mode == SeparatedMode::exact) {
    if (K.size() > exact_cap)
      throw CapacityError("separated_count: region of " +
                          std::to_string(K.size()) +
                          " nodes exceeds the exact-mode cap " +
                          std::to_string(exact_cap));
    auto sep = detail::separation_matrix(m, K, n, r);
    detail::MaxCliqueSolver solver(sep, 50000000);
    auto best = solver.solve();
    if (solver.capped())
      throw CapacityError("separated_count: branch-and-bound budget exceeded");
    return best;
  }
  // Greedy: walk K in index order, keep nodes separated from all kept ones.
  std::vector<std::vector<NodeId>> kept_rows;
  std::size_t count = 0;
  for (NodeId v : K) {
    std::vector<NodeId> row(n);
    NodeId cur = v;
    for (std::size_t t = 0; t < n; ++t) {
      row[t] = cur;
      cur = m.image[cur];
    }
    bool ok = true;
    for (const auto& other : kept_rows) {
      bool sep = false;
      for (std::size_t t = 0; t < n && !sep; ++t)
        if (m.dist(row[t], other[t]) > r) sep = true;
      if (!sep) {
        ok = false;
        break;
      }
    }
    if (ok) {
      kept_rows.push_back(std::move(row));
      ++count;
    }
  }
  return count;
}

// Least-squares slope of log separated-counts over n in [n_min, n_max].
inline EntropyEstimate entropy_slope(const FiniteModel& m,
                                     const std::vector<NodeId>& K, double r,
                                     int n_min, int n_max,
                                     std::size_t exact_cap = 24) {
  if (n_min < 1 || n_max < n_min + 1)
    throw ConfigError("entropy_slope: degenerate n range");
  EntropyEstimate est;
  est.method = "separated-slope";
  est.bound = "estimate";
  const bool exact = K.size() <= exact_cap;
  est.params["mode"] = exact ? "exact" : "greedy";
  est.params["r"] = format_double(r);
  est.params["region_size"] = std::to_string(K.size());
  std::vector<double> xs, ys;
  std::size_t prev = 0;
  int saturated_at = -1;
  for (int n = n_min; n <= n_max; ++n) {
    std::size_t c = separated_count(
        m, K, static_cast<std::size_t>(n), r,
        exact ? SeparatedMode::exact : SeparatedMode::greedy, exact_cap);
    est.counts.emplace_back(n, static_cast<double>(c));
    xs.push_back(n);
    ys.push_back(std::log(static_cast<double>(std::max<std::size_t>(c, 1))));
    if (n > n_min && c == prev && saturated_at < 0) saturated_at = n;
    if (n > n_min && c != prev) saturated_at = -1;
    prev = c;
  }
  if (saturated_at >= 0)
    est.params["saturated_at"] = std::to_string(saturated_at);
  est.value = std::max(0.0, least_squares_slope(xs, ys));
  return est;
}

// ---------------------------------------------------------------------------
// Chain (pseudo-orbit) counting
// ---------------------------------------------------------------------------

// Number of paths with t edges, for t = 0..n, summed over all start nodes.
// Saturates at 2^62 and sets *overflow.
inline std::vector<std::uint64_t> path_counts(const ChainDigraph& g,
                                              std::size_t n,
                                              bool* overflow = nullptr) {
  constexpr std::uint64_t kCap = std::uint64_t{1} << 62;
  if (overflow) *overflow = false;
  std::vector<std::uint64_t> cur(g.node_count, 1), next(g.node_count);
  std::vector<std::uint64_t> totals;
  auto total_of = [&](const std::vector<std::uint64_t>& v) {
    std::uint64_t s = 0;
    for (auto x : v) {
      if (s + x < s || s + x > kCap) {
        if (overflow) *overflow = true;
        return kCap;
      }
      s += x;
    }
    return s;
  };
  totals.push_back(total_of(cur));
  for (std::size_t t = 1; t <= n; ++t) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t v = 0; v < g.node_count; ++v) {
      if (!cur[v]) continue;
      for (NodeId w : g.out(static_cast<NodeId>(v))) {
        next[w] += cur[v];
        if (next[w] > kCap) {
          next[w] = kCap;
          if (overflow) *overflow = true;
        }
      }
    }
    cur.swap(next);
    totals.push_back(total_of(cur));
  }
  return totals;
}

enum class ChainCountMode { exact, all_chains };

// Largest family of pairwise (n, r)-separated delta-chains (node sequences
// with n edges). In all-chains mode r must lie below the model's separation
// floor, where distinct chains are automatically separated and the count is
// the path count. Exact mode enumerates chains (capped) and solves the
// pairwise-separation problem exactly.
inline std::uint64_t chain_separated_count(const FiniteModel& m,
                                           const ChainDigraph& g,
                                           std::size_t n, double r,
                                           ChainCountMode mode,
                                           std::size_t chain_cap = 5000) {
  if (mode == ChainCountMode::all_chains) {
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = a + 1; b < m.size(); ++b)
        floor = std::min(floor, m.dist(static_cast<NodeId>(a),
                                       static_cast<NodeId>(b)));
    if (m.size() > 1 && !(r < floor))
      throw ConfigError(
          "chain_separated_count: all-chains mode needs r below the "
          "separation floor " +
          format_double(floor));
    bool overflow = false;
    auto totals = path_counts(g, n, &overflow);
    if (overflow)
      throw CapacityError("chain_separated_count: path count overflow");
    return totals[n];
  }

  // Exact mode: enumerate chains.
  std::vector<std::vector<NodeId>> chains;
  std::vector<NodeId> cur;
  auto dfs = [&](auto&& self, NodeId v, std::size_t depth) -> void {
    cur.push_back(v);
    if (depth == n) {
      if (chains.size() >= chain_cap)
        throw CapacityError("chain_separated_count: more than " +
                            std::to_string(chain_cap) + " chains");
      chains.push_back(cur);
    } else {
      for (NodeId w : g.out(v)) self(self, w, depth + 1);
    }
    cur.pop_back();
  };
  for (std::size_t v = 0; v < g.node_count; ++v)
    dfs(dfs, static_cast<NodeId>(v), 0);

  const std::size_t k = chains.size();
  std::vector<NodeSet> sep(k, NodeSet(k));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      bool s = false;
      for (std::size_t t = 0; t <= n && !s; ++t)
        if (m.dist(chains[a][t], chains[b][t]) > r) s = true;
      if (s) {
        sep[a].set(b);
        sep[b].set(a);
      }
    }
  detail::MaxCliqueSolver solver(sep, 50000000);
  auto best = solver.solve();
  if (solver.capped())
    throw CapacityError("chain_separated_count: branch-and-bound budget hit");
  return best;
}

// ---------------------------------------------------------------------------
// Spectral chain entropy
// ---------------------------------------------------------------------------

// Digraph induced on a subset of nodes (indices are remapped to 0..k-1 in
// the order given by the sorted subset).
inline ChainDigraph induced_subgraph(const ChainDigraph& g,
                                     std::vector<NodeId> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<std::int64_t> back(g.node_count, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    back[nodes[i]] = static_cast<std::int64_t>(i);
  ChainDigraph h;
  h.delta = g.delta;
  h.node_count = nodes.size();
  h.model = nullptr;  // detached view; metric queries are not available
  h.row_ptr.assign(nodes.size() + 1, 0);
  std::vector<std::vector<NodeId>> rows(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (NodeId w : g.out(nodes[i]))
      if (back[w] >= 0) rows[i].push_back(static_cast<NodeId>(back[w]));
  for (std::size_t i = 0; i < nodes.size(); ++i)
    h.row_ptr[i + 1] = h.row_ptr[i] + rows[i].size();
  h.col.resize(h.row_ptr[nodes.size()]);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), h.col.begin() + h.row_ptr[i]);
  return h;
}

// Log spectral radius of the adjacency structure: the growth rate of path
// counts. Computed per strongly connected block by power iteration on A + I
// (the shift keeps periodic blocks convergent), with Collatz-Wielandt
// brackets as the stopping rule; the overall value is the max over blocks.
inline EntropyEstimate spectral_chain_entropy(const ChainDigraph& g,
                                              double tol = 1e-9,
                                              std::size_t iter_cap = 200000) {
  EntropyEstimate est;
  est.method = "spectral";
  est.bound = "estimate";
  est.params["delta"] = format_double(g.delta);

  std::vector<std::int32_t> scc;
  std::size_t scc_count = 0;
  detail::tarjan_scc(g, scc, scc_count);
  std::vector<std::vector<NodeId>> members(scc_count);
  for (std::size_t v = 0; v < g.node_count; ++v)
    members[scc[v]].push_back(static_cast<NodeId>(v));

  double best = 0.0, best_lo = 0.0, best_hi = 0.0;
  bool any_block = false;
  for (std::size_t s = 0; s < scc_count; ++s) {
    const auto& nodes = members[s];
    bool cyclic = nodes.size() > 1;
    if (!cyclic) {
      NodeId v = nodes[0];
      for (NodeId w : g.out(v))
        if (w == v) cyclic = true;
    }
    if (!cyclic) continue;
    // Local CSR restricted to the block.
    std::vector<std::int64_t> back(g.node_count, -1);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      back[nodes[i]] = static_cast<std::int64_t>(i);
    std::vector<std::vector<NodeId>> local(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (NodeId w : g.out(nodes[i]))
        if (back[w] >= 0) local[i].push_back(static_cast<NodeId>(back[w]));

    std::vector<double> v(nodes.size(), 1.0), w(nodes.size());
    double lo = 0, hi = 0;
    bool converged = false;
    for (std::size_t it = 0; it < iter_cap; ++it) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        double acc = v[i];  // the +I shift
        for (NodeId j : local[i]) acc += v[j];
        w[i] = acc;
      }
      lo = std::numeric_limits<double>::infinity();
      hi = 0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        double q = w[i] / v[i];
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      double norm = 0;
      for (double x : w) norm += x;
      for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = w[i] / norm;
      if (hi - lo <= tol * hi) {
        converged = true;
        break;
      }
    }
    double rho = 0.5 * (lo + hi) - 1.0;  // undo the +I shift
    double val = std::log(std::max(rho, 1.0));
    any_block = true;
    if (val >= best) {
      best = val;
      best_lo = std::log(std::max(lo - 1.0, 1.0));
      best_hi = std::log(std::max(hi - 1.0, 1.0));
    }
    if (!converged) est.capped = true;
  }
  est.value = any_block ? best : 0.0;
  est.bracket_lo = best_lo;
  est.bracket_hi = best_hi;
  if (est.capped) est.params["note"] = "power iteration hit its cap";
  return est;
}

// ---------------------------------------------------------------------------
// Entropy points
// ---------------------------------------------------------------------------

struct EntropyPointResult {
  bool verdict = false;
  std::vector<EntropyEstimate> per_radius;
};

// Entropy point test at scale r: every scheduled neighborhood of x must carry
// a separated-count slope above the positivity threshold.
inline EntropyPointResult entropy_point_test(const FiniteModel& m, NodeId x,
                                             double r,
                                             const std::vector<double>& radii,
                                             int n_min, int n_max,
                                             double theta = 0.02,
                                             std::size_t exact_cap = 24) {
  EntropyPointResult res;
  res.verdict = true;
  for (double rho : radii) {
    auto K = ball_nodes(m, x, rho);
    auto est = entropy_slope(m, K, r, n_min, n_max, exact_cap);
    est.params["radius"] = format_double(rho);
    if (!(est.value > theta)) res.verdict = false;
    res.per_radius.push_back(std::move(est));
  }
  return res;
}

// Same at level b: every scheduled neighborhood must carry slope >= b.
inline EntropyPointResult ent_rb_test(const FiniteModel& m, NodeId x, double r,
                                      double b,
                                      const std::vector<double>& radii,
                                      int n_min, int n_max,
                                      std::size_t exact_cap = 24) {
  EntropyPointResult res;
  res.verdict = true;
  for (double rho : radii) {
    auto K = ball_nodes(m, x, rho);
    auto est = entropy_slope(m, K, r, n_min, n_max, exact_cap);
    est.params["radius"] = format_double(rho);
    est.params["b"] = format_double(b);
    if (!(est.value >= b)) res.verdict = false;
    res.per_radius.push_back(std::move(est));
  }
  return res;
}

// Uniform entropy point surrogate: some (r, b) pair on the grid passes.
inline bool ent_up_member(const FiniteModel& m, NodeId x,
                          const std::vector<double>& r_grid,
                          const std::vector<double>& b_grid,
                          const std::vector<double>& radii, int n_min,
                          int n_max, std::size_t exact_cap = 24) {
  for (double r : r_grid)
    for (double b : b_grid)
      if (ent_rb_test(m, x, r, b, radii, n_min, n_max, exact_cap).verdict)
        return true;
  return false;
}

// ---------------------------------------------------------------------------
// Lower-bound certificate from a branching chain family
// ---------------------------------------------------------------------------

struct CertificateResult {
  EntropyEstimate bound;                    // (1/n) log 2, a lower bound
  std::vector<std::vector<NodeId>> chains;  // 2^N chains of length n*N
  std::size_t k = 0, l = 0, m_ret = 0, n = 0;
  bool all_chains_shadowed = false;
  double eps = 0.0;
};

// Builds the 2^N concatenated chain family gamma_u from a separating chain
// pair and return chains, verifies its pairwise (nN, s)-separation directly,
// and reports the lower bound log(2)/n.
inline CertificateResult entropy_certificate(const FiniteModel& m,
                                             const ChainDigraph& g, NodeId x,
                                             double r, double s, int N,
                                             double eps,
                                             std::size_t pair_cap = 30000000) {
  if (!(s > 0) || !(r > s)) throw ConfigError("certificate: need 0 < s < r");
  if (!(s + 2 * eps < r))
    throw ConfigError("certificate: need s + 2*eps < r (got s=" +
                      format_double(s) + ", eps=" + format_double(eps) + ")");
  if (N < 1 || N > 20) throw ConfigError("certificate: N out of range");

  auto sens = chain_sensitive_star(m, g, x, r, pair_cap);
  if (sens.capped) throw CapacityError("certificate: product search capped");
  if (!sens.verdict.value_or(false))
    throw Error("certificate: node " + std::to_string(x) +
                " is not chain-sensitive at r=" + format_double(r));
  const auto& alpha0 = sens.chain0;
  const auto& alpha1 = sens.chain1;
  const std::size_t k = alpha0.size() - 1;
  NodeId end0 = alpha0.back(), end1 = alpha1.back();

  auto beta0 = find_path(g, end0, x);
  auto beta1 = find_path(g, end1, x);
  if (!beta0 || !beta1)
    throw Error("certificate: no return chain to " + std::to_string(x) +
                " (node is not in a cycle component)");
  const std::size_t l = beta0->size() - 1;
  const std::size_t m_ret = beta1->size() - 1;

  auto concat = [](std::vector<NodeId> a, const std::vector<NodeId>& b) {
    // b starts where a ends; drop the shared node.
    a.insert(a.end(), b.begin() + 1, b.end());
    return a;
  };
  std::vector<NodeId> gamma0 = concat(concat(concat(alpha0, *beta0), alpha1), *beta1);
  std::vector<NodeId> gamma1 = concat(concat(concat(alpha1, *beta1), alpha0), *beta0);
  const std::size_t n = 2 * k + l + m_ret;
  if (gamma0.size() != n + 1 || gamma1.size() != n + 1)
    throw Error("certificate: internal length mismatch");

  CertificateResult res;
  res.k = k;
  res.l = l;
  res.m_ret = m_ret;
  res.n = n;
  res.eps = eps;
  const std::size_t families = std::size_t{1} << N;
  for (std::size_t u = 0; u < families; ++u) {
    std::vector<NodeId> chain{x};
    for (int j = 0; j < N; ++j) {
      const auto& block = ((u >> j) & 1) ? gamma1 : gamma0;
      chain.insert(chain.end(), block.begin() + 1, block.end());
    }
    res.chains.push_back(std::move(chain));
  }

  // Direct verification of pairwise (nN, s)-separation. A failure here is a
  // bug, not an input problem.
  for (std::size_t u = 0; u < families; ++u)
    for (std::size_t v = u + 1; v < families; ++v) {
      bool sep = false;
      for (std::size_t t = 0; t < res.chains[u].size() && !sep; ++t)
        if (m.dist(res.chains[u][t], res.chains[v][t]) > s) sep = true;
      if (!sep)
        throw std::logic_error(
            "certificate: constructed family is not pairwise separated");
    }

  res.all_chains_shadowed = true;
  for (const auto& chain : res.chains)
    if (!chain_is_shadowed(m, chain, eps)) {
      res.all_chains_shadowed = false;
      break;
    }

  res.bound.method = "certificate";
  res.bound.bound = "lower";
  res.bound.value = std::log(2.0) / static_cast<double>(n);
  res.bound.params["r"] = format_double(r);
  res.bound.params["s"] = format_double(s);
  res.bound.params["N"] = std::to_string(N);
  res.bound.params["n"] = std::to_string(n);
  res.bound.params["k"] = std::to_string(k);
  res.bound.params["eps"] = format_double(eps);
  res.bound.params["family"] = std::to_string(families);
  res.bound.params["all_chains_shadowed"] =
      res.all_chains_shadowed ? "true" : "false";
  return res;
}

// ---------------------------------------------------------------------------
// Two-set cover entropy
// ---------------------------------------------------------------------------

namespace detail {

// Exact minimum clique cover of the compatibility graph == chromatic number
// of the conflict graph, by branch and bound with a greedy clique lower
// bound. Profiles are trajectory hit-masks; two profiles conflict when one
// must map a step into the cell the other must avoid.
class CoverColoring {
public:
  CoverColoring(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& profiles)
      : p_(profiles) {}

  static bool conflict(const std::pair<std::uint64_t, std::uint64_t>& a,
                       const std::pair<std::uint64_t, std::uint64_t>& b) {
    return (a.first & b.second) || (b.first & a.second);
  }

  // Returns (value, exact?).
  std::pair<std::size_t, bool> solve(std::size_t node_budget) {
    const std::size_t k = p_.size();
    if (k == 0) return {0, true};
    adj_.assign(k, NodeSet(k));
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        if (conflict(p_[a], p_[b])) {
          adj_[a].set(b);
          adj_[b].set(a);
        }
    order_.resize(k);
    for (std::size_t i = 0; i < k; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      auto da = adj_[a].count(), db = adj_[b].count();
      if (da != db) return da > db;
      return a < b;
    });
    best_ = greedy_upper();
    // Greedy clique in the conflict graph lower-bounds the answer.
    std::size_t clique = greedy_clique();
    if (clique == best_) return {best_, true};
    budget_ = node_budget;
    colors_.assign(k, -1);
    bool exact = branch(0, 0);
    return {best_, exact};
  }

private:
  std::size_t greedy_upper() {
    std::vector<std::int32_t> color(p_.size(), -1);
    std::size_t used = 0;
    for (auto v : order_) {
      std::vector<char> taken(used + 1, 0);
      adj_[v].for_each([&](NodeId u) {
        if (color[u] >= 0) taken[color[u]] = 1;
      });
      std::size_t c = 0;
      while (c < used && taken[c]) ++c;
      color[v] = static_cast<std::int32_t>(c);
      used = std::max(used, c + 1);
    }
    return used;
  }

  std::size_t greedy_clique() {
    NodeSet cand(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) cand.set(i);
    std::size_t size = 0;
    for (auto v : order_) {
      if (!cand.test(v)) continue;
      ++size;
      cand &= adj_[v];
    }
    return size;
  }

  bool branch(std::size_t pos, std::size_t used) {
    if (visited_++ > budget_) return false;
    if (used >= best_) return true;  // cannot improve along this branch
    if (pos == p_.size()) {
      best_ = std::min(best_, used);
      return true;
    }
    auto v = order_[pos];
    bool exact = true;
    std::vector<char> taken(used + 1, 0);
    adj_[v].for_each([&](NodeId u) {
      if (colors_[u] >= 0) taken[colors_[u]] = 1;
    });
    for (std::size_t c = 0; c <= used && c + 1 < best_ + 1; ++c) {
      if (c < used && taken[c]) continue;
      if (c >= used && used + 1 >= best_) break;
      colors_[v] = static_cast<std::int32_t>(c);
      exact = branch(pos + 1, std::max(used, c + 1)) && exact;
      colors_[v] = -1;
    }
    return exact;
  }

  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& p_;
  std::vector<NodeSet> adj_;
  std::vector<std::size_t> order_;
  std::vector<std::int32_t> colors_;
  std::size_t best_ = 0;
  std::size_t budget_ = 0;
  std::size_t visited_ = 0;
};

}  // namespace detail

// Cover entropy of the two-set open cover {X \ A, X \ B}: the minimal number
// of itinerary words needed to cover every trajectory, per word length n,
// with its log-slope. Words assign each step to one cover element; a
// trajectory profile (A-hit mask, B-hit mask) is covered by word w iff
// A-hits lie inside w's X\B steps and B-hits inside its X\A steps. Counts
// are exact (minimum clique cover of profile compatibility) for n up to
// exact_n; beyond that the distinct-profile count is reported as an upper
// bound.
inline EntropyEstimate cover_entropy_two_sets(
    const FiniteModel& m, const std::vector<NodeId>& A,
    const std::vector<NodeId>& B, int n_max, int exact_n = 10,
    std::size_t profile_cap = 200000) {
  if (n_max < 2 || n_max > 30)
    throw ConfigError("cover_entropy_two_sets: n_max out of range");
  std::vector<char> inA(m.size(), 0), inB(m.size(), 0);
  for (NodeId v : A) inA[v] = 1;
  for (NodeId v : B) inB[v] = 1;
  for (std::size_t v = 0; v < m.size(); ++v)
    if (inA[v] && inB[v])
      throw ConfigError("cover_entropy_two_sets: A and B must be disjoint");

  EntropyEstimate est;
  est.method = "cover";
  est.bound = "estimate";
  est.params["A_size"] = std::to_string(A.size());
  est.params["B_size"] = std::to_string(B.size());

  // Frontier of (node, A-mask, B-mask) states, advanced along the model's
  // transition sets.
  if (m.size() >= (std::size_t{1} << 24))
    throw CapacityError("cover_entropy_two_sets: model too large");
  auto key = [](NodeId v, std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(v) | (a << 24) | (b << 44);
  };
  std::unordered_set<std::uint64_t> frontier;
  for (std::size_t v = 0; v < m.size(); ++v)
    frontier.insert(key(static_cast<NodeId>(v), inA[v] ? 1 : 0,
                        inB[v] ? 1 : 0));

  std::vector<double> xs, ys;
  bool capped = false;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) {
      std::unordered_set<std::uint64_t> next;
      for (auto kv : frontier) {
        NodeId v = static_cast<NodeId>(kv & 0xFFFFFF);
        std::uint64_t a = (kv >> 24) & 0xFFFFF;
        std::uint64_t b = (kv >> 44) & 0xFFFFF;
        for (NodeId suc : m.succ(v)) {
          std::uint64_t a2 = a | (static_cast<std::uint64_t>(inA[suc]) << (n - 1));
          std::uint64_t b2 = b | (static_cast<std::uint64_t>(inB[suc]) << (n - 1));
          next.insert(key(suc, a2, b2));
          if (next.size() > profile_cap) {
            capped = true;
            break;
          }
        }
        if (capped) break;
      }
      if (capped) {
        est.capped = true;
        est.params["note"] = "profile cap hit at n=" + std::to_string(n);
        break;
      }
      frontier.swap(next);
    }
    // Distinct profiles at this length.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> profiles;
    {
      std::unordered_set<std::uint64_t> seen;
      for (auto kv : frontier) {
        std::uint64_t a = (kv >> 24) & 0xFFFFF;
        std::uint64_t b = (kv >> 44) & 0xFFFFF;
        if (seen.insert((a << 20) | b).second) profiles.emplace_back(a, b);
      }
      std::sort(profiles.begin(), profiles.end());
    }
    std::size_t count;
    bool exact = false;
    if (n <= exact_n) {
      detail::CoverColoring col(profiles);
      auto [val, is_exact] = col.solve(2000000);
      count = val;
      exact = is_exact;
    } else {
      count = profiles.size();
    }
    if (!exact) est.bound = "upper";
    est.counts.emplace_back(n, static_cast<double>(count));
    xs.push_back(n);
    ys.push_back(std::log(static_cast<double>(std::max<std::size_t>(count, 1))));
  }
  if (xs.size() >= 2) est.value = std::max(0.0, least_squares_slope(xs, ys));
  est.params["n_max"] = std::to_string(n_max);
  return est;
}

}  // namespace chainscope
