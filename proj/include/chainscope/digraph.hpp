#pragma once

#include <deque>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "chainscope/common.hpp"
#include "chainscope/model.hpp"

namespace chainscope {

// The delta-transition digraph of a finite model: edge (i, j) whenever some
// transition target of i lies within delta of j. Paths in this digraph are
// exactly the model's delta-chains.
struct ChainDigraph {
  double delta = 0.0;
  std::size_t node_count = 0;
  std::vector<std::uint64_t> row_ptr;  // CSR offsets, size node_count + 1
  std::vector<NodeId> col;             // sorted within each row
  const FiniteModel* model = nullptr;

  std::span<const NodeId> out(NodeId i) const {
    return {col.data() + row_ptr[i], col.data() + row_ptr[i + 1]};
  }
  bool has_edge(NodeId i, NodeId j) const {
    auto o = out(i);
    return std::binary_search(o.begin(), o.end(), j);
  }
  std::size_t edge_count() const { return col.size(); }
};

inline ChainDigraph build_chain_digraph(const FiniteModel& m, double delta,
                                        unsigned jobs = 1) {
  if (!(delta >= 0)) throw ConfigError("digraph: delta must be nonnegative");
  if (delta < m.proj_error)
    throw ResolutionError(
        "digraph: delta " + format_double(delta) + " is below proj_error " +
        format_double(m.proj_error) + "; the digraph would misrepresent the map");
  const std::size_t n = m.size();
  ChainDigraph g;
  g.delta = delta;
  g.node_count = n;
  g.model = &m;
  std::vector<std::vector<NodeId>> rows(n);
  if (m.kind == "grid" && m.map_fn) {
    // Grid models keep the true image point; edges are decided against it
    // directly, and the regular spacing gives the target range in O(1).
    const double len = m.domain_hi - m.domain_lo;
    const double h = 2.0 * m.mesh;
    parallel_for(n, jobs, [&](std::size_t i) {
      double y = m.map_fn(m.coords[i]);
      if (!m.torus) y = std::clamp(y, m.domain_lo, m.domain_hi);
      auto& row = rows[i];
      double pos = (y - m.domain_lo) / h;  // in cell units
      auto reach = static_cast<std::int64_t>(std::floor(delta / h)) + 2;
      auto base = static_cast<std::int64_t>(std::floor(pos));
      for (std::int64_t j = base - reach; j <= base + reach; ++j) {
        std::int64_t jj = j;
        if (m.torus) {
          jj %= static_cast<std::int64_t>(n);
          if (jj < 0) jj += static_cast<std::int64_t>(n);
        } else if (jj < 0 || jj >= static_cast<std::int64_t>(n)) {
          continue;
        }
        double d = m.torus ? detail::circle_dist(y, m.coords[jj], len)
                           : detail::interval_dist(y, m.coords[jj]);
        if (d <= delta) row.push_back(static_cast<NodeId>(jj));
      }
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    });
  } else {
    // Window and abstract models: every successor is a true transition
    // target, so (i, j) is an edge when some successor lies within delta.
    parallel_for(n, jobs, [&](std::size_t i) {
      auto src = static_cast<NodeId>(i);
      auto& row = rows[i];
      for (std::size_t j = 0; j < n; ++j) {
        for (NodeId s : m.succ(src)) {
          if (m.dist(s, static_cast<NodeId>(j)) <= delta) {
            row.push_back(static_cast<NodeId>(j));
            break;
          }
        }
      }
    });
  }
  g.row_ptr.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.row_ptr[i + 1] = g.row_ptr[i] + rows[i].size();
  g.col.resize(g.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i)
    std::copy(rows[i].begin(), rows[i].end(), g.col.begin() + g.row_ptr[i]);
  return g;
}

// True iff a path of length >= 1 leads from i to j.
inline bool reaches(const ChainDigraph& g, NodeId i, NodeId j) {
  std::vector<char> seen(g.node_count, 0);
  std::deque<NodeId> q;
  for (NodeId w : g.out(i)) {
    if (w == j) return true;
    if (!seen[w]) {
      seen[w] = 1;
      q.push_back(w);
    }
  }
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop_front();
    for (NodeId w : g.out(v)) {
      if (w == j) return true;
      if (!seen[w]) {
        seen[w] = 1;
        q.push_back(w);
      }
    }
  }
  return false;
}

// Shortest path of length >= 1 from i to j (node sequence including both
// endpoints), or nullopt.
inline std::optional<std::vector<NodeId>> find_path(const ChainDigraph& g,
                                                    NodeId i, NodeId j) {
  constexpr std::int64_t kFromStart = -2;
  std::vector<std::int64_t> parent(g.node_count, -1);
  std::vector<char> seen(g.node_count, 0);
  auto rebuild = [&](NodeId end) {
    std::vector<NodeId> path{end};
    NodeId cur = end;
    while (parent[cur] != kFromStart) {
      cur = static_cast<NodeId>(parent[cur]);
      path.push_back(cur);
    }
    path.push_back(i);
    std::reverse(path.begin(), path.end());
    return path;
  };
  std::deque<NodeId> q;
  for (NodeId w : g.out(i)) {
    if (seen[w]) continue;
    seen[w] = 1;
    parent[w] = kFromStart;
    if (w == j) return rebuild(j);
    q.push_back(w);
  }
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop_front();
    for (NodeId w : g.out(v)) {
      if (seen[w]) continue;
      seen[w] = 1;
      parent[w] = v;
      if (w == j) return rebuild(j);
      q.push_back(w);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Strongly connected components, chain-recurrent nodes, terminal components
// ---------------------------------------------------------------------------

struct ComponentDecomposition {
  // Full SCC partition over all nodes (ids are dense, 0-based).
  std::vector<std::int32_t> scc_id;
  std::size_t scc_count = 0;
  std::vector<char> scc_cyclic;  // per SCC: contains a cycle (size > 1 or self-loop)
  std::vector<char> scc_sink;    // per SCC: no edges to a different SCC

  // Chain-recurrent nodes and the components (cyclic SCCs) they form.
  NodeSet cr_nodes;
  std::vector<std::vector<NodeId>> components;  // sorted node lists
  std::vector<std::int32_t> comp_of_node;       // -1 for transient nodes
  std::vector<char> terminal;                   // per component

  std::size_t component_count() const { return components.size(); }
};

namespace detail {

// Iterative Tarjan over a CSR digraph.
inline void tarjan_scc(const ChainDigraph& g, std::vector<std::int32_t>& scc,
                       std::size_t& scc_count) {
  const std::size_t n = g.node_count;
  scc.assign(n, -1);
  scc_count = 0;
  std::vector<std::int32_t> low(n, -1), num(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeId> stack;
  std::int32_t counter = 0;

  struct Frame {
    NodeId v;
    std::uint64_t edge;
  };
  std::vector<Frame> call;
  for (std::size_t root = 0; root < n; ++root) {
    if (num[root] != -1) continue;
    call.push_back({static_cast<NodeId>(root), g.row_ptr[root]});
    num[root] = low[root] = counter++;
    stack.push_back(static_cast<NodeId>(root));
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < g.row_ptr[f.v + 1]) {
        NodeId w = g.col[f.edge++];
        if (num[w] == -1) {
          num[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, g.row_ptr[w]});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], num[w]);
        }
      } else {
        NodeId v = f.v;
        call.pop_back();
        if (!call.empty())
          low[call.back().v] = std::min(low[call.back().v], low[v]);
        if (low[v] == num[v]) {
          for (;;) {
            NodeId w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            scc[w] = static_cast<std::int32_t>(scc_count);
            if (w == v) break;
          }
          ++scc_count;
        }
      }
    }
  }
}

}  // namespace detail

inline ComponentDecomposition decompose(const ChainDigraph& g) {
  const std::size_t n = g.node_count;
  ComponentDecomposition d;
  detail::tarjan_scc(g, d.scc_id, d.scc_count);

  // Renumber SCCs by their smallest node so ids are stable and readable.
  {
    std::vector<NodeId> min_node(d.scc_count, std::numeric_limits<NodeId>::max());
    for (std::size_t v = 0; v < n; ++v)
      min_node[d.scc_id[v]] = std::min(min_node[d.scc_id[v]], static_cast<NodeId>(v));
    std::vector<std::int32_t> order(d.scc_count);
    for (std::size_t s = 0; s < d.scc_count; ++s) order[s] = static_cast<std::int32_t>(s);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
      return min_node[a] < min_node[b];
    });
    std::vector<std::int32_t> rename(d.scc_count);
    for (std::size_t rank = 0; rank < order.size(); ++rank)
      rename[order[rank]] = static_cast<std::int32_t>(rank);
    for (std::size_t v = 0; v < n; ++v) d.scc_id[v] = rename[d.scc_id[v]];
  }

  std::vector<std::size_t> scc_size(d.scc_count, 0);
  for (std::size_t v = 0; v < n; ++v) ++scc_size[d.scc_id[v]];

  d.scc_cyclic.assign(d.scc_count, 0);
  d.scc_sink.assign(d.scc_count, 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId w : g.out(static_cast<NodeId>(v))) {
      if (d.scc_id[w] != d.scc_id[v]) {
        d.scc_sink[d.scc_id[v]] = 0;
      } else if (scc_size[d.scc_id[v]] > 1 || w == static_cast<NodeId>(v)) {
        d.scc_cyclic[d.scc_id[v]] = 1;
      }
    }
  }

  d.cr_nodes = NodeSet(n);
  d.comp_of_node.assign(n, -1);
  std::vector<std::int32_t> comp_of_scc(d.scc_count, -1);
  for (std::size_t s = 0; s < d.scc_count; ++s) {
    if (d.scc_cyclic[s]) {
      comp_of_scc[s] = static_cast<std::int32_t>(d.components.size());
      d.components.emplace_back();
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto s = d.scc_id[v];
    if (!d.scc_cyclic[s]) continue;
    d.cr_nodes.set(v);
    d.comp_of_node[v] = comp_of_scc[s];
    d.components[comp_of_scc[s]].push_back(static_cast<NodeId>(v));
  }
  d.terminal.assign(d.components.size(), 0);
  for (std::size_t s = 0; s < d.scc_count; ++s)
    if (comp_of_scc[s] >= 0) d.terminal[comp_of_scc[s]] = d.scc_sink[s];
  return d;
}

// Component containing the eventual cycle of the canonical orbit of node i.
inline std::int32_t omega_component(const FiniteModel& m,
                                    const ComponentDecomposition& d,
                                    NodeId i) {
  std::vector<std::int32_t> when(m.size(), -1);
  NodeId cur = i;
  std::int32_t step = 0;
  while (when[cur] == -1) {
    when[cur] = step++;
    cur = m.image[cur];
  }
  // cur is on the orbit's cycle; image-edges are digraph edges, so the cycle
  // lies inside one cyclic SCC.
  auto comp = d.comp_of_node[cur];
  if (comp < 0)
    throw Error("omega_component: orbit cycle is not chain-recurrent "
                "(decomposition built at delta below proj_error?)");
  return comp;
}

// Maximum distance from the nodes reachable from component C back to C.
// Zero exactly when C is terminal.
inline double chain_stability_margin(const FiniteModel& m,
                                     const ChainDigraph& g,
                                     const ComponentDecomposition& d,
                                     std::int32_t comp) {
  if (comp < 0 || comp >= static_cast<std::int32_t>(d.components.size()))
    throw ConfigError("chain_stability_margin: bad component id");
  const auto& cnodes = d.components[comp];
  std::vector<char> seen(g.node_count, 0);
  std::deque<NodeId> q;
  for (NodeId v : cnodes) {
    seen[v] = 1;
    q.push_back(v);
  }
  double margin = 0.0;
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop_front();
    if (d.comp_of_node[v] != comp) {
      double dist_to_c = std::numeric_limits<double>::infinity();
      for (NodeId c : cnodes) dist_to_c = std::min(dist_to_c, m.dist(v, c));
      margin = std::max(margin, dist_to_c);
    }
    for (NodeId w : g.out(v))
      if (!seen[w]) {
        seen[w] = 1;
        q.push_back(w);
      }
  }
  return margin;
}

// Every node must reach some terminal component; returns a per-node flag
// (all true on any finite digraph -- a false entry indicates a bug).
inline std::vector<char> reaches_terminal_component(
    const ChainDigraph& g, const ComponentDecomposition& d) {
  const std::size_t n = g.node_count;
  // Backward BFS from terminal components over reversed edges.
  std::vector<std::vector<NodeId>> rev(n);
  for (std::size_t v = 0; v < n; ++v)
    for (NodeId w : g.out(static_cast<NodeId>(v)))
      rev[w].push_back(static_cast<NodeId>(v));
  std::vector<char> ok(n, 0);
  std::deque<NodeId> q;
  for (std::size_t c = 0; c < d.components.size(); ++c) {
    if (!d.terminal[c]) continue;
    for (NodeId v : d.components[c])
      if (!ok[v]) {
        ok[v] = 1;
        q.push_back(v);
      }
  }
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop_front();
    for (NodeId u : rev[v])
      if (!ok[u]) {
        ok[u] = 1;
        q.push_back(u);
      }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

inline std::string edges_csv(const ChainDigraph& g) {
  std::ostringstream os;
  os << "src,dst\n";
  for (std::size_t v = 0; v < g.node_count; ++v)
    for (NodeId w : g.out(static_cast<NodeId>(v)))
      os << v << "," << w << "\n";
  return os.str();
}

// DOT view of the condensation restricted to chain components. Terminal
// components are highlighted; optional per-component annotations (entropy)
// are appended to the label.
inline std::string condensation_dot(
    const ChainDigraph& g, const ComponentDecomposition& d,
    const std::vector<std::string>& annotations = {}) {
  const std::size_t n = g.node_count;
  const std::size_t nc = d.component_count();
  // comp -> set of comps reachable (via any path, possibly through transient
  // nodes). BFS per component; sizes here are desk-scale.
  std::vector<std::vector<char>> reach(nc, std::vector<char>(nc, 0));
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<char> seen(n, 0);
    std::deque<NodeId> q;
    for (NodeId v : d.components[c]) {
      seen[v] = 1;
      q.push_back(v);
    }
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop_front();
      auto oc = d.comp_of_node[v];
      if (oc >= 0 && static_cast<std::size_t>(oc) != c) reach[c][oc] = 1;
      for (NodeId w : g.out(v))
        if (!seen[w]) {
          seen[w] = 1;
          q.push_back(w);
        }
    }
  }
  // Transitive reduction of the reachability relation for readability.
  std::vector<std::vector<char>> edge = reach;
  for (std::size_t a = 0; a < nc; ++a)
    for (std::size_t b = 0; b < nc; ++b)
      if (edge[a][b])
        for (std::size_t mid = 0; mid < nc; ++mid)
          if (reach[a][mid] && reach[mid][b] && mid != a && mid != b)
            edge[a][b] = 0;

  std::ostringstream os;
  os << "digraph condensation {\n  rankdir=LR;\n";
  for (std::size_t c = 0; c < nc; ++c) {
    os << "  c" << c << " [label=\"C" << c << " (" << d.components[c].size()
       << " nodes";
    if (c < annotations.size() && !annotations[c].empty())
      os << ", " << annotations[c];
    os << ")\"";
    if (d.terminal[c]) os << ", style=filled, fillcolor=lightblue, peripheries=2";
    os << "];\n";
  }
  for (std::size_t a = 0; a < nc; ++a)
    for (std::size_t b = 0; b < nc; ++b)
      if (edge[a][b]) os << "  c" << a << " -> c" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace chainscope
