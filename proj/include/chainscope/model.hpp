#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "chainscope/common.hpp"

namespace chainscope {

// A finite model of a dynamical system: a point set with a metric oracle,
// a self-map, and the discretization error that the construction incurred.
//
// `successors` is optional. When present it lists, per point, every
// transition the modeled system can actually take from that point (window
// models of shifts branch at the new coordinate). `image` is then the
// canonical single-valued selection from that set; orbit-based analyses use
// `image`, chain/digraph analyses use the full successor sets.
struct FiniteModel {
  std::string name;
  std::string kind;  // "grid" | "subshift" | "example31" | "abstract"
  std::vector<std::string> labels;
  std::function<double(NodeId, NodeId)> dist;
  std::vector<NodeId> image;
  std::vector<std::vector<NodeId>> successors;  // empty => deterministic
  double proj_error = 0.0;
  double mesh = 0.0;  // covering radius of the point set in the modeled space

  // Grid models keep their coordinates and map so that restriction and
  // validation can re-evaluate the true image of a point.
  std::vector<double> coords;
  std::function<double(double)> map_fn;
  double domain_lo = 0.0, domain_hi = 1.0;
  bool torus = false;

  // Window models keep their words (as symbol-id strings) and symbol values.
  std::vector<std::string> words;
  std::vector<double> symbol_values;
  std::function<bool(const std::string&)> word_admissible;

  std::map<std::string, std::string> meta;

  std::size_t size() const { return image.size(); }

  double resolution_floor() const { return mesh + proj_error; }

  bool multivalued() const { return !successors.empty(); }

  std::span<const NodeId> succ(NodeId i) const {
    if (successors.empty()) return {&image[i], 1};
    return {successors[i].data(), successors[i].size()};
  }

  std::string label(NodeId i) const {
    if (i < labels.size()) return labels[i];
    return std::to_string(i);
  }
};

// Strictly decreasing resolution ladders. The epsilon and neighborhood-radius
// ladders may not descend below the model's resolution floor (mesh +
// projection error); the delta ladder may not descend below the projection
// error, or the digraph would misrepresent the map.
struct ResolutionSchedule {
  std::vector<double> epsilons;
  std::vector<double> deltas;
  std::vector<double> radii;

  static void check_ladder(const std::vector<double>& v, const char* name) {
    if (v.empty()) throw ConfigError(std::string("schedule: empty ") + name);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0))
        throw ConfigError(std::string("schedule: non-positive entry in ") +
                          name);
      if (i > 0 && !(v[i] < v[i - 1]))
        throw ConfigError(std::string("schedule: ") + name +
                          " must be strictly decreasing");
    }
  }

  void validate(const FiniteModel& m) const {
    check_ladder(epsilons, "epsilons");
    check_ladder(deltas, "deltas");
    check_ladder(radii, "radii");
    const double floor = m.resolution_floor();
    if (epsilons.back() < floor)
      throw ResolutionError("schedule: smallest epsilon " +
                            format_double(epsilons.back()) +
                            " is below the resolution floor " +
                            format_double(floor) + " (mesh + proj_error)");
    if (radii.back() < floor)
      throw ResolutionError("schedule: smallest radius " +
                            format_double(radii.back()) +
                            " is below the resolution floor " +
                            format_double(floor) + " (mesh + proj_error)");
    if (deltas.back() < m.proj_error)
      throw ResolutionError("schedule: smallest delta " +
                            format_double(deltas.back()) +
                            " is below proj_error " +
                            format_double(m.proj_error));
  }

  double finest_epsilon() const { return epsilons.back(); }
  double finest_delta() const { return deltas.back(); }
  double finest_radius() const { return radii.back(); }
};

// ---------------------------------------------------------------------------
// Grid models of interval/circle maps
// ---------------------------------------------------------------------------

inline std::function<double(double)> lookup_grid_map(const std::string& name,
                                                     double param) {
  if (name == "identity") return [](double x) { return x; };
  if (name == "rotation")
    return [param](double x) {
      double y = x + param;
      y -= std::floor(y);
      return y;
    };
  if (name == "doubling")
    return [](double x) {
      double y = 2.0 * x;
      y -= std::floor(y);
      return y;
    };
  if (name == "tent")
    return [](double x) { return x <= 0.5 ? 2.0 * x : 2.0 - 2.0 * x; };
  if (name == "northsouth")
    // Circle map with a repelling fixed point at 0 and an attracting one at
    // 1/2; param controls the drift amplitude.
    return [param](double x) {
      double y = x + param * std::sin(2.0 * M_PI * x);
      y -= std::floor(y);
      return y;
    };
  throw ConfigError("unknown map name: " + name);
}

namespace detail {

inline double interval_dist(double a, double b) { return std::abs(a - b); }

inline double circle_dist(double a, double b, double len) {
  double d = std::abs(a - b);
  d = std::fmod(d, len);
  return std::min(d, len - d);
}

// Nearest cell index to position `pos` (in cell units, center of cell j at
// j + 0.5). Ties break toward the lower index.
inline std::int64_t nearest_cell(double pos_cells) {
  double shifted = pos_cells - 0.5;
  double fl = std::floor(shifted);
  double frac = shifted - fl;
  std::int64_t j = static_cast<std::int64_t>(fl);
  if (frac > 0.5) return j + 1;
  return j;  // frac <= 0.5 rounds down (tie toward lower index)
}

}  // namespace detail

// Builds a cell-centered grid model of a named 1-D map. `mesh` is the cell
// width; the recorded FiniteModel::mesh is the covering radius (half of it).
inline FiniteModel build_grid_model(const std::string& map_name, double param,
                                    double lo, double hi, bool torus,
                                    double mesh,
                                    std::size_t node_cap = 200000) {
  if (!(mesh > 0)) throw ConfigError("grid: mesh must be positive");
  if (!(hi > lo)) throw ConfigError("grid: empty domain");
  const double len = hi - lo;
  const auto cells_ll = static_cast<std::int64_t>(std::llround(len / mesh));
  if (cells_ll < 1) throw ConfigError("grid: mesh larger than the domain");
  const auto cells = static_cast<std::size_t>(cells_ll);
  if (cells > node_cap)
    throw CapacityError("grid: " + std::to_string(cells) +
                        " cells exceed the node cap " +
                        std::to_string(node_cap));
  const double h = len / static_cast<double>(cells);
  auto f = lookup_grid_map(map_name, param);

  FiniteModel m;
  m.kind = "grid";
  m.name = map_name;
  m.map_fn = f;
  m.domain_lo = lo;
  m.domain_hi = hi;
  m.torus = torus;
  m.coords.resize(cells);
  m.labels.resize(cells);
  m.image.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    m.coords[i] = lo + (static_cast<double>(i) + 0.5) * h;
    m.labels[i] = "x=" + format_double(m.coords[i]);
  }

  double max_err = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double y = f(m.coords[i]);
    if (!torus) y = std::clamp(y, lo, hi);
    double pos = (y - lo) / h;
    std::int64_t j = detail::nearest_cell(pos);
    if (torus) {
      j %= cells_ll;
      if (j < 0) j += cells_ll;
    } else {
      j = std::clamp<std::int64_t>(j, 0, cells_ll - 1);
    }
    m.image[i] = static_cast<NodeId>(j);
    double err = torus ? detail::circle_dist(y, m.coords[m.image[i]], len)
                       : detail::interval_dist(y, m.coords[m.image[i]]);
    max_err = std::max(max_err, err);
  }
  m.proj_error = max_err;
  m.mesh = h / 2.0;

  auto coords = m.coords;  // captured by value: dist stays valid on copies
  if (torus) {
    m.dist = [coords, len](NodeId a, NodeId b) {
      return detail::circle_dist(coords[a], coords[b], len);
    };
  } else {
    m.dist = [coords](NodeId a, NodeId b) {
      return detail::interval_dist(coords[a], coords[b]);
    };
  }
  m.meta["map"] = map_name;
  m.meta["param"] = format_double(param);
  m.meta["mesh_cell"] = format_double(h);
  return m;
}

// ---------------------------------------------------------------------------
// Window models of subshifts
// ---------------------------------------------------------------------------

namespace detail {

// Shared scaffolding for window models: points are words of length 2N+1
// (coordinates -N..N), the map is the left shift with the new rightmost
// symbol ranging over admissible continuations, and the metric is
// sup_n 2^{-|n|} |value(u_n) - value(v_n)| truncated to the window.
struct WindowModelBuilder {
  int window_radius;
  std::vector<double> values;  // per symbol id
  // Admissibility of a word of any length (used for enumeration and for the
  // extended word that decides admissible continuations).
  std::function<bool(const std::string&)> admissible;
  // Order in which continuations are tried; the first admissible one is the
  // canonical image symbol.
  std::vector<char> canonical_order;

  FiniteModel build(const std::string& name, std::size_t node_cap) const {
    const int len = 2 * window_radius + 1;
    std::vector<std::string> words;
    std::string cur;
    enumerate(cur, len, words, node_cap);
    if (words.empty())
      throw Error(name + ": no admissible words; the model is empty");
    std::sort(words.begin(), words.end());

    // Iteratively drop words with no admissible continuation so that the
    // image stays total.
    std::map<std::string, NodeId> index;
    for (;;) {
      index.clear();
      for (std::size_t i = 0; i < words.size(); ++i)
        index[words[i]] = static_cast<NodeId>(i);
      std::vector<std::string> kept;
      kept.reserve(words.size());
      for (const auto& w : words) {
        bool has = false;
        for (char c : canonical_order) {
          std::string ext = w + c;
          if (!admissible(ext)) continue;
          if (index.count(ext.substr(1))) {
            has = true;
            break;
          }
        }
        if (has) kept.push_back(w);
      }
      if (kept.size() == words.size()) break;
      words.swap(kept);
      if (words.empty())
        throw Error(name + ": no admissible words survive closure");
    }

    FiniteModel m;
    m.kind = "subshift";
    m.name = name;
    m.words = words;
    m.symbol_values = values;
    m.word_admissible = admissible;
    const std::size_t n = words.size();
    m.labels.resize(n);
    m.image.resize(n);
    m.successors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      m.labels[i] = pretty(words[i]);
      bool first = true;
      for (char c : canonical_order) {
        std::string ext = words[i] + c;
        if (!admissible(ext)) continue;
        auto it = index.find(ext.substr(1));
        if (it == index.end()) continue;
        if (first) {
          m.image[i] = it->second;
          first = false;
        }
        m.successors[i].push_back(it->second);
      }
      std::sort(m.successors[i].begin(), m.successors[i].end());
    }

    m.proj_error = 0.0;  // the window system is itself the modeled object
    m.mesh = 0.0;
    double maxdiff = 0.0;
    for (double a : values)
      for (double b : values) maxdiff = std::max(maxdiff, std::abs(a - b));
    m.meta["truncation_tail"] =
        format_double(std::ldexp(maxdiff, -window_radius));
    m.meta["window_radius"] = std::to_string(window_radius);

    auto vals = values;
    auto wrds = words;
    int N = window_radius;
    m.dist = [vals, wrds, N](NodeId a, NodeId b) {
      const std::string& u = wrds[a];
      const std::string& v = wrds[b];
      double best = 0.0;
      const int len = 2 * N + 1;
      for (int p = 0; p < len; ++p) {
        double diff = std::abs(vals[static_cast<unsigned char>(u[p])] -
                               vals[static_cast<unsigned char>(v[p])]);
        double w = std::ldexp(diff, -std::abs(p - N));
        best = std::max(best, w);
      }
      return best;
    };
    return m;
  }

  std::string pretty(const std::string& word) const {
    std::string out;
    for (std::size_t p = 0; p < word.size(); ++p) {
      if (p) out += ',';
      out += format_double(values[static_cast<unsigned char>(word[p])]);
    }
    return out;
  }

private:
  void enumerate(std::string& cur, int len, std::vector<std::string>& out,
                 std::size_t cap) const {
    if (static_cast<int>(cur.size()) == len) {
      if (out.size() >= cap)
        throw CapacityError("window model exceeds node cap " +
                            std::to_string(cap));
      out.push_back(cur);
      return;
    }
    for (std::size_t s = 0; s < values.size(); ++s) {
      cur.push_back(static_cast<char>(s));
      if (admissible(cur)) enumerate(cur, len, out, cap);
      cur.pop_back();
    }
  }
};

}  // namespace detail

// Window model of a subshift over symbols {0, .., alphabet-1} (symbol values
// are the integers themselves) avoiding the given forbidden words (digit
// strings). `window_radius` must be at least the longest forbidden word.
inline FiniteModel build_subshift_model(
    std::size_t alphabet, const std::vector<std::string>& forbidden,
    int window_radius, std::size_t node_cap = 200000) {
  if (alphabet == 0) throw ConfigError("subshift: empty alphabet");
  if (alphabet > 10) throw ConfigError("subshift: alphabet too large (max 10)");
  if (window_radius < 1) throw ConfigError("subshift: window radius must be >= 1");
  std::vector<std::string> forb;  // as symbol-id strings
  for (const auto& f : forbidden) {
    if (f.empty()) throw ConfigError("subshift: empty forbidden word");
    if (static_cast<int>(f.size()) > 2 * window_radius + 1)
      throw ConfigError("subshift: window shorter than forbidden word '" + f +
                        "'");
    std::string g;
    for (char c : f) {
      if (c < '0' || c >= static_cast<char>('0' + alphabet))
        throw ConfigError("subshift: bad symbol in forbidden word '" + f +
                          "'");
      g.push_back(static_cast<char>(c - '0'));
    }
    forb.push_back(g);
  }

  detail::WindowModelBuilder b;
  b.window_radius = window_radius;
  b.values.resize(alphabet);
  for (std::size_t s = 0; s < alphabet; ++s)
    b.values[s] = static_cast<double>(s);
  for (std::size_t s = 0; s < alphabet; ++s)
    b.canonical_order.push_back(static_cast<char>(s));
  b.admissible = [forb](const std::string& w) {
    for (const auto& f : forb) {
      if (f.size() > w.size()) continue;
      if (w.find(f) != std::string::npos) return false;
    }
    return true;
  };
  std::string name = "subshift[" + std::to_string(alphabet) + "]";
  for (const auto& f : forbidden) name += "!" + f;
  return b.build(name, node_cap);
}

// Window model of the level-stratified shift family: symbol values are
// +-s_1 < ... < +-s_K < +-1 and a word is admissible when
//   - |x_n| <= |x_{n+1}| for all n,
//   - x_n = s_k forces x_{n+j} = -s_k for 1 <= j <= k (inside the word),
//   - x_n = 1 forces x_{n+j} = -1 for all j >= 1 (inside the word).
// Canonical continuations prefer the lowest admissible level, minus sign
// first, so canonical orbits stay inside their level stratum.
inline FiniteModel build_example31_model(int K, int window_radius,
                                         const std::vector<double>& s,
                                         std::size_t node_cap = 200000) {
  if (K < 1) throw ConfigError("example31: K must be >= 1");
  if (static_cast<int>(s.size()) != K)
    throw ConfigError("example31: need exactly K level values");
  for (int k = 0; k < K; ++k) {
    if (!(s[k] > 0) || !(s[k] < 1))
      throw ConfigError("example31: levels must lie in (0,1)");
    if (k > 0 && !(s[k] > s[k - 1]))
      throw ConfigError("example31: levels must be strictly increasing");
  }
  if (window_radius < 1)
    throw ConfigError("example31: window radius must be >= 1");

  // Symbol ids: 2k = -level_k, 2k+1 = +level_k, for k = 0..K (level K is 1).
  const int nlevels = K + 1;
  std::vector<double> values(2 * nlevels);
  std::vector<int> level(2 * nlevels);
  std::vector<int> runlen(2 * nlevels, 0);  // forced run after a positive
  for (int k = 0; k < nlevels; ++k) {
    double v = (k < K) ? s[k] : 1.0;
    values[2 * k] = -v;
    values[2 * k + 1] = v;
    level[2 * k] = level[2 * k + 1] = k;
    runlen[2 * k + 1] = (k < K) ? (k + 1) : std::numeric_limits<int>::max();
  }

  detail::WindowModelBuilder b;
  b.window_radius = window_radius;
  b.values = values;
  for (int k = 0; k < nlevels; ++k) {
    b.canonical_order.push_back(static_cast<char>(2 * k));
    b.canonical_order.push_back(static_cast<char>(2 * k + 1));
  }
  b.admissible = [level, runlen](const std::string& w) {
    const int len = static_cast<int>(w.size());
    for (int i = 0; i + 1 < len; ++i)
      if (level[static_cast<unsigned char>(w[i])] >
          level[static_cast<unsigned char>(w[i + 1])])
        return false;
    for (int i = 0; i < len; ++i) {
      int sym = static_cast<unsigned char>(w[i]);
      if (!(sym & 1)) continue;  // negative symbols force nothing
      int run = runlen[sym];
      int lv = level[sym];
      for (int j = 1; i + j < len && j <= run; ++j) {
        if (static_cast<unsigned char>(w[i + j]) !=
            static_cast<unsigned char>(2 * lv))
          return false;
      }
    }
    return true;
  };
  std::string name = "example31[K=" + std::to_string(K) + "]";
  FiniteModel m = b.build(name, node_cap);
  m.kind = "example31";
  m.meta["K"] = std::to_string(K);
  return m;
}

// Hand-built models for tests and small experiments.
inline FiniteModel make_abstract_model(
    std::vector<std::vector<double>> dmat, std::vector<NodeId> image,
    std::vector<std::vector<NodeId>> successors = {}) {
  FiniteModel m;
  m.kind = "abstract";
  m.name = "abstract";
  const std::size_t n = image.size();
  m.image = std::move(image);
  m.successors = std::move(successors);
  m.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.labels[i] = "p" + std::to_string(i);
  m.dist = [d = std::move(dmat)](NodeId a, NodeId b) { return d[a][b]; };
  return m;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;
  double separation_floor = 0.0;  // min positive pairwise distance seen
  std::size_t pairs_checked = 0;
  std::size_t triples_checked = 0;

  void fail(const std::string& msg) {
    ok = false;
    failures.push_back(msg);
  }
};

inline ValidationReport validate_model(const FiniteModel& m,
                                       std::size_t triple_samples = 2000,
                                       std::uint64_t seed = 1) {
  ValidationReport rep;
  const std::size_t n = m.size();
  if (n == 0) {
    rep.fail("model has no points");
    return rep;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m.image[i] >= n)
      rep.fail("image not total at node " + std::to_string(i));
    for (NodeId s : m.succ(static_cast<NodeId>(i)))
      if (s >= n) rep.fail("successor out of range at " + std::to_string(i));
  }

  const bool exhaustive = n <= 1500;
  double floor = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  auto rnd = [&] { return static_cast<NodeId>(rng() % n); };

  auto check_pair = [&](NodeId a, NodeId b) {
    double ab = m.dist(a, b);
    double ba = m.dist(b, a);
    if (ab < 0) rep.fail("negative distance at (" + std::to_string(a) + "," +
                         std::to_string(b) + ")");
    if (std::abs(ab - ba) > 1e-12)
      rep.fail("asymmetric distance at (" + std::to_string(a) + "," +
               std::to_string(b) + ")");
    if (a != b && ab > 0) floor = std::min(floor, ab);
    if (a != b && ab == 0)
      rep.fail("distinct points at distance zero: (" + std::to_string(a) +
               "," + std::to_string(b) + ")");
    ++rep.pairs_checked;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (m.dist(static_cast<NodeId>(i), static_cast<NodeId>(i)) != 0)
      rep.fail("dist(i,i) != 0 at node " + std::to_string(i));
  }
  if (exhaustive) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        check_pair(static_cast<NodeId>(i), static_cast<NodeId>(j));
  } else {
    for (std::size_t t = 0; t < 20000; ++t) {
      NodeId a = rnd(), b = rnd();
      if (a != b) check_pair(a, b);
    }
  }
  rep.separation_floor = std::isfinite(floor) ? floor : 0.0;

  auto check_triple = [&](NodeId a, NodeId b, NodeId c) {
    double ab = m.dist(a, b), bc = m.dist(b, c), ac = m.dist(a, c);
    if (ac > ab + bc + 1e-12) {
      rep.fail("triangle inequality fails at witness (" + std::to_string(a) +
               "," + std::to_string(b) + "," + std::to_string(c) + ")");
    }
    ++rep.triples_checked;
  };
  if (n <= 60) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          check_triple(static_cast<NodeId>(a), static_cast<NodeId>(b),
                       static_cast<NodeId>(c));
  } else {
    for (std::size_t t = 0; t < triple_samples; ++t)
      check_triple(rnd(), rnd(), rnd());
  }

  // Construction-specific invariants.
  if (m.kind == "grid" && m.map_fn) {
    const double len = m.domain_hi - m.domain_lo;
    for (std::size_t i = 0; i < n; ++i) {
      double y = m.map_fn(m.coords[i]);
      if (!m.torus) y = std::clamp(y, m.domain_lo, m.domain_hi);
      double err = m.torus ? detail::circle_dist(y, m.coords[m.image[i]], len)
                           : detail::interval_dist(y, m.coords[m.image[i]]);
      if (err > m.proj_error + 1e-12)
        rep.fail("projection error bound violated at node " +
                 std::to_string(i));
    }
  }
  if (!m.words.empty() && m.word_admissible) {
    for (std::size_t i = 0; i < n; ++i)
      if (!m.word_admissible(m.words[i]))
        rep.fail("stored word not admissible at node " + std::to_string(i));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Restriction
// ---------------------------------------------------------------------------

// Restricts a model to a subset of its points. The subset need not be
// image-closed: images (and successor sets) are re-projected to the nearest
// kept point and proj_error grows by the worst re-projection distance.
inline FiniteModel restrict_model(const FiniteModel& m,
                                  std::vector<NodeId> nodes) {
  if (nodes.empty()) throw ConfigError("restrict_model: empty subset");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const std::size_t k = nodes.size();
  std::vector<std::int64_t> back(m.size(), -1);
  for (std::size_t i = 0; i < k; ++i) back[nodes[i]] = static_cast<std::int64_t>(i);

  FiniteModel r;
  r.kind = m.kind;
  r.name = m.name + "|restricted";
  r.mesh = m.mesh;
  r.domain_lo = m.domain_lo;
  r.domain_hi = m.domain_hi;
  r.torus = m.torus;
  r.map_fn = m.map_fn;
  r.symbol_values = m.symbol_values;
  r.word_admissible = m.word_admissible;
  r.meta = m.meta;
  r.labels.resize(k);
  for (std::size_t i = 0; i < k; ++i) r.labels[i] = m.label(nodes[i]);
  if (!m.coords.empty()) {
    r.coords.resize(k);
    for (std::size_t i = 0; i < k; ++i) r.coords[i] = m.coords[nodes[i]];
  }
  if (!m.words.empty()) {
    r.words.resize(k);
    for (std::size_t i = 0; i < k; ++i) r.words[i] = m.words[nodes[i]];
  }

  auto parent_dist = m.dist;
  auto idx = nodes;  // by value for the closure
  r.dist = [parent_dist, idx](NodeId a, NodeId b) {
    return parent_dist(idx[a], idx[b]);
  };

  // Nearest kept point to a parent point p; ties toward the lower index.
  auto nearest_in_subset = [&](NodeId p) -> std::pair<NodeId, double> {
    if (back[p] >= 0) return {static_cast<NodeId>(back[p]), 0.0};
    NodeId bestj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      double d = m.dist(p, nodes[j]);
      if (d < best) {
        best = d;
        bestj = static_cast<NodeId>(j);
      }
    }
    return {bestj, best};
  };

  r.image.resize(k);
  double worst = 0.0;
  const double len = m.domain_hi - m.domain_lo;
  for (std::size_t i = 0; i < k; ++i) {
    if (m.kind == "grid" && m.map_fn) {
      // Re-project the true image point, not the already-projected one.
      double y = m.map_fn(m.coords[nodes[i]]);
      if (!m.torus) y = std::clamp(y, m.domain_lo, m.domain_hi);
      NodeId bestj = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        double d = m.torus ? detail::circle_dist(y, r.coords[j], len)
                           : detail::interval_dist(y, r.coords[j]);
        if (d < best) {
          best = d;
          bestj = static_cast<NodeId>(j);
        }
      }
      r.image[i] = bestj;
      worst = std::max(worst, best);
    } else {
      auto [j, d] = nearest_in_subset(m.image[nodes[i]]);
      r.image[i] = j;
      worst = std::max(worst, m.proj_error + d);
    }
  }
  r.proj_error = (m.kind == "grid") ? worst : std::max(m.proj_error, worst);

  if (m.multivalued()) {
    r.successors.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (NodeId s : m.succ(nodes[i])) {
        auto [j, d] = nearest_in_subset(s);
        (void)d;
        r.successors[i].push_back(j);
      }
      auto& v = r.successors[i];
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }
  return m.size() == k ? m : r;
}

}  // namespace chainscope
