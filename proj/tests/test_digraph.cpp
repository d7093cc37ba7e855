#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "chainscope/digraph.hpp"
#include "oracles.hpp"

using namespace chainscope;

namespace {

FiniteModel three_cycle() {
  return make_abstract_model({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}, {1, 2, 0});
}

FiniteModel two_fixed_points(double d = 1.0) {
  return make_abstract_model({{0, d}, {d, 0}}, {0, 1});
}

}  // namespace

TEST_CASE("digraph of a permutation at delta 0 is the permutation",
          "[digraph]") {
  auto m = three_cycle();
  auto g = build_chain_digraph(m, 0.0);
  REQUIRE(g.edge_count() == 3);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 2));
  CHECK(g.has_edge(2, 0));
}

TEST_CASE("digraph at delta above the diameter is complete", "[digraph]") {
  auto m = three_cycle();
  auto g = build_chain_digraph(m, 2.0);
  CHECK(g.edge_count() == 9);
}

TEST_CASE("doubling grid at delta 1/32 has out-degree at least 2",
          "[digraph]") {
  auto m = build_grid_model("doubling", 0, 0, 1, true, 1.0 / 64);
  auto g = build_chain_digraph(m, 1.0 / 32);
  for (std::size_t v = 0; v < g.node_count; ++v)
    CHECK(g.out(static_cast<NodeId>(v)).size() >= 2);
}

TEST_CASE("digraph build rejects delta below proj_error", "[digraph]") {
  auto m = build_grid_model("doubling", 0, 0, 1, true, 0.125);
  REQUIRE(m.proj_error > 0.01);
  CHECK_THROWS_AS(build_chain_digraph(m, 0.01), ResolutionError);
}

TEST_CASE("image edges are always present at valid delta", "[digraph]") {
  auto m = build_grid_model("tent", 0, 0, 1, false, 1.0 / 32);
  auto g = build_chain_digraph(m, m.proj_error);
  for (std::size_t v = 0; v < g.node_count; ++v)
    CHECK(g.has_edge(static_cast<NodeId>(v), m.image[v]));
}

TEST_CASE("reaches follows paths of positive length", "[digraph]") {
  auto m = three_cycle();
  auto g = build_chain_digraph(m, 0.0);
  CHECK(reaches(g, 0, 2));
  CHECK(reaches(g, 0, 0));

  auto iso = two_fixed_points();
  auto gi = build_chain_digraph(iso, 0.2);
  CHECK_FALSE(reaches(gi, 0, 1));
  CHECK(reaches(gi, 0, 0));
}

TEST_CASE("north-south source reaches the sink but not back", "[digraph]") {
  auto m = build_grid_model("northsouth", 0.1, 0, 1, true, 1.0 / 129);
  auto g = build_chain_digraph(m, 0.012);
  // cell 0 sits next to the repeller at angle 0; cell 64 is the attractor 1/2
  CHECK(reaches(g, 0, 64));
  CHECK_FALSE(reaches(g, 64, 0));
}

TEST_CASE("decompose of a permutation gives one terminal component",
          "[digraph]") {
  auto m = three_cycle();
  auto g = build_chain_digraph(m, 0.0);
  auto d = decompose(g);
  REQUIRE(d.component_count() == 1);
  CHECK(d.components[0].size() == 3);
  CHECK(d.terminal[0]);
  CHECK(d.cr_nodes.count() == 3);
}

TEST_CASE("decompose of the north-south model", "[digraph]") {
  auto m = build_grid_model("northsouth", 0.1, 0, 1, true, 1.0 / 129);
  auto g = build_chain_digraph(m, 0.012);
  auto d = decompose(g);
  std::size_t terminals = 0;
  std::int32_t sink_comp = -1;
  for (std::size_t c = 0; c < d.component_count(); ++c)
    if (d.terminal[c]) {
      ++terminals;
      sink_comp = static_cast<std::int32_t>(c);
    }
  REQUIRE(terminals == 1);
  CHECK(d.comp_of_node[64] == sink_comp);
  // the source cell is recurrent (self loop) but not terminal
  auto source_comp = d.comp_of_node[0];
  REQUIRE(source_comp >= 0);
  CHECK_FALSE(d.terminal[source_comp]);
  CHECK(chain_stability_margin(m, g, d, source_comp) > 0.0);
  CHECK(chain_stability_margin(m, g, d, sink_comp) == 0.0);
}

TEST_CASE("margin is zero exactly on terminal components", "[digraph]") {
  auto m = build_grid_model("doubling", 0, 0, 1, true, 1.0 / 64);
  auto g = build_chain_digraph(m, 1.0 / 32);
  auto d = decompose(g);
  for (std::size_t c = 0; c < d.component_count(); ++c) {
    double margin = chain_stability_margin(m, g, d, static_cast<std::int32_t>(c));
    CHECK((margin == 0.0) == static_cast<bool>(d.terminal[c]));
  }
}

TEST_CASE("complete digraph forms one terminal component with zero margin",
          "[digraph]") {
  auto m = three_cycle();
  auto g = build_chain_digraph(m, 2.0);
  auto d = decompose(g);
  REQUIRE(d.component_count() == 1);
  CHECK(chain_stability_margin(m, g, d, 0) == 0.0);
}

TEST_CASE("decompose agrees with brute-force transitive closure",
          "[digraph][property]") {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 12; ++trial) {
    auto m = oracles::random_model(rng, 4 + rng() % 9);
    double delta = 0.1 + 0.2 * static_cast<double>(trial % 4);
    auto g = build_chain_digraph(m, delta);
    auto d = decompose(g);
    auto b = oracles::brute_decompose(g);
    for (std::size_t v = 0; v < m.size(); ++v)
      CHECK(d.cr_nodes.test(v) == b.cr[v]);
    REQUIRE(d.component_count() == b.components.size());
    for (std::size_t v = 0; v < m.size(); ++v) {
      if (!b.cr[v]) continue;
      for (std::size_t w = 0; w < m.size(); ++w) {
        if (!b.cr[w]) continue;
        CHECK((d.comp_of_node[v] == d.comp_of_node[w]) ==
              (b.comp_of_node[v] == b.comp_of_node[w]));
      }
    }
    // terminal flags agree via node membership
    for (std::size_t c = 0; c < d.component_count(); ++c) {
      NodeId rep = d.components[c][0];
      CHECK(static_cast<bool>(d.terminal[c]) ==
            static_cast<bool>(b.terminal[b.comp_of_node[rep]]));
    }
  }
}

TEST_CASE("edges and recurrence are monotone in delta", "[digraph][property]") {
  std::mt19937_64 rng(99);
  auto m = oracles::random_model(rng, 12);
  auto g1 = build_chain_digraph(m, 0.15);
  auto g2 = build_chain_digraph(m, 0.4);
  for (std::size_t v = 0; v < m.size(); ++v)
    for (NodeId w : g1.out(static_cast<NodeId>(v)))
      CHECK(g2.has_edge(static_cast<NodeId>(v), w));
  auto d1 = decompose(g1);
  auto d2 = decompose(g2);
  for (std::size_t v = 0; v < m.size(); ++v)
    if (d1.cr_nodes.test(v)) CHECK(d2.cr_nodes.test(v));
}

TEST_CASE("every node reaches a terminal component", "[digraph][property]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    auto m = oracles::random_model(rng, 50);
    auto g = build_chain_digraph(m, 0.12);
    auto d = decompose(g);
    auto ok = reaches_terminal_component(g, d);
    for (std::size_t v = 0; v < m.size(); ++v) CHECK(ok[v]);
  }
}

TEST_CASE("paths in the digraph are delta-chains", "[digraph][property]") {
  auto m = build_grid_model("tent", 0, 0, 1, false, 1.0 / 64);
  double delta = 1.0 / 32;
  auto g = build_chain_digraph(m, delta);
  std::mt19937_64 rng(5);
  for (int walk = 0; walk < 40; ++walk) {
    NodeId v = static_cast<NodeId>(rng() % m.size());
    for (int step = 0; step < 15; ++step) {
      auto out = g.out(v);
      REQUIRE_FALSE(out.empty());
      NodeId w = out[rng() % out.size()];
      // true image of the cell center lands within delta of the target
      double y = m.map_fn(m.coords[v]);
      CHECK(std::abs(y - m.coords[w]) <= delta + 1e-12);
      v = w;
    }
  }
}

TEST_CASE("omega component follows the canonical orbit", "[digraph]") {
  auto fixed = two_fixed_points();
  auto gf = build_chain_digraph(fixed, 0.1);
  auto df = decompose(gf);
  CHECK(omega_component(fixed, df, 0) == df.comp_of_node[0]);

  auto m = build_grid_model("northsouth", 0.1, 0, 1, true, 1.0 / 129);
  auto g = build_chain_digraph(m, 0.012);
  auto d = decompose(g);
  // a mid-flow cell falls into the sink component
  auto sink = d.comp_of_node[64];
  CHECK(omega_component(m, d, 20) == sink);

  auto c = three_cycle();
  auto gc = build_chain_digraph(c, 0.0);
  auto dc = decompose(gc);
  CHECK(omega_component(c, dc, 1) == 0);
}

TEST_CASE("find_path returns shortest positive-length paths", "[digraph]") {
  auto m = three_cycle();
  auto g = build_chain_digraph(m, 0.0);
  auto p = find_path(g, 0, 0);
  REQUIRE(p.has_value());
  CHECK(p->size() == 4);  // 0 -> 1 -> 2 -> 0
  CHECK(p->front() == 0);
  CHECK(p->back() == 0);
  auto iso = two_fixed_points();
  auto gi = build_chain_digraph(iso, 0.2);
  CHECK_FALSE(find_path(gi, 0, 1).has_value());
}

TEST_CASE("exports are well-formed", "[digraph]") {
  auto m = build_grid_model("northsouth", 0.1, 0, 1, true, 1.0 / 129);
  auto g = build_chain_digraph(m, 0.012);
  auto d = decompose(g);
  auto dot = condensation_dot(g, d);
  CHECK(dot.find("digraph condensation") != std::string::npos);
  CHECK(dot.find("lightblue") != std::string::npos);  // terminal highlighted
  auto csv = edges_csv(g);
  CHECK(csv.rfind("src,dst\n", 0) == 0);
}
