#include "cqa/homomorphism.hpp"

#include "cqa/fuzz.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cqa;

TEST_CASE("order preservation rules out the swapped tree") {
  TreeQuery p = parse_tree_query("R(A,B)");
  TreeQuery q = parse_tree_query("R(B,A)");
  CHECK_FALSE(tree_hom(p, q));
  CHECK_FALSE(tree_hom(q, p));
}

TEST_CASE("identity witness under a root pin") {
  TreeQuery q = parse_tree_query("C(R(A,B),R(B,A))");
  auto w = tree_hom(q, q, std::make_pair(0, 0));
  REQUIRE(w);
  for (int v = 0; v < q.size(); ++v) CHECK(w->map[v] == v);
}

TEST_CASE("bottom leaves map anywhere") {
  TreeQuery p = parse_tree_query("R(_,_)");
  TreeQuery q = parse_tree_query("R(A,B)");
  auto w = tree_hom(p, q);
  REQUIRE(w);
  CHECK(q.label(w->map[1]).text == "A");
  CHECK(q.label(w->map[2]).text == "B");
}

TEST_CASE("pin validation") {
  TreeQuery q = parse_tree_query("R(A,B)");
  CHECK_THROWS_AS(tree_hom(q, q, std::make_pair(9, 0)), std::out_of_range);
  CHECK_THROWS_AS(tree_hom(q, q, std::make_pair(0, -1)), std::out_of_range);
}

TEST_CASE("cq_hom examples") {
  auto w = cq_hom(parse_graph_query("R(x; z), S(y; z)"),
                  parse_graph_query("R(ap; cp), S(bp; cp)"));
  REQUIRE(w);
  CHECK(w->map.at("x") == Symbol::var("ap"));
  CHECK(w->map.at("y") == Symbol::var("bp"));
  CHECK(w->map.at("z") == Symbol::var("cp"));

  auto w2 = cq_hom(parse_graph_query("R(x; y)"), parse_graph_query("R(u; 'c')"));
  REQUIRE(w2);
  CHECK(w2->map.at("y") == Symbol::constant("c"));

  // The two intro queries differ in sibling order under R; the shared root
  // atom pins each branch positionally, so neither maps into the other.
  GraphQuery fig1a = tree_to_graph(parse_tree_query("C(R(A,B),R(B,A))"));
  GraphQuery fig1c = tree_to_graph(parse_tree_query("C(R(A,B),R(A,B))"));
  CHECK(cq_hom(fig1a, fig1c).has_value() == test::hom_exists_bruteforce(fig1a, fig1c));
  CHECK(cq_hom(fig1c, fig1a).has_value() == test::hom_exists_bruteforce(fig1c, fig1a));
  CHECK_FALSE(cq_hom(fig1a, fig1c));
  CHECK_FALSE(cq_hom(fig1c, fig1a));
}

TEST_CASE("core examples") {
  GraphQuery folded = core(parse_graph_query("R(x; z), R(y; z)"));
  CHECK(folded.size() == 1);
  CHECK(folded.str() == "R(x; z)");

  CHECK(core(parse_graph_query("R(x; y), R(u; v)")).size() == 1);

  // Tree queries are minimal.
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    GraphQuery g = tree_to_graph(random_tree_query(rng));
    CHECK(core(g).size() == g.size());
  }
}

TEST_CASE("property: pruned chains give transitive homomorphisms") {
  Rng rng(12);
  int composed = 0;
  for (int i = 0; i < 200; ++i) {
    TreeQuery t3 = random_tree_query(rng, {.max_vertices = 9});
    TreeQuery t2 = test::prune_random_subtree(rng, t3);
    TreeQuery t1 = test::prune_random_subtree(rng, t2);
    auto h12 = tree_hom(t1, t2);
    auto h23 = tree_hom(t2, t3);
    REQUIRE(h12);
    REQUIRE(h23);
    auto h13 = tree_hom(t1, t3);
    REQUIRE(h13);
    ++composed;
    // Pinned success implies unpinned success.
    auto pinned = tree_hom(t1.tree(), t3.tree(), std::make_pair(0, h13->map[0]));
    CHECK(pinned);
  }
  CHECK(composed == 200);
}

TEST_CASE("property: tree and atom-set homomorphisms agree") {
  Rng rng(13);
  for (int i = 0; i < 250; ++i) {
    TreeQuery a = random_tree_query(rng, {.max_vertices = 7});
    TreeQuery b = i % 3 == 0 ? test::prune_random_subtree(rng, a)
                             : random_tree_query(rng, {.max_vertices = 7});
    bool trees = tree_hom(b, a).has_value();
    bool atoms = cq_hom(tree_to_graph(b), tree_to_graph(a)).has_value();
    CHECK(trees == atoms);
  }
}

TEST_CASE("property: core is idempotent and equivalent") {
  Rng rng(14);
  for (int i = 0; i < 60; ++i) {
    // Two tree queries side by side, second component disconnected.
    GraphQuery g1 = tree_to_graph(random_tree_query(rng, {.max_vertices = 6}));
    GraphQuery g2 = tree_to_graph(random_tree_query(rng, {.max_vertices = 6}));
    std::vector<Atom> atoms = g1.atoms();
    for (Atom a : g2.atoms()) {
      for (Symbol& s : a.args)
        if (s.is_variable()) s.name += "b";
      atoms.push_back(std::move(a));
    }
    GraphQuery q{std::move(atoms)};
    GraphQuery c = core(q);
    CHECK(core(c).size() == c.size());
    CHECK(cq_hom(q, c));
    CHECK(cq_hom(c, q));
  }
}
