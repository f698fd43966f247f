#include "cqa/model.hpp"

#include "cqa/classification.hpp"
#include "cqa/fuzz.hpp"
#include "doctest.h"

using namespace cqa;

TEST_CASE("tree query parsing round-trips the intro query") {
  TreeQuery q = parse_tree_query("C(R(A,B),R(B,A))");
  CHECK(q.size() == 7);
  CHECK(q.str() == "C(R(A,B),R(B,A))");
  CHECK(q.var_name(0) == "x0");
  CHECK(q.internal(0));
  CHECK(q.children(0).size() == 2);
}

TEST_CASE("the two-branch example query has eleven variables") {
  TreeQuery q = parse_tree_query("A(R(R(U,_),X('c1')),R(Y(_),Z('c2',_)))");
  CHECK(q.size() == 13);  // 11 variable vertices plus two constants
  int variables = 0;
  for (int v = 0; v < q.size(); ++v) variables += q.has_variable(v);
  CHECK(variables == 11);
  CHECK(q.var_name(12) == "x10");
  CHECK(q.constants() == std::set<std::string>{"c1", "c2"});
  CHECK(parse_tree_query(q.str()) == q);
}

TEST_CASE("tree parse errors") {
  CHECK_THROWS_AS(parse_tree_query("_"), ParseError);            // no atom
  CHECK_THROWS_AS(parse_tree_query("'c'"), ParseError);          // no atom
  CHECK_THROWS_AS(parse_tree_query("A"), ParseError);            // root must be internal
  CHECK_THROWS_AS(parse_tree_query("C(R(A),R(A,B))"), std::exception);  // arity conflict
  CHECK_THROWS_AS(parse_tree_query("R(R,A)"), std::exception);   // R internal and unary
  CHECK_THROWS_AS(parse_tree_query("C(R(A,B)"), ParseError);     // unbalanced
  CHECK_THROWS_AS(parse_tree_query("r(A)"), ParseError);         // lowercase relation
  CHECK_THROWS_AS(parse_tree_query("C(A) extra"), ParseError);
}

TEST_CASE("whitespace is insignificant") {
  CHECK(parse_tree_query(" C( R(A, B) , R(B,A) ) ").str() == "C(R(A,B),R(B,A))");
}

TEST_CASE("graph query parsing") {
  GraphQuery q = parse_graph_query("R(x; z), S(y; z)");
  CHECK(q.size() == 2);
  CHECK(q.is_graphbcq());
  CHECK(q.is_selfjoinfree());

  GraphQuery q1 = parse_graph_query("R(x; y, z), R(z; x, y)");
  CHECK(q1.is_graphbcq());
  CHECK_FALSE(q1.is_selfjoinfree());

  GraphQuery composite = parse_graph_query("R(x, y; z)");
  CHECK(composite.atoms()[0].key_arity == 2);
  CHECK_FALSE(composite.is_graphbcq());

  CHECK(parse_graph_query("A(x;)").atoms()[0].arity() == 1);
  CHECK(parse_graph_query("A(x)").atoms()[0].key_arity == 1);
  CHECK(parse_graph_query("R(x; 'c')").constants() == std::set<std::string>{"c"});

  CHECK_THROWS_AS(parse_graph_query(""), ParseError);
  CHECK_THROWS_AS(parse_graph_query("R(X; y)"), ParseError);  // uppercase variable
  CHECK_THROWS_AS(parse_graph_query("R(x; y), R(u, v; w)"), std::exception);  // key arity
}

TEST_CASE("tree_to_graph emits one atom per internal or unary vertex") {
  TreeQuery q1 = parse_tree_query("C(R(A,B),R(B,A))");
  GraphQuery g = tree_to_graph(q1);
  CHECK(g.size() == 7);
  CHECK(g.atoms()[0].str() == "C(x0; x1, x4)");
  CHECK(g.atoms()[1].str() == "R(x1; x2, x3)");
  CHECK(g.atoms()[2].str() == "A(x2;)");
  CHECK(g.is_graphbcq());

  CHECK(tree_to_graph(parse_tree_query("R(_)")).str() == "R(x0; x1)");
  CHECK(tree_to_graph(parse_tree_query("A(R(R(U,_),X('c1')),R(Y(_),Z('c2',_)))")).size() == 8);
}

TEST_CASE("database parsing and blocks") {
  Database db = parse_database("R(a; b)");
  CHECK(db.consistent());
  CHECK(db.adom() == std::vector<std::string>{"a", "b"});

  Database two = parse_database("R(a; b)\nR(a; c)\n");
  CHECK(two.blocks().size() == 1);
  CHECK(two.blocks()[0].fact_ids.size() == 2);
  CHECK_FALSE(two.consistent());

  Database dup = parse_database("R(a; b)\nR(a; b)\n# comment\n\n");
  CHECK(dup.size() == 1);

  CHECK_THROWS_AS(parse_database("R(a; b)\nR(a; b, c)\n"), ParseError);   // arity
  CHECK_THROWS_AS(parse_database("R(a; b)\nR(a, b; c)\n"), ParseError);  // key arity
  CHECK_THROWS_AS(parse_database("R(a; b"), ParseError);

  // quoting round-trip for constants that need it
  Database quoted = parse_database("R('hello world'; 'x,y')\n");
  CHECK(parse_database(quoted.str()) == quoted);
}

TEST_CASE("database round-trips the example instance shape") {
  Database db = parse_database(
      "C(c1; x1, z-)\nC(c1; x2, z-)\nC(c2; z+, x1)\nC(c2; z+, x2)\n"
      "R(x1; a, b)\nR(x1; b, a)\nR(x2; a, b)\nR(x2; b, a)\n"
      "R(z+; a, b)\nR(z-; b, a)\nA(a)\nB(b)\n");
  CHECK(db.size() == 12);
  int size2 = 0;
  for (const auto& b : db.blocks()) size2 += b.fact_ids.size() == 2;
  CHECK(size2 == 4);
  CHECK(db.find_block("R", {"z+"}) != nullptr);
  CHECK(db.find_block("R", {"z+"})->fact_ids.size() == 1);
  CHECK(parse_database(db.str()) == db);
}

TEST_CASE("property: parse/serialize round-trip on random trees") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    TreeQuery q = random_tree_query(rng);
    CHECK(parse_tree_query(q.str()) == q);
  }
}

TEST_CASE("property: blocks partition the fact set") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    TreeQuery q = random_tree_query(rng);
    Database db = random_database(rng, q);
    std::size_t total = 0;
    std::set<int> seen;
    for (const auto& b : db.blocks()) {
      total += b.fact_ids.size();
      for (int id : b.fact_ids) CHECK(seen.insert(id).second);
    }
    CHECK(total == static_cast<std::size_t>(db.size()));
  }
}

TEST_CASE("property: tree_to_graph output is recognized as the same tree") {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    TreeQuery q = random_tree_query(rng);
    GraphQuery g = tree_to_graph(q);
    CHECK(g.is_graphbcq());
    auto back = is_tree_query(g);
    REQUIRE(back.has_value());
    CHECK(back->str() == q.str());
  }
}
