#pragma once

// Instance generators for the hardness reductions and the worked example
// instance: canonical copies, the monotone-SAT gadget, the reachability
// gadget, the fact-lifting bridge from self-join-free instances, and the
// bundled example database.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqa/model.hpp"

namespace cqa {

struct MonotoneCNF {
  struct Clause {
    bool positive = true;
    std::vector<std::string> vars;  // non-empty, uniform polarity
  };
  std::vector<std::string> variables;  // sorted, unique
  std::vector<Clause> clauses;
};

// "(x1|x2)&(~x1|~x2)": clauses joined by '&', literals by '|', '~' negates;
// parentheses optional. Every clause must be all-positive or all-negative.
MonotoneCNF parse_cnf(std::string_view text);
// Truth-table decision; the independent oracle for the SAT gadget.
bool cnf_satisfiable(const MonotoneCNF& cnf);

struct Digraph {
  std::vector<std::string> vertices;
  std::vector<std::pair<int, int>> edges;  // unique, sorted
  int s = -1;
  int t = -1;

  bool acyclic() const;
  bool reachable_s_to_t() const;
};

// Edge list "u>v,v>w"; s and t are added as isolated vertices when absent.
Digraph parse_digraph(std::string_view edges, const std::string& s, const std::string& t);

// Deterministic fresh-constant naming for one canonical copy.
struct FreshNames {
  std::string prefix;
  std::string make(const std::string& var) const { return prefix + "." + var; }
};

// Grounds q: bound variables take the given constants, all other variables
// fresh ones, constants map to themselves. Throws when a binding collides
// with a constant of q or another binding.
std::vector<Fact> canonical_copy(const GraphQuery& q,
                                 const std::map<std::string, std::string>& bindings,
                                 const FreshNames& fresh);

// First pair of same-relation atoms witnessing a violation of the second
// condition: no homomorphism into either rewind direction.
std::optional<std::pair<int, int>> find_c2_violation(const TreeQuery& q);

// Monotone-SAT reduction instance for a query with C2-violating pair (p, n):
// its certain answer is false iff the formula is satisfiable.
Database sat_gadget(const TreeQuery& q, int p, int n, const MonotoneCNF& phi);
Database sat_gadget(const TreeQuery& q, const MonotoneCNF& phi);

// The lowest consecutive same-relation ancestor pair (x, y) with no
// root-to-root homomorphism from the subtree at y into the subtree at x.
std::optional<std::pair<int, int>> find_reach_pair(const TreeQuery& q);

// Reachability reduction instance: certain answer false iff t is reachable
// from s.
Database reach_gadget(const TreeQuery& q, int x, int y, const Digraph& g);
Database reach_gadget(const TreeQuery& q, const Digraph& g);

// Self-join-free version of q: atom i's relation renamed to <name><i+1>.
GraphQuery sjf_of(const GraphQuery& q);

// Lifts an instance over sjf(q)'s schema to one over q's schema by pairing
// every constant with the query symbol at its position ("c@x3"). Requires a
// minimal, constant-free q.
Database sjf_lift(const GraphQuery& q, const Database& sjf_db);

// The bundled 12-fact example instance together with its query
// C(R(A,B),R(B,A)); four binary blocks, sixteen repairs, certain answer
// false.
std::pair<TreeQuery, Database> fig5_instance();

}  // namespace cqa
