#pragma once

// Rewinding, the syntactic conditions on self-joining atom pairs, the
// tree-query trichotomy, and the extension to graph-shaped queries
// (connected components, Berge-acyclicity, attack graphs).

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cqa/homomorphism.hpp"
#include "cqa/model.hpp"

namespace cqa {

// q[y <- x]: the subtree at y replaced by a fresh copy of the subtree at x.
// x and y must be internal vertices with the same relation label.
TreeQuery rewind(const TreeQuery& q, int y, int x);

struct PairWitness {
  std::string condition;  // "c_branch", "c_factor" or "c_prefix"
  int x = -1;
  int y = -1;
  std::string relation;
};

struct ConditionReport {
  bool c_branch = true;
  bool c_factor = true;
  bool c_prefix = true;
  bool c1 = true;  // = c_prefix && c_branch
  bool c2 = true;  // = c_factor && c_branch
  std::vector<PairWitness> witnesses;  // one per violated pair, deterministic order
};

ConditionReport check_conditions(const TreeQuery& q);

enum class ComplexityClass {
  InFO = 0,
  NLHardInLFP = 1,
  LHardNotFOUpperOpen = 2,
  CoNPComplete = 3,
};

std::string to_string(ComplexityClass c);

struct TreeClassification {
  ComplexityClass cls = ComplexityClass::InFO;
  ConditionReport conditions;
};

TreeClassification classify_tree(const TreeQuery& q);

// x <=_q y: x is an ancestor of y, or the subtree at y maps into the subtree
// at x root-to-root. Total preorder on same-relation atoms when the branch
// condition holds.
bool preorder_le(const TreeQuery& q, int x, int y);

// Partition of atoms by shared-variable connectivity, ordered by least atom
// index.
std::vector<GraphQuery> connected_components(const GraphQuery& q);

// Recognizes the rooted-tree shape of a connected query with simple variable
// keys; returns its tree representation or nullopt.
std::optional<TreeQuery> is_tree_query(const GraphQuery& q);

// True iff the variable/atom incidence multigraph is acyclic; a repeated
// variable within one atom counts as a multi-edge.
bool berge_acyclic(const GraphQuery& q);

struct AttackGraph {
  struct Edge {
    int from = -1;
    int to = -1;
    bool strong = false;
  };
  std::vector<std::set<std::string>> closure;  // per atom: variables determined by its key
  std::vector<Edge> edges;                     // sorted by (from, to)

  bool attacks(int f, int g) const;
  // coNP criterion: two atoms attacking each other with at least one strong
  // attack.
  bool has_strong_cycle() const;
};

// Requires a self-join-free query.
AttackGraph attack_graph(const GraphQuery& q);

struct ComponentClassification {
  GraphQuery query;
  ComplexityClass cls = ComplexityClass::InFO;
  std::optional<TreeClassification> tree;  // present when the component is tree-shaped
};

struct GraphClassification {
  GraphQuery core_query;
  std::vector<ComponentClassification> components;
  ComplexityClass overall = ComplexityClass::InFO;
  // Set when some component lands in the L-hard bucket, whose exact upper
  // bound is open.
  bool upper_open = false;
};

// Requires membership in the simple-key class checked by is_graphbcq().
GraphClassification classify_graph(const GraphQuery& q);

// Key-value rendering of a classification record; stable field names.
std::string classification_record(const TreeClassification& c, const TreeQuery& q);
std::string classification_record(const GraphClassification& c);

}  // namespace cqa
