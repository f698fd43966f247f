#pragma once

// The context-free grammar of a tree query over rooted-relation-tree strings:
// one forward rule per atom, backward rules along same-relation ancestor
// chains, leaf and constant rules. Supports derivation checking on explicit
// trees and acceptance over consistent instances.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cqa/model.hpp"

namespace cqa {

class TreeCFG {
 public:
  TreeCFG() = default;
  explicit TreeCFG(TreeQuery q);

  const TreeQuery& query() const { return q_; }
  int nonterminal_count() const { return nt_count_; }
  // Nonterminal of a vertex; constant-labeled vertices of equal value share
  // one nonterminal.
  int nonterminal(int v) const { return nt_of_vertex_[v]; }
  std::optional<int> constant_nonterminal(const std::string& c) const;
  // For internal v: nonterminals of its children, position-wise.
  const std::vector<int>& child_nonterminals(int v) const { return child_nts_[v]; }
  // Backward-rule targets: same-relation strict ancestors of v, nearest first.
  const std::vector<int>& backward_targets(int v) const { return backward_[v]; }
  // v followed by its backward closure; a forward rule may fire at any member.
  const std::vector<int>& chain(int v) const { return chain_[v]; }
  // Vertices whose chain contains x (x itself and same-relation descendants).
  const std::vector<int>& chain_dependents(int x) const { return dependents_[x]; }

  std::string rules_str() const;

 private:
  TreeQuery q_;
  int nt_count_ = 0;
  std::vector<int> nt_of_vertex_;
  std::map<std::string, int> nt_of_constant_;
  std::vector<std::vector<int>> child_nts_;
  std::vector<std::vector<int>> backward_;
  std::vector<std::vector<int>> chain_;
  std::vector<std::vector<int>> dependents_;
};

inline TreeCFG build_cfg(const TreeQuery& q) { return TreeCFG(q); }

// S_start ->* tau, for start a vertex of the grammar's query. Throws on a
// relation-arity conflict between tau and the query's schema.
bool derives(const TreeCFG& g, int start_vertex, const RelationTree& tau);

// True iff some rooted tree set in the consistent instance r, starting in c,
// derives from S_u. Throws if r is inconsistent.
bool accepts_in_consistent(const TreeCFG& g, int u, const std::string& c,
                           const Database& r);

// All constants of r that start an accepted tree for S_u; the per-constant
// probe above is a lookup into this fixpoint.
std::set<std::string> accepted_start_constants(const TreeCFG& g, int u,
                                               const Database& r);

}  // namespace cqa
