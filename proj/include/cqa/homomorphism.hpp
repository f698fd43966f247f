#pragma once

// Homomorphism tests between rooted relation trees and between conjunctive
// queries, and core (minimal equivalent query) computation.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cqa/model.hpp"

namespace cqa {

// A tree homomorphism maps vertices of p to vertices of q, preserving labels,
// order and child positions; bottom leaves may map anywhere. Because child i
// must map to child i, a homomorphism is fully determined by the image of
// p's root.
struct TreeHomWitness {
  std::vector<int> map;  // p-vertex -> q-vertex
};

// Feasibility matrix: feas[u][v] iff the subtree of p rooted at u maps into
// the subtree of q rooted at v with u -> v. Shared by the classification
// conditions, which probe subtree-to-subtree maps without extracting
// subtrees.
std::vector<std::vector<char>> tree_hom_feasibility(const RelationTree& p,
                                                    const RelationTree& q);

// p <= q, optionally pinned: the witness must send pin.first (a vertex of p)
// to pin.second (a vertex of q).
std::optional<TreeHomWitness> tree_hom(const RelationTree& p, const RelationTree& q,
                                       std::optional<std::pair<int, int>> pin = std::nullopt);
inline std::optional<TreeHomWitness> tree_hom(const TreeQuery& p, const TreeQuery& q,
                                              std::optional<std::pair<int, int>> pin = std::nullopt) {
  return tree_hom(p.tree(), q.tree(), pin);
}

// Conjunctive-query homomorphism: maps variables of p to symbols of q,
// identity on constants, sending every atom of p onto an atom of q
// position-wise.
struct CQHomWitness {
  std::map<std::string, Symbol> map;  // variable of p -> symbol of q
};

std::optional<CQHomWitness> cq_hom(const GraphQuery& p, const GraphQuery& q);

// Minimal equivalent subquery: repeatedly drops the least-indexed atom a for
// which q maps homomorphically into q minus a.
GraphQuery core(const GraphQuery& q);

}  // namespace cqa
