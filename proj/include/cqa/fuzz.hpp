#pragma once

// Seeded random instance generation for the self-test harness and the
// property suites: tree queries over a small alphabet biased toward
// self-joins, and databases with bounded blocks and repair counts.

#include <cstdint>
#include <random>
#include <vector>

#include "cqa/model.hpp"

namespace cqa {

using Rng = std::mt19937_64;

struct TreeGenOptions {
  int max_vertices = 8;
  // Probability of duplicating one branch over a sibling, which raises the
  // rate of homomorphically comparable self-joins.
  double duplicate_branch_prob = 0.35;
  bool allow_constants = true;
};

TreeQuery random_tree_query(Rng& rng, const TreeGenOptions& opt = {});

struct DbGenOptions {
  int max_adom = 6;
  int max_blocks_per_relation = 3;
  int max_block_size = 3;
  std::uint64_t max_repairs = 4096;
};

// Facts over the schema of q, constants drawn from a small pool that
// includes q's own constants.
Database random_database(Rng& rng, const TreeQuery& q, const DbGenOptions& opt = {});

// Rejection sampling helper; throws after `tries` failures.
template <typename Pred>
TreeQuery random_tree_query_where(Rng& rng, const Pred& pred,
                                  const TreeGenOptions& opt = {}, int tries = 10000) {
  for (int i = 0; i < tries; ++i) {
    TreeQuery q = random_tree_query(rng, opt);
    if (pred(q)) return q;
  }
  throw std::runtime_error("no query matching the predicate after many tries");
}

// All rooted relation trees realizable in a consistent instance starting at
// c, up to the vertex budget. Ground truth for grammar acceptance on small
// instances.
std::vector<RelationTree> trees_in_instance(const Database& r, const std::string& c,
                                            int max_vertices, std::size_t max_count = 20000);

}  // namespace cqa
