#pragma once

// Fixpoint evaluation of certain trace answers: the set B of pairs
// <constant, vertex>, the per-fact `fact` predicate with its backward
// disjunction, frugal repairs, and the top-level certain-answer decision.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cqa/classification.hpp"
#include "cqa/grammar.hpp"
#include "cqa/model.hpp"

namespace cqa {

inline constexpr std::uint64_t kDefaultOracleCap = 1'000'000;

// The pair set computed by the fixpoint, with the round at which each pair
// entered (initialization pairs are round 0). Monotone: pairs only grow.
class CertMemo {
 public:
  CertMemo() = default;
  CertMemo(std::vector<std::string> constants, int nonterminal_count);

  bool contains(const std::string& c, int nonterminal) const;
  int round(const std::string& c, int nonterminal) const;  // -1 when absent
  std::size_t size() const { return pair_count_; }
  const std::vector<std::string>& constants() const { return constants_; }

  // Mutation is reserved to the fixpoint drivers.
  bool insert(int const_id, int nonterminal, int round);
  bool test(int const_id, int nonterminal) const {
    return in_[index(const_id, nonterminal)] != 0;
  }
  int const_id(const std::string& c) const;

 private:
  std::size_t index(int ci, int nt) const { return static_cast<std::size_t>(ci) * nt_count_ + nt; }
  std::vector<std::string> constants_;  // sorted
  int nt_count_ = 0;
  std::vector<char> in_;
  std::vector<int> round_;
  std::size_t pair_count_ = 0;
};

// Least fixpoint of the iterative rule: <c, y> enters when the block of y's
// relation keyed c is non-empty and every fact in it satisfies the fact
// predicate at y. Worklist-scheduled; the operator is monotone, so the
// result is schedule-independent.
CertMemo compute_B(const TreeCFG& g, const Database& db);
CertMemo compute_B(const TreeQuery& q, const Database& db);

// The variant without the backward disjunction; decides the root for
// queries whose prefix condition holds.
CertMemo compute_B_forward(const TreeCFG& g, const Database& db);
CertMemo compute_B_forward(const TreeQuery& q, const Database& db);

// Round-synchronous evaluation of the same operator with the per-round
// candidate sweep parallelized (OpenMP when enabled). Agrees with
// compute_B by monotonicity.
CertMemo compute_B_rounds_parallel(const TreeCFG& g, const Database& db);
CertMemo compute_B_rounds_parallel(const TreeQuery& q, const Database& db);

// fact(R(c, d...), y): the forward conjunction over child pairs, or the
// backward disjunction over same-relation strict ancestors of y.
bool fact_holds(const TreeCFG& g, const CertMemo& B, const Fact& f, int y);

// Atoms x of q with f's relation name such that fact(f, x) holds at B;
// within a block these sets are pairwise comparable when the branch
// condition holds.
std::set<int> frugal_set(const TreeCFG& g, const CertMemo& B, const Fact& f);

// Certain trace decision: some constant c with <c, root> in B.
bool certain_trace(const TreeQuery& q, const Database& db);
std::optional<std::string> certain_trace_witness(const TreeQuery& q, const Database& db);

// One fact per block, chosen with subset-minimal frugal set (ties broken by
// the lexicographically least fact). Throws if frugal sets in some block are
// incomparable, which cannot happen when the branch condition holds.
Database frugal_repair(const TreeQuery& q, const Database& db);

enum class Method { ForwardOnly, Fixpoint, Oracle };
std::string to_string(Method m);

struct CertainAnswer {
  bool value = false;
  Method method = Method::Oracle;
  std::optional<std::string> witness;  // trace start constant, when decided by fixpoint
  TreeClassification classification;
};

// Classifies q and dispatches: forward-only evaluation under C1, the
// fixpoint under C2, and the brute-force oracle otherwise.
CertainAnswer certain(const TreeQuery& q, const Database& db,
                      std::uint64_t oracle_cap = kDefaultOracleCap);

}  // namespace cqa
