#pragma once

// Ground truth by brute force: repair enumeration, conjunctive-query
// evaluation, and exact certain-answer decisions on small instances.
//
// The repair scan is the one data-parallel loop of the project; it ships in
// a serial reference form and an OpenMP form that are tested against each
// other and compared by the benchmark target.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqa/grammar.hpp"
#include "cqa/model.hpp"

namespace cqa {

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(std::uint64_t count, bool overflowed, std::uint64_t cap)
      : std::runtime_error("repair count " +
                           (overflowed ? "> 2^64" : std::to_string(count)) +
                           " exceeds cap " + std::to_string(cap)),
        count_(count),
        overflowed_(overflowed) {}
  std::uint64_t count() const { return count_; }
  bool overflowed() const { return overflowed_; }

 private:
  std::uint64_t count_;
  bool overflowed_;
};

// Random access into the repair space: repairs are indexed 0 .. total()-1 in
// mixed radix over block choices, blocks in (relation, key) order and facts
// within a block in lexicographic order. Index order is lexicographic over
// the per-block choice vector.
class RepairCursor {
 public:
  explicit RepairCursor(const Database& db);

  std::uint64_t total() const { return total_; }
  bool overflowed() const { return overflow_; }
  void require_within(std::uint64_t cap) const;

  std::vector<const Fact*> repair_facts(std::uint64_t index) const;
  Database repair(std::uint64_t index) const;

 private:
  const Database* db_;
  std::vector<std::vector<const Fact*>> choices_;  // per block, sorted facts
  std::uint64_t total_ = 1;
  bool overflow_ = false;
};

// Materializes every repair; throws CapExceeded past the cap.
std::vector<Database> enumerate_repairs(const Database& db,
                                        std::uint64_t cap = 1'000'000);

// Satisfying valuation of q on one instance, if any; backtracking with a
// most-constrained-atom order.
using ConstValuation = std::map<std::string, std::string>;
std::optional<ConstValuation> eval_cq(const GraphQuery& q, const Database& instance);
std::optional<ConstValuation> eval_cq(const GraphQuery& q,
                                      const std::vector<const Fact*>& facts);

// Does every repair of db satisfy q? The default entry picks the parallel
// scan for large repair spaces.
bool brute_certain(const GraphQuery& q, const Database& db,
                   std::uint64_t cap = 1'000'000);
bool brute_certain_serial(const GraphQuery& q, const Database& db,
                          std::uint64_t cap = 1'000'000);
bool brute_certain_parallel(const GraphQuery& q, const Database& db,
                            std::uint64_t cap = 1'000'000);

// Is there a constant that starts an accepted tree of q's grammar in every
// repair?
bool brute_certain_trace(const TreeQuery& q, const Database& db,
                         std::uint64_t cap = 1'000'000);
std::optional<std::string> brute_certain_trace_witness(const TreeQuery& q,
                                                       const Database& db,
                                                       std::uint64_t cap = 1'000'000);

}  // namespace cqa
