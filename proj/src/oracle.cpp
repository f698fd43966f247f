#include "cqa/oracle.hpp"

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cqa {

RepairCursor::RepairCursor(const Database& db) : db_(&db) {
  choices_.reserve(db.blocks().size());
  for (const auto& b : db.blocks()) {
    std::vector<const Fact*> facts;
    facts.reserve(b.fact_ids.size());
    for (int id : b.fact_ids) facts.push_back(&db.facts()[id]);
    // fact_ids ascend and facts() is sorted, so each block is already in
    // lexicographic fact order.
    if (__builtin_mul_overflow(total_, static_cast<std::uint64_t>(facts.size()), &total_))
      overflow_ = true;
    choices_.push_back(std::move(facts));
  }
  if (overflow_) total_ = UINT64_MAX;
}

void RepairCursor::require_within(std::uint64_t cap) const {
  if (overflow_ || total_ > cap) throw CapExceeded(total_, overflow_, cap);
}

std::vector<const Fact*> RepairCursor::repair_facts(std::uint64_t index) const {
  std::vector<const Fact*> out(choices_.size());
  // Mixed radix, first block most significant.
  for (std::size_t b = choices_.size(); b-- > 0;) {
    std::uint64_t k = choices_[b].size();
    out[b] = choices_[b][index % k];
    index /= k;
  }
  return out;
}

Database RepairCursor::repair(std::uint64_t index) const {
  std::vector<Fact> facts;
  for (const Fact* f : repair_facts(index)) facts.push_back(*f);
  return Database(std::move(facts));
}

std::vector<Database> enumerate_repairs(const Database& db, std::uint64_t cap) {
  RepairCursor cur(db);
  cur.require_within(cap);
  std::vector<Database> out;
  out.reserve(cur.total());
  for (std::uint64_t i = 0; i < cur.total(); ++i) out.push_back(cur.repair(i));
  return out;
}

namespace {

struct EvalSearch {
  const GraphQuery& q;
  std::map<std::string, std::vector<const Fact*>> by_relation;
  ConstValuation assignment;
  std::vector<char> done;

  EvalSearch(const GraphQuery& q_, const std::vector<const Fact*>& facts) : q(q_) {
    for (const Fact* f : facts) by_relation[f->relation].push_back(f);
    done.assign(q.atoms().size(), 0);
  }

  bool matches(const Atom& a, const Fact& f) const {
    if (f.key_arity() != a.key_arity || f.arity() != a.arity()) return false;
    ConstValuation local;
    for (int i = 0; i < a.arity(); ++i) {
      const Symbol& s = a.args[i];
      const std::string& v =
          i < a.key_arity ? f.key[i] : f.values[i - a.key_arity];
      if (s.is_constant()) {
        if (s.name != v) return false;
        continue;
      }
      const std::string* bound = nullptr;
      if (auto it = assignment.find(s.name); it != assignment.end()) bound = &it->second;
      else if (auto it2 = local.find(s.name); it2 != local.end()) bound = &it2->second;
      if (bound) {
        if (*bound != v) return false;
      } else {
        local.emplace(s.name, v);
      }
    }
    return true;
  }

  int candidate_count(int i) const {
    auto it = by_relation.find(q.atoms()[i].relation);
    if (it == by_relation.end()) return 0;
    int n = 0;
    for (const Fact* f : it->second)
      if (matches(q.atoms()[i], *f)) ++n;
    return n;
  }

  bool solve(int remaining) {
    if (remaining == 0) return true;
    int best = -1, best_count = -1;
    for (std::size_t i = 0; i < done.size(); ++i) {
      if (done[i]) continue;
      int n = candidate_count(static_cast<int>(i));
      if (best < 0 || n < best_count) {
        best = static_cast<int>(i);
        best_count = n;
      }
    }
    if (best_count == 0) return false;
    const Atom& a = q.atoms()[best];
    done[best] = 1;
    auto it = by_relation.find(a.relation);
    for (const Fact* f : it->second) {
      if (!matches(a, *f)) continue;
      std::vector<std::string> added;
      for (int i = 0; i < a.arity(); ++i) {
        const Symbol& s = a.args[i];
        if (!s.is_variable() || assignment.count(s.name)) continue;
        const std::string& v =
            i < a.key_arity ? f->key[i] : f->values[i - a.key_arity];
        assignment.emplace(s.name, v);
        added.push_back(s.name);
      }
      if (solve(remaining - 1)) return true;
      for (const auto& v : added) assignment.erase(v);
    }
    done[best] = 0;
    return false;
  }
};

}  // namespace

std::optional<ConstValuation> eval_cq(const GraphQuery& q,
                                      const std::vector<const Fact*>& facts) {
  EvalSearch search(q, facts);
  if (!search.solve(static_cast<int>(q.atoms().size()))) return std::nullopt;
  return search.assignment;
}

std::optional<ConstValuation> eval_cq(const GraphQuery& q, const Database& instance) {
  std::vector<const Fact*> facts;
  facts.reserve(instance.facts().size());
  for (const Fact& f : instance.facts()) facts.push_back(&f);
  return eval_cq(q, facts);
}

bool brute_certain_serial(const GraphQuery& q, const Database& db, std::uint64_t cap) {
  RepairCursor cur(db);
  cur.require_within(cap);
  for (std::uint64_t i = 0; i < cur.total(); ++i)
    if (!eval_cq(q, cur.repair_facts(i))) return false;
  return true;
}

bool brute_certain_parallel(const GraphQuery& q, const Database& db, std::uint64_t cap) {
  RepairCursor cur(db);
  cur.require_within(cap);
  std::atomic<bool> falsified{false};
  const std::int64_t n = static_cast<std::int64_t>(cur.total());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 256)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    if (falsified.load(std::memory_order_relaxed)) continue;
    if (!eval_cq(q, cur.repair_facts(static_cast<std::uint64_t>(i))))
      falsified.store(true, std::memory_order_relaxed);
  }
  return !falsified.load();
}

bool brute_certain(const GraphQuery& q, const Database& db, std::uint64_t cap) {
  RepairCursor cur(db);
  cur.require_within(cap);
  bool big = cur.total() >= 2048;
#ifdef _OPENMP
  if (big && omp_get_max_threads() > 1) return brute_certain_parallel(q, db, cap);
#else
  (void)big;
#endif
  return brute_certain_serial(q, db, cap);
}

std::optional<std::string> brute_certain_trace_witness(const TreeQuery& q,
                                                       const Database& db,
                                                       std::uint64_t cap) {
  RepairCursor cur(db);
  cur.require_within(cap);
  TreeCFG g(q);
  std::set<std::string> candidates(db.adom().begin(), db.adom().end());
  for (std::uint64_t i = 0; i < cur.total() && !candidates.empty(); ++i) {
    Database r = cur.repair(i);
    std::set<std::string> accepted = accepted_start_constants(g, q.root(), r);
    std::set<std::string> kept;
    for (const auto& c : candidates)
      if (accepted.count(c)) kept.insert(c);
    candidates = std::move(kept);
  }
  if (candidates.empty()) return std::nullopt;
  return *candidates.begin();
}

bool brute_certain_trace(const TreeQuery& q, const Database& db, std::uint64_t cap) {
  return brute_certain_trace_witness(q, db, cap).has_value();
}

}  // namespace cqa
