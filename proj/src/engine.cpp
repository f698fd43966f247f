#include "cqa/engine.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "cqa/oracle.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cqa {

CertMemo::CertMemo(std::vector<std::string> constants, int nonterminal_count)
    : constants_(std::move(constants)), nt_count_(nonterminal_count) {
  in_.assign(constants_.size() * nt_count_, 0);
  round_.assign(constants_.size() * nt_count_, -1);
}

int CertMemo::const_id(const std::string& c) const {
  auto it = std::lower_bound(constants_.begin(), constants_.end(), c);
  if (it == constants_.end() || *it != c) return -1;
  return static_cast<int>(it - constants_.begin());
}

bool CertMemo::contains(const std::string& c, int nonterminal) const {
  int ci = const_id(c);
  return ci >= 0 && nonterminal >= 0 && nonterminal < nt_count_ && test(ci, nonterminal);
}

int CertMemo::round(const std::string& c, int nonterminal) const {
  int ci = const_id(c);
  if (ci < 0 || nonterminal < 0 || nonterminal >= nt_count_) return -1;
  return round_[index(ci, nonterminal)];
}

bool CertMemo::insert(int const_id, int nonterminal, int round) {
  std::size_t i = index(const_id, nonterminal);
  if (in_[i]) return false;
  in_[i] = 1;
  round_[i] = round;
  ++pair_count_;
  return true;
}

namespace {

// Whether facts of this database relation can be consumed by atoms labeled
// `rel` in the query: simple key, matching arity.
bool schema_matches(const Database& db, const std::string& rel, int n_children) {
  auto it = db.schema().find(rel);
  return it != db.schema().end() && it->second == std::make_pair(1, n_children + 1);
}

// Initialization step shared by every fixpoint driver: constants, bottom
// leaves and unary leaves with a matching fact.
template <typename Add>
void init_pairs(const TreeCFG& g, const Database& db, const Add& add) {
  const TreeQuery& q = g.query();
  for (int ci = 0; ci < static_cast<int>(db.adom().size()); ++ci) {
    const std::string& c = db.adom()[ci];
    for (int v = 0; v < q.size(); ++v) {
      switch (q.label(v).kind) {
        case LabelKind::Bottom:
          add(ci, g.nonterminal(v));
          break;
        case LabelKind::Constant:
          if (q.label(v).text == c) add(ci, g.nonterminal(v));
          break;
        case LabelKind::Unary:
          if (schema_matches(db, q.label(v).text, 0) &&
              db.find_block(q.label(v).text, {c}))
            add(ci, g.nonterminal(v));
          break;
        case LabelKind::Relation:
          break;
      }
    }
  }
}

// Worklist fixpoint with dependency back-edges. State per (fact, vertex):
// the count of child pairs still missing; per (block, vertex): the count of
// facts not yet satisfied. A pair <c, y> fires when its block empties.
struct WorklistDriver {
  const TreeCFG& g;
  const Database& db;
  bool forward_only;
  CertMemo memo;

  struct Rel {
    std::vector<int> fact_ids;                   // global indices
    std::vector<int> block_of;                   // per local fact
    std::vector<int> block_key_ci;               // per local block
    std::vector<std::vector<int>> blocks;        // per local block: local facts
    std::vector<std::map<int, std::vector<int>>> by_pos_value;  // pos -> ci -> facts
  };
  std::vector<Rel> rels;
  std::vector<int> rid_of_vertex;                         // -1 when inert
  std::vector<std::vector<std::pair<int, int>>> feeds;    // per nonterminal: (vertex, pos)
  std::vector<std::vector<int>> need, maxr, block_need, block_maxr;
  std::vector<std::vector<char>> sat;
  std::deque<std::tuple<int, int, int>> queue;  // const id, nonterminal, round

  WorklistDriver(const TreeCFG& g_, const Database& db_, bool forward_only_)
      : g(g_),
        db(db_),
        forward_only(forward_only_),
        memo(db_.adom(), g_.nonterminal_count()) {
    build_tables();
    run();
  }

  void build_tables() {
    const TreeQuery& q = q_();
    std::map<std::string, int> rel_index;
    rid_of_vertex.assign(q.size(), -1);
    feeds.resize(g.nonterminal_count());
    for (int v = 0; v < q.size(); ++v) {
      if (!q.internal(v)) continue;
      const std::string& rel = q.label(v).text;
      int n = static_cast<int>(q.children(v).size());
      if (!schema_matches(db, rel, n)) continue;
      auto [it, fresh] = rel_index.emplace(rel, static_cast<int>(rels.size()));
      if (fresh) {
        rels.emplace_back();
        Rel& r = rels.back();
        r.by_pos_value.resize(n);
        for (std::size_t b = 0; b < db.blocks().size(); ++b) {
          const auto& block = db.blocks()[b];
          if (block.relation != rel) continue;
          int lb = static_cast<int>(r.blocks.size());
          r.blocks.emplace_back();
          r.block_key_ci.push_back(memo.const_id(block.key[0]));
          for (int fid : block.fact_ids) {
            int lf = static_cast<int>(r.fact_ids.size());
            r.fact_ids.push_back(fid);
            r.block_of.push_back(lb);
            r.blocks[lb].push_back(lf);
            const Fact& f = db.facts()[fid];
            for (int i = 0; i < n; ++i)
              r.by_pos_value[i][memo.const_id(f.values[i])].push_back(lf);
          }
        }
      }
      rid_of_vertex[v] = it->second;
      for (std::size_t i = 0; i < q.children(v).size(); ++i)
        feeds[g.nonterminal(q.children(v)[i])].emplace_back(v, static_cast<int>(i));
    }
    need.resize(q.size());
    maxr.resize(q.size());
    sat.resize(q.size());
    block_need.resize(q.size());
    block_maxr.resize(q.size());
    for (int v = 0; v < q.size(); ++v) {
      int rid = rid_of_vertex[v];
      if (rid < 0) continue;
      const Rel& r = rels[rid];
      need[v].assign(r.fact_ids.size(), static_cast<int>(q.children(v).size()));
      maxr[v].assign(r.fact_ids.size(), 0);
      sat[v].assign(r.fact_ids.size(), 0);
      block_need[v].resize(r.blocks.size());
      for (std::size_t b = 0; b < r.blocks.size(); ++b)
        block_need[v][b] = static_cast<int>(r.blocks[b].size());
      block_maxr[v].assign(r.blocks.size(), 0);
    }
  }

  const TreeQuery& q_() const { return g.query(); }

  void add_pair(int ci, int nt, int round) {
    if (memo.insert(ci, nt, round)) queue.emplace_back(ci, nt, round);
  }

  void fire_direct(int x, int lf) {
    int rid = rid_of_vertex[x];
    const Rel& r = rels[rid];
    int r1 = maxr[x][lf];
    auto satisfy = [&](int z) {
      if (sat[z][lf]) return;
      sat[z][lf] = 1;
      int b = r.block_of[lf];
      block_maxr[z][b] = std::max(block_maxr[z][b], r1);
      if (--block_need[z][b] == 0)
        add_pair(r.block_key_ci[b], g.nonterminal(z), block_maxr[z][b] + 1);
    };
    if (forward_only) {
      satisfy(x);
    } else {
      for (int z : g.chain_dependents(x)) satisfy(z);
    }
  }

  void run() {
    init_pairs(g, db, [&](int ci, int nt) { add_pair(ci, nt, 0); });
    while (!queue.empty()) {
      auto [ci, nt, round] = queue.front();
      queue.pop_front();
      for (auto [x, pos] : feeds[nt]) {
        int rid = rid_of_vertex[x];
        if (rid < 0) continue;
        const Rel& r = rels[rid];
        auto it = r.by_pos_value[pos].find(ci);
        if (it == r.by_pos_value[pos].end()) continue;
        for (int lf : it->second) {
          maxr[x][lf] = std::max(maxr[x][lf], round);
          if (--need[x][lf] == 0) fire_direct(x, lf);
        }
      }
    }
  }
};

}  // namespace

CertMemo compute_B(const TreeCFG& g, const Database& db) {
  return WorklistDriver(g, db, /*forward_only=*/false).memo;
}

CertMemo compute_B(const TreeQuery& q, const Database& db) {
  TreeCFG g(q);
  return compute_B(g, db);
}

CertMemo compute_B_forward(const TreeCFG& g, const Database& db) {
  return WorklistDriver(g, db, /*forward_only=*/true).memo;
}

CertMemo compute_B_forward(const TreeQuery& q, const Database& db) {
  TreeCFG g(q);
  return compute_B_forward(g, db);
}

bool fact_holds(const TreeCFG& g, const CertMemo& B, const Fact& f, int y) {
  const TreeQuery& q = g.query();
  if (y < 0 || y >= q.size()) throw std::out_of_range("vertex out of range");
  if (q.label(y).kind == LabelKind::Constant || q.label(y).text != f.relation)
    throw std::invalid_argument("fact relation does not match the vertex label");
  if (!q.internal(y)) return f.key_arity() == 1 && f.arity() == 1;
  auto direct = [&](int x) {
    if (f.key.size() != 1 || f.values.size() != q.children(x).size()) return false;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      int child = q.children(x)[i];
      if (q.label(child).kind == LabelKind::Constant) {
        if (q.label(child).text != f.values[i]) return false;
      } else if (!B.contains(f.values[i], g.nonterminal(child))) {
        return false;
      }
    }
    return true;
  };
  for (int x : g.chain(y))
    if (direct(x)) return true;
  return false;
}

CertMemo compute_B_rounds_parallel(const TreeCFG& g, const Database& db) {
  const TreeQuery& q = g.query();
  CertMemo memo(db.adom(), g.nonterminal_count());
  init_pairs(g, db, [&](int ci, int nt) { memo.insert(ci, nt, 0); });

  struct Candidate {
    int block_id;
    int vertex;
    int key_ci;
  };
  std::vector<Candidate> candidates;
  for (std::size_t b = 0; b < db.blocks().size(); ++b) {
    const auto& block = db.blocks()[b];
    for (int v = 0; v < q.size(); ++v) {
      if (!q.internal(v) || q.label(v).text != block.relation) continue;
      if (!schema_matches(db, block.relation, static_cast<int>(q.children(v).size())))
        continue;
      candidates.push_back({static_cast<int>(b), v, memo.const_id(block.key[0])});
    }
  }
  for (int round = 1;; ++round) {
    const std::int64_t n = static_cast<std::int64_t>(candidates.size());
    std::vector<char> fire(candidates.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
      const Candidate& cand = candidates[i];
      if (memo.test(cand.key_ci, g.nonterminal(cand.vertex))) continue;
      bool all = true;
      for (int fid : db.blocks()[cand.block_id].fact_ids) {
        if (!fact_holds(g, memo, db.facts()[fid], cand.vertex)) {
          all = false;
          break;
        }
      }
      fire[i] = all;
    }
    bool any = false;
    for (std::int64_t i = 0; i < n; ++i) {
      if (!fire[i]) continue;
      any = true;
      memo.insert(candidates[i].key_ci, g.nonterminal(candidates[i].vertex), round);
    }
    if (!any) break;
  }
  return memo;
}

CertMemo compute_B_rounds_parallel(const TreeQuery& q, const Database& db) {
  TreeCFG g(q);
  return compute_B_rounds_parallel(g, db);
}

std::set<int> frugal_set(const TreeCFG& g, const CertMemo& B, const Fact& f) {
  std::set<int> out;
  const TreeQuery& q = g.query();
  for (int v : q.atom_vertices())
    if (q.label(v).text == f.relation && fact_holds(g, B, f, v)) out.insert(v);
  return out;
}

std::optional<std::string> certain_trace_witness(const TreeQuery& q, const Database& db) {
  TreeCFG g(q);
  CertMemo B = compute_B(g, db);
  int root_nt = g.nonterminal(q.root());
  for (const auto& c : db.adom())
    if (B.contains(c, root_nt)) return c;
  return std::nullopt;
}

bool certain_trace(const TreeQuery& q, const Database& db) {
  return certain_trace_witness(q, db).has_value();
}

Database frugal_repair(const TreeQuery& q, const Database& db) {
  TreeCFG g(q);
  CertMemo B = compute_B(g, db);
  std::vector<Fact> chosen;
  for (const auto& block : db.blocks()) {
    std::vector<std::set<int>> sets;
    sets.reserve(block.fact_ids.size());
    for (int fid : block.fact_ids) sets.push_back(frugal_set(g, B, db.facts()[fid]));
    // Pairwise comparability is guaranteed under the branch condition.
    auto subset = [](const std::set<int>& a, const std::set<int>& b) {
      return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    int best = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j)
        if (!subset(sets[i], sets[j]) && !subset(sets[j], sets[i]))
          throw std::logic_error("incomparable frugal sets within block " +
                                 block.relation + "; branch condition violated");
      if (i > 0 && subset(sets[i], sets[best]) && sets[i] != sets[best])
        best = static_cast<int>(i);
    }
    chosen.push_back(db.facts()[block.fact_ids[best]]);
  }
  return Database(std::move(chosen));
}

std::string to_string(Method m) {
  switch (m) {
    case Method::ForwardOnly: return "forward";
    case Method::Fixpoint: return "fixpoint";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

CertainAnswer certain(const TreeQuery& q, const Database& db, std::uint64_t oracle_cap) {
  CertainAnswer out;
  out.classification = classify_tree(q);
  if (out.classification.conditions.c1) {
    out.method = Method::ForwardOnly;
    TreeCFG g(q);
    CertMemo B = compute_B_forward(g, db);
    int root_nt = g.nonterminal(q.root());
    for (const auto& c : db.adom()) {
      if (B.contains(c, root_nt)) {
        out.witness = c;
        break;
      }
    }
    out.value = out.witness.has_value();
  } else if (out.classification.conditions.c2) {
    out.method = Method::Fixpoint;
    out.witness = certain_trace_witness(q, db);
    out.value = out.witness.has_value();
  } else {
    out.method = Method::Oracle;
    out.value = brute_certain(tree_to_graph(q), db, oracle_cap);
  }
  return out;
}

}  // namespace cqa
