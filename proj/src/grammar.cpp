#include "cqa/grammar.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace cqa {

TreeCFG::TreeCFG(TreeQuery q) : q_(std::move(q)) {
  int n = q_.size();
  nt_of_vertex_.resize(n);
  for (int v = 0; v < n; ++v) {
    if (q_.label(v).kind == LabelKind::Constant) {
      auto [it, fresh] = nt_of_constant_.emplace(q_.label(v).text, nt_count_);
      if (fresh) ++nt_count_;
      nt_of_vertex_[v] = it->second;
    } else {
      nt_of_vertex_[v] = nt_count_++;
    }
  }
  child_nts_.resize(n);
  backward_.resize(n);
  chain_.resize(n);
  dependents_.resize(n);
  for (int v = 0; v < n; ++v) {
    if (!q_.internal(v)) continue;
    for (int c : q_.children(v)) child_nts_[v].push_back(nt_of_vertex_[c]);
    chain_[v].push_back(v);
    for (int a = q_.parent(v); a >= 0; a = q_.parent(a)) {
      if (q_.internal(a) && q_.label(a).text == q_.label(v).text) {
        backward_[v].push_back(a);
        chain_[v].push_back(a);
      }
    }
    for (int x : chain_[v]) dependents_[x].push_back(v);
  }
}

std::optional<int> TreeCFG::constant_nonterminal(const std::string& c) const {
  auto it = nt_of_constant_.find(c);
  if (it == nt_of_constant_.end()) return std::nullopt;
  return it->second;
}

std::string TreeCFG::rules_str() const {
  std::string out;
  auto nt_name = [&](int v) { return "S_" + q_.var_name(v); };
  for (int v = 0; v < q_.size(); ++v) {
    const TreeLabel& l = q_.label(v);
    switch (l.kind) {
      case LabelKind::Relation: {
        out += nt_name(v) + " -> " + l.text + "(";
        const auto& ch = q_.children(v);
        for (std::size_t i = 0; i < ch.size(); ++i) {
          if (i) out += ",";
          int c = ch[i];
          out += q_.label(c).kind == LabelKind::Constant ? "S_'" + q_.label(c).text + "'"
                                                         : nt_name(c);
        }
        out += ")\n";
        for (int x : backward_[v]) out += nt_name(v) + " -> " + nt_name(x) + "\n";
        break;
      }
      case LabelKind::Unary:
        out += nt_name(v) + " -> " + l.text + "\n";
        break;
      case LabelKind::Bottom:
        out += nt_name(v) + " -> _\n";
        break;
      case LabelKind::Constant:
        break;  // one shared rule per constant, emitted below
    }
  }
  for (const auto& [c, nt] : nt_of_constant_) out += "S_'" + c + "' -> '" + c + "'\n";
  return out;
}

namespace {

void check_schema_compatible(const TreeQuery& q, const RelationTree& tau) {
  std::map<std::string, int> q_counts;
  for (int v = 0; v < q.size(); ++v) {
    const TreeLabel& l = q.label(v);
    if (l.kind == LabelKind::Relation || l.kind == LabelKind::Unary)
      q_counts.emplace(l.text, static_cast<int>(q.children(v).size()));
  }
  for (int v = 0; v < tau.size(); ++v) {
    const TreeLabel& l = tau.label(v);
    if (l.kind != LabelKind::Relation && l.kind != LabelKind::Unary) continue;
    auto it = q_counts.find(l.text);
    if (it != q_counts.end() &&
        it->second != static_cast<int>(tau.children(v).size()))
      throw std::invalid_argument("relation '" + l.text +
                                  "' has conflicting arities in tree and query");
  }
}

}  // namespace

bool derives(const TreeCFG& g, int start_vertex, const RelationTree& tau) {
  const TreeQuery& q = g.query();
  if (start_vertex < 0 || start_vertex >= q.size())
    throw std::out_of_range("start vertex out of range");
  check_schema_compatible(q, tau);
  // memo[v][t]: can S_v derive the subtree of tau at t; -1 unknown.
  std::vector<std::vector<signed char>> memo(
      q.size(), std::vector<signed char>(tau.size(), -1));
  auto derive = [&](auto&& self, int v, int t) -> bool {
    signed char& m = memo[v][t];
    if (m >= 0) return m != 0;
    const TreeLabel& lv = q.label(v);
    const TreeLabel& lt = tau.label(t);
    bool ok = false;
    switch (lv.kind) {
      case LabelKind::Bottom:
        ok = lt.kind == LabelKind::Bottom;
        break;
      case LabelKind::Constant:
        ok = lt.kind == LabelKind::Constant && lt.text == lv.text;
        break;
      case LabelKind::Unary:
        ok = lt.kind == LabelKind::Unary && lt.text == lv.text;
        break;
      case LabelKind::Relation:
        // A forward rule of v or of any backward-reachable ancestor.
        for (int x : g.chain(v)) {
          if (lt.kind != LabelKind::Relation || lt.text != q.label(x).text) continue;
          if (q.children(x).size() != tau.children(t).size()) continue;
          bool all = true;
          for (std::size_t i = 0; all && i < q.children(x).size(); ++i)
            all = self(self, q.children(x)[i], tau.children(t)[i]);
          if (all) {
            ok = true;
            break;
          }
        }
        break;
    }
    m = ok ? 1 : 0;
    return ok;
  };
  return derive(derive, start_vertex, tau.root());
}

namespace {

// Worklist fixpoint over (constant, vertex) pairs for one consistent
// instance. Backward rules are the chain closure; forward steps follow the
// unique fact per block.
struct AcceptFixpoint {
  const TreeCFG& g;
  const Database& r;
  std::vector<std::string> consts;
  std::map<std::string, int> const_id;
  std::vector<char> in;  // consts × vertices

  AcceptFixpoint(const TreeCFG& g_, const Database& r_) : g(g_), r(r_) {
    if (!r.consistent())
      throw std::invalid_argument("acceptance fixpoint requires a consistent instance");
    consts = r.adom();
    for (std::size_t i = 0; i < consts.size(); ++i) const_id.emplace(consts[i], i);
    in.assign(consts.size() * g.query().size(), 0);
    run();
  }

  int idx(int c, int v) const { return c * g.query().size() + v; }

  bool holds(const std::string& c, int v) const {
    const TreeQuery& q = g.query();
    const TreeLabel& l = q.label(v);
    // Leaves that do not look at the instance accept constants outside adom
    // as well.
    if (l.kind == LabelKind::Bottom) return true;
    if (l.kind == LabelKind::Constant) return l.text == c;
    auto it = const_id.find(c);
    return it != const_id.end() && in[idx(it->second, v)];
  }

  const Fact* unique_fact(const std::string& rel, const std::string& key) const {
    const Database::Block* b = r.find_block(rel, {key});
    if (!b) return nullptr;
    return &r.facts()[b->fact_ids[0]];
  }

  // Forward rule of vertex x fires at constant c.
  bool forward_ok(int ci, int x) const {
    const TreeQuery& q = g.query();
    const Fact* f = unique_fact(q.label(x).text, consts[ci]);
    if (!f || f->key.size() != 1 ||
        f->values.size() != q.children(x).size())
      return false;
    for (std::size_t i = 0; i < f->values.size(); ++i) {
      int child = q.children(x)[i];
      if (!holds(f->values[i], child)) return false;
    }
    return true;
  }

  void run() {
    const TreeQuery& q = g.query();
    std::map<std::string, std::vector<const Fact*>> facts_by_relation;
    for (const auto& f : r.facts()) facts_by_relation[f.relation].push_back(&f);

    std::deque<std::pair<int, int>> queue;  // (const id, vertex)
    auto add = [&](int ci, int v) {
      if (!in[idx(ci, v)]) {
        in[idx(ci, v)] = 1;
        queue.emplace_back(ci, v);
      }
    };
    auto try_internal = [&](int ci, int x) {
      if (in[idx(ci, x)]) return;
      for (int w : g.chain(x)) {
        if (forward_ok(ci, w)) {
          add(ci, x);
          return;
        }
      }
    };
    for (int ci = 0; ci < static_cast<int>(consts.size()); ++ci) {
      for (int v = 0; v < q.size(); ++v) {
        const TreeLabel& l = q.label(v);
        if (l.kind == LabelKind::Bottom ||
            (l.kind == LabelKind::Unary && r.find_block(l.text, {consts[ci]})))
          add(ci, v);
      }
    }
    // Sweep for internal vertices satisfied by static children (constants,
    // bottoms) alone; everything else flows through the queue.
    for (int ci = 0; ci < static_cast<int>(consts.size()); ++ci)
      for (int v = 0; v < q.size(); ++v)
        if (q.internal(v)) try_internal(ci, v);
    while (!queue.empty()) {
      auto [ci, v] = queue.front();
      queue.pop_front();
      const std::string& c = consts[ci];
      // The pair (c, v) feeds the forward rule of v's parent w at v's
      // position, and with it every vertex whose chain contains w.
      int w = q.parent(v);
      if (w >= 0) {
        const auto& siblings = q.children(w);
        std::size_t pos =
            std::find(siblings.begin(), siblings.end(), v) - siblings.begin();
        for (const Fact* f : facts_by_relation[q.label(w).text]) {
          if (f->key.size() != 1 || f->values.size() != siblings.size()) continue;
          if (f->values[pos] != c) continue;
          int key_ci = const_id.at(f->key[0]);
          for (int z : g.chain_dependents(w)) try_internal(key_ci, z);
        }
      }
      // Backward rules: v newly accepted makes every same-relation
      // descendant accepted for the same constant.
      if (q.internal(v))
        for (int z : g.chain_dependents(v))
          if (z != v) add(ci, z);
    }
  }
};

}  // namespace

bool accepts_in_consistent(const TreeCFG& g, int u, const std::string& c,
                           const Database& r) {
  if (u < 0 || u >= g.query().size()) throw std::out_of_range("vertex out of range");
  AcceptFixpoint fp(g, r);
  return fp.holds(c, u);
}

std::set<std::string> accepted_start_constants(const TreeCFG& g, int u,
                                               const Database& r) {
  AcceptFixpoint fp(g, r);
  std::set<std::string> out;
  for (const auto& c : r.adom())
    if (fp.holds(c, u)) out.insert(c);
  return out;
}

}  // namespace cqa
