#include "cqa/classification.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <stdexcept>

namespace cqa {

TreeQuery rewind(const TreeQuery& q, int y, int x) {
  if (y < 0 || y >= q.size() || x < 0 || x >= q.size())
    throw std::out_of_range("rewind vertex out of range");
  if (!q.internal(x) || !q.internal(y))
    throw std::invalid_argument("rewind vertices must be internal");
  if (q.label(x).text != q.label(y).text)
    throw std::invalid_argument("rewind vertices must share their relation label");
  const RelationTree& t = q.tree();
  RelationTree out;
  auto copy_plain = [&](auto&& self, int src, int dst_parent) -> void {
    int dst = out.add_vertex(dst_parent, t.label(src));
    for (int c : t.children(src)) self(self, c, dst);
  };
  // Copy q, but at y's slot emit a literal copy of the subtree at x; the
  // substitution applies once even when x and y are related by ancestry.
  auto copy = [&](auto&& self, int src, int dst_parent) -> void {
    if (src == y) {
      copy_plain(copy_plain, x, dst_parent);
      return;
    }
    int dst = out.add_vertex(dst_parent, t.label(src));
    for (int c : t.children(src)) self(self, c, dst);
  };
  copy(copy, t.root(), -1);
  out.seal();
  return TreeQuery(std::move(out));
}

namespace {

// Same-relation pairs of distinct internal vertices, (x, y) with x < y in
// pre-order. Unary atom pairs satisfy every condition trivially and are
// skipped.
std::vector<std::pair<int, int>> self_join_pairs(const TreeQuery& q) {
  std::vector<std::pair<int, int>> out;
  for (int x = 0; x < q.size(); ++x) {
    if (!q.internal(x)) continue;
    for (int y = x + 1; y < q.size(); ++y)
      if (q.internal(y) && q.label(y).text == q.label(x).text) out.emplace_back(x, y);
  }
  return out;
}

bool unpinned_hom_to_rewind(const TreeQuery& q, int y, int x) {
  return tree_hom(q, rewind(q, y, x)).has_value();
}

bool root_pinned_hom_to_rewind(const TreeQuery& q, int y, int x) {
  TreeQuery r = rewind(q, y, x);
  return tree_hom(q.tree(), r.tree(), std::make_pair(q.root(), r.root())).has_value();
}

}  // namespace

ConditionReport check_conditions(const TreeQuery& q) {
  ConditionReport rep;
  auto feas = tree_hom_feasibility(q.tree(), q.tree());
  bool c1_direct = true, c2_direct = true;
  for (auto [x, y] : self_join_pairs(q)) {
    const std::string& rel = q.label(x).text;
    bool x_anc_y = q.ancestor(x, y);
    bool y_anc_x = q.ancestor(y, x);
    if (!x_anc_y && !y_anc_x) {
      if (!feas[y][x] && !feas[x][y]) {
        rep.c_branch = false;
        rep.witnesses.push_back({"c_branch", x, y, rel});
      }
    } else {
      int a = x_anc_y ? x : y;  // ancestor
      int d = x_anc_y ? y : x;  // descendant
      if (!unpinned_hom_to_rewind(q, d, a)) {
        rep.c_factor = false;
        rep.witnesses.push_back({"c_factor", a, d, rel});
      }
      if (!root_pinned_hom_to_rewind(q, d, a)) {
        rep.c_prefix = false;
        rep.witnesses.push_back({"c_prefix", a, d, rel});
      }
    }
    // Direct reading of the two conditions, for the debug cross-check below.
    c2_direct = c2_direct &&
                (unpinned_hom_to_rewind(q, y, x) || unpinned_hom_to_rewind(q, x, y));
    c1_direct = c1_direct && (root_pinned_hom_to_rewind(q, y, x) ||
                              root_pinned_hom_to_rewind(q, x, y));
  }
  rep.c2 = rep.c_factor && rep.c_branch;
  rep.c1 = rep.c_prefix && rep.c_branch;
  assert(rep.c2 == c2_direct);
  assert(rep.c1 == c1_direct);
  (void)c1_direct;
  (void)c2_direct;
  return rep;
}

std::string to_string(ComplexityClass c) {
  switch (c) {
    case ComplexityClass::InFO: return "FO";
    case ComplexityClass::NLHardInLFP: return "NL_HARD_IN_LFP";
    case ComplexityClass::LHardNotFOUpperOpen: return "LHARD_NOT_FO_UPPER_OPEN";
    case ComplexityClass::CoNPComplete: return "CONP_COMPLETE";
  }
  return "?";
}

TreeClassification classify_tree(const TreeQuery& q) {
  TreeClassification out;
  out.conditions = check_conditions(q);
  if (out.conditions.c1)
    out.cls = ComplexityClass::InFO;
  else if (out.conditions.c2)
    out.cls = ComplexityClass::NLHardInLFP;
  else
    out.cls = ComplexityClass::CoNPComplete;
  return out;
}

bool preorder_le(const TreeQuery& q, int x, int y) {
  bool atoms = (q.internal(x) || q.label(x).kind == LabelKind::Unary) &&
               (q.internal(y) || q.label(y).kind == LabelKind::Unary);
  if (!atoms || q.label(x) != q.label(y))
    throw std::invalid_argument("preorder_le expects same-relation atoms");
  if (x == y || q.ancestor(x, y)) return true;
  auto feas = tree_hom_feasibility(q.tree(), q.tree());
  return feas[y][x];
}

std::vector<GraphQuery> connected_components(const GraphQuery& q) {
  int n = q.size();
  std::vector<int> comp(n, -1);
  std::map<std::string, std::vector<int>> by_var;
  for (int i = 0; i < n; ++i)
    for (const Symbol& s : q.atoms()[i].args)
      if (s.is_variable()) by_var[s.name].push_back(i);
  int ncomp = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<int> stack{i};
    comp[i] = ncomp;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (const Symbol& s : q.atoms()[a].args) {
        if (!s.is_variable()) continue;
        for (int b : by_var[s.name]) {
          if (comp[b] < 0) {
            comp[b] = ncomp;
            stack.push_back(b);
          }
        }
      }
    }
    ++ncomp;
  }
  std::vector<std::vector<int>> members(ncomp);
  for (int i = 0; i < n; ++i) members[comp[i]].push_back(i);
  std::vector<GraphQuery> out;
  out.reserve(ncomp);
  for (const auto& m : members) out.push_back(q.subquery(m));
  return out;
}

std::optional<TreeQuery> is_tree_query(const GraphQuery& q) {
  std::string why;
  if (!q.is_graphbcq(&why))
    throw std::invalid_argument("not in the simple-key query class: " + why);
  if (connected_components(q).size() != 1)
    throw std::invalid_argument("query is not connected");

  // Count non-key occurrences per variable; locate the atom keyed by each
  // variable.
  std::map<std::string, int> nonkey_occurrences;
  std::map<std::string, int> atom_of_key;
  for (int i = 0; i < q.size(); ++i) {
    const Atom& a = q.atoms()[i];
    atom_of_key[a.args[0].name] = i;
    for (int j = 1; j < a.arity(); ++j)
      if (a.args[j].is_variable()) ++nonkey_occurrences[a.args[j].name];
  }
  // Every variable occurs at most once at non-key positions, and exactly one
  // key variable (the root) has no non-key occurrence.
  int root_atom = -1;
  for (const auto& [var, atom] : atom_of_key) {
    auto it = nonkey_occurrences.find(var);
    int occ = it == nonkey_occurrences.end() ? 0 : it->second;
    if (occ == 0) {
      if (root_atom >= 0) return std::nullopt;  // two roots
      root_atom = atom;
    }
  }
  for (const auto& [var, occ] : nonkey_occurrences)
    if (occ > 1) return std::nullopt;
  if (root_atom < 0) return std::nullopt;  // every key occurs below some atom: a cycle

  // Build the tree top-down; each atom may be consumed once.
  std::vector<char> used(q.size(), 0);
  RelationTree tree;
  std::function<void(int, int)> build = [&](int atom_id, int parent) {
    if (used[atom_id]) throw std::invalid_argument("atom visited twice");
    used[atom_id] = 1;
    const Atom& a = q.atoms()[atom_id];
    LabelKind kind = a.arity() == 1 ? LabelKind::Unary : LabelKind::Relation;
    int v = tree.add_vertex(parent, {kind, a.relation});
    for (int j = 1; j < a.arity(); ++j) {
      const Symbol& s = a.args[j];
      if (s.is_constant()) {
        tree.add_vertex(v, {LabelKind::Constant, s.name});
      } else if (auto it = atom_of_key.find(s.name); it != atom_of_key.end()) {
        build(it->second, v);
      } else {
        tree.add_vertex(v, {LabelKind::Bottom, ""});
      }
    }
  };
  build(root_atom, -1);
  if (std::count(used.begin(), used.end(), 1) != q.size()) return std::nullopt;
  try {
    tree.seal();
    return TreeQuery(std::move(tree));
  } catch (const std::invalid_argument&) {
    // Label used with conflicting child counts: representable only as a graph.
    return std::nullopt;
  }
}

bool berge_acyclic(const GraphQuery& q) {
  // Union-find over {atoms} ∪ {variables}; every occurrence is one edge, so
  // joining two already-connected endpoints closes a cycle.
  std::map<std::string, int> var_id;
  for (const auto& a : q.atoms())
    for (const Symbol& s : a.args)
      if (s.is_variable()) var_id.emplace(s.name, static_cast<int>(var_id.size()));
  int n = q.size() + static_cast<int>(var_id.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int a) {
    return parent[a] == a ? a : parent[a] = find(parent[a]);
  };
  for (int i = 0; i < q.size(); ++i) {
    for (const Symbol& s : q.atoms()[i].args) {
      if (!s.is_variable()) continue;
      int a = find(i), b = find(q.size() + var_id[s.name]);
      if (a == b) return false;
      parent[a] = b;
    }
  }
  return true;
}

namespace {

// Attribute closure of `start` under the dependencies key(G) -> vars(G) for
// the listed atoms.
std::set<std::string> fd_closure(const GraphQuery& q, std::set<std::string> start,
                                 const std::vector<int>& fd_atoms) {
  bool grown = true;
  while (grown) {
    grown = false;
    for (int g : fd_atoms) {
      const Atom& a = q.atoms()[g];
      bool key_in = true;
      for (int i = 0; i < a.key_arity && key_in; ++i)
        key_in = a.args[i].is_constant() || start.count(a.args[i].name) > 0;
      if (!key_in) continue;
      for (const Symbol& s : a.args)
        if (s.is_variable() && start.insert(s.name).second) grown = true;
    }
  }
  return start;
}

std::set<std::string> key_vars(const Atom& a) {
  std::set<std::string> out;
  for (int i = 0; i < a.key_arity; ++i)
    if (a.args[i].is_variable()) out.insert(a.args[i].name);
  return out;
}

}  // namespace

bool AttackGraph::attacks(int f, int g) const {
  for (const Edge& e : edges)
    if (e.from == f && e.to == g) return true;
  return false;
}

bool AttackGraph::has_strong_cycle() const {
  for (const Edge& e : edges)
    if (attacks(e.to, e.from) && e.strong) return true;
  return false;
}

AttackGraph attack_graph(const GraphQuery& q) {
  if (!q.is_selfjoinfree())
    throw std::invalid_argument("attack graph requires a self-join-free query");
  int n = q.size();
  AttackGraph ag;
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  ag.closure.resize(n);
  for (int f = 0; f < n; ++f) {
    std::vector<int> others;
    for (int i = 0; i < n; ++i)
      if (i != f) others.push_back(i);
    ag.closure[f] = fd_closure(q, key_vars(q.atoms()[f]), others);
  }
  for (int f = 0; f < n; ++f) {
    // Reachability from f where adjacency requires a shared variable outside
    // f's closure.
    std::vector<char> reach(n, 0);
    reach[f] = 1;
    std::vector<int> stack{f};
    auto share_outside = [&](int a, int b) {
      for (const Symbol& s : q.atoms()[a].args) {
        if (!s.is_variable() || ag.closure[f].count(s.name)) continue;
        for (const Symbol& t : q.atoms()[b].args)
          if (t.is_variable() && t.name == s.name) return true;
      }
      return false;
    };
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < n; ++b) {
        if (!reach[b] && share_outside(a, b)) {
          reach[b] = 1;
          stack.push_back(b);
        }
      }
    }
    for (int g = 0; g < n; ++g) {
      if (g == f || !reach[g]) continue;
      // Weak iff key(f) determines key(g) under the full dependency set.
      auto full = fd_closure(q, key_vars(q.atoms()[f]), all);
      bool weak = true;
      for (const auto& v : key_vars(q.atoms()[g])) weak = weak && full.count(v) > 0;
      ag.edges.push_back({f, g, !weak});
    }
  }
  std::sort(ag.edges.begin(), ag.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  return ag;
}

GraphClassification classify_graph(const GraphQuery& q) {
  std::string why;
  if (!q.is_graphbcq(&why))
    throw std::invalid_argument("not in the simple-key query class: " + why);
  GraphClassification out;
  out.core_query = core(q);
  for (GraphQuery& comp : connected_components(out.core_query)) {
    ComponentClassification cc;
    cc.query = comp;
    if (auto tree = is_tree_query(comp)) {
      cc.tree = classify_tree(*tree);
      cc.cls = cc.tree->cls;
    } else if (berge_acyclic(comp)) {
      cc.cls = ComplexityClass::CoNPComplete;
    } else {
      cc.cls = ComplexityClass::LHardNotFOUpperOpen;
    }
    out.components.push_back(std::move(cc));
  }
  out.overall = ComplexityClass::InFO;
  for (const auto& cc : out.components) {
    out.overall = std::max(out.overall, cc.cls);
    if (cc.cls == ComplexityClass::LHardNotFOUpperOpen) out.upper_open = true;
  }
  return out;
}

namespace {

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string witnesses_str(const TreeQuery& q, const ConditionReport& rep) {
  std::string out;
  for (const auto& w : rep.witnesses) {
    if (!out.empty()) out += " ";
    out += w.condition + ":(" + q.var_name(w.x) + "," + q.var_name(w.y) + "):" + w.relation;
  }
  return out.empty() ? "-" : out;
}

void append_conditions(std::string& out, const TreeQuery& q, const ConditionReport& rep,
                       const std::string& prefix = "") {
  out += prefix + "c1 = " + bool_str(rep.c1) + "\n";
  out += prefix + "c2 = " + bool_str(rep.c2) + "\n";
  out += prefix + "c_branch = " + bool_str(rep.c_branch) + "\n";
  out += prefix + "c_factor = " + bool_str(rep.c_factor) + "\n";
  out += prefix + "c_prefix = " + bool_str(rep.c_prefix) + "\n";
  out += prefix + "witness_pairs = " + witnesses_str(q, rep) + "\n";
}

}  // namespace

std::string classification_record(const TreeClassification& c, const TreeQuery& q) {
  std::string out = "class = " + to_string(c.cls) + "\n";
  append_conditions(out, q, c.conditions);
  return out;
}

std::string classification_record(const GraphClassification& c) {
  std::string out = "class = " + to_string(c.overall) + "\n";
  out += "upper_bound_open = " + bool_str(c.upper_open) + "\n";
  out += "core = " + c.core_query.str() + "\n";
  out += "components = " + std::to_string(c.components.size()) + "\n";
  for (std::size_t i = 0; i < c.components.size(); ++i) {
    const auto& cc = c.components[i];
    std::string pre = "component." + std::to_string(i) + ".";
    out += pre + "atoms = " + cc.query.str() + "\n";
    out += pre + "class = " + to_string(cc.cls) + "\n";
    if (cc.tree) {
      TreeQuery t = *is_tree_query(cc.query);
      out += pre + "tree = " + t.str() + "\n";
      append_conditions(out, t, cc.tree->conditions, pre);
    }
  }
  return out;
}

}  // namespace cqa
