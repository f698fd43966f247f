#include "cqa/gadgets.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "cqa/classification.hpp"
#include "cqa/homomorphism.hpp"

namespace cqa {

// ---------------------------------------------------------------------------
// Monotone CNF

MonotoneCNF parse_cnf(std::string_view text) {
  MonotoneCNF cnf;
  std::set<std::string> vars;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto ident = [&]() -> std::string {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) throw ParseError("expected variable name", pos);
    return std::string(text.substr(start, pos - start));
  };
  auto accept = [&](char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  };
  do {
    bool parens = accept('(');
    MonotoneCNF::Clause clause;
    bool first = true;
    do {
      bool neg = accept('~');
      std::string v = ident();
      if (first) {
        clause.positive = !neg;
        first = false;
      } else if (clause.positive == neg) {
        throw ParseError("clause mixes positive and negative literals", pos);
      }
      clause.vars.push_back(v);
      vars.insert(std::move(v));
    } while (accept('|'));
    if (parens && !accept(')')) throw ParseError("expected ')'", pos);
    cnf.clauses.push_back(std::move(clause));
  } while (accept('&'));
  skip_ws();
  if (pos != text.size()) throw ParseError("trailing input after formula", pos);
  cnf.variables.assign(vars.begin(), vars.end());
  return cnf;
}

bool cnf_satisfiable(const MonotoneCNF& cnf) {
  if (cnf.variables.size() > 24)
    throw std::invalid_argument("truth-table oracle limited to 24 variables");
  std::map<std::string, int> id;
  for (std::size_t i = 0; i < cnf.variables.size(); ++i) id.emplace(cnf.variables[i], i);
  for (std::uint32_t bits = 0; bits < (1u << cnf.variables.size()); ++bits) {
    bool ok = true;
    for (const auto& clause : cnf.clauses) {
      bool sat = false;
      for (const auto& v : clause.vars) {
        bool value = (bits >> id.at(v)) & 1;
        if (value == clause.positive) {
          sat = true;
          break;
        }
      }
      if (!sat) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Digraphs

bool Digraph::acyclic() const {
  std::vector<int> indeg(vertices.size(), 0);
  for (auto [u, v] : edges) ++indeg[v];
  std::vector<int> stack;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (indeg[i] == 0) stack.push_back(static_cast<int>(i));
  std::size_t seen = 0;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    ++seen;
    for (auto [a, b] : edges)
      if (a == u && --indeg[b] == 0) stack.push_back(b);
  }
  return seen == vertices.size();
}

bool Digraph::reachable_s_to_t() const {
  std::vector<char> vis(vertices.size(), 0);
  std::vector<int> stack{s};
  vis[s] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    if (u == t) return true;
    for (auto [a, b] : edges)
      if (a == u && !vis[b]) {
        vis[b] = 1;
        stack.push_back(b);
      }
  }
  return false;
}

Digraph parse_digraph(std::string_view edges, const std::string& s, const std::string& t) {
  Digraph g;
  std::map<std::string, int> id;
  auto vertex = [&](const std::string& name) {
    if (name.empty()) throw ParseError("empty vertex name", 0);
    for (char c : name)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        throw ParseError("vertex names are alphanumeric: '" + name + "'", 0);
    auto [it, fresh] = id.emplace(name, static_cast<int>(g.vertices.size()));
    if (fresh) g.vertices.push_back(name);
    return it->second;
  };
  std::size_t start = 0;
  std::set<std::pair<int, int>> seen;
  while (start < edges.size()) {
    std::size_t end = edges.find(',', start);
    if (end == std::string_view::npos) end = edges.size();
    std::string item(edges.substr(start, end - start));
    start = end + 1;
    // trim
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t gt = item.find('>');
    if (gt == std::string::npos)
      throw ParseError("edge syntax is 'u>v': '" + item + "'", 0);
    std::string u = item.substr(0, gt), v = item.substr(gt + 1);
    u.erase(u.find_last_not_of(" \t") + 1);
    v.erase(0, v.find_first_not_of(" \t"));
    seen.emplace(vertex(u), vertex(v));
  }
  g.s = vertex(s);
  g.t = vertex(t);
  g.edges.assign(seen.begin(), seen.end());
  return g;
}

// ---------------------------------------------------------------------------
// Canonical copies

std::vector<Fact> canonical_copy(const GraphQuery& q,
                                 const std::map<std::string, std::string>& bindings,
                                 const FreshNames& fresh) {
  std::set<std::string> qvars = q.variables();
  std::set<std::string> qconsts = q.constants();
  std::set<std::string> targets;
  for (const auto& [var, c] : bindings) {
    if (!qvars.count(var))
      throw std::invalid_argument("bound variable '" + var + "' does not occur in the query");
    if (qconsts.count(c))
      throw std::invalid_argument("binding '" + c + "' collides with a query constant");
    if (!targets.insert(c).second)
      throw std::invalid_argument("two variables bound to constant '" + c + "'");
  }
  auto image = [&](const Symbol& s) -> std::string {
    if (s.is_constant()) return s.name;
    auto it = bindings.find(s.name);
    return it != bindings.end() ? it->second : fresh.make(s.name);
  };
  std::vector<Fact> out;
  out.reserve(q.atoms().size());
  for (const Atom& a : q.atoms()) {
    Fact f;
    f.relation = a.relation;
    for (int i = 0; i < a.arity(); ++i) {
      std::string c = image(a.args[i]);
      if (i < a.key_arity)
        f.key.push_back(std::move(c));
      else
        f.values.push_back(std::move(c));
    }
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subtree slicing in atom space

namespace {

// Atom indices of tree_to_graph(q) restricted to a subtree, or its complement.
std::vector<int> atoms_in_subtree(const TreeQuery& q, int v, bool complement) {
  std::vector<int> subtree = q.tree().subtree_vertices(v);
  std::set<int> inside(subtree.begin(), subtree.end());
  std::vector<int> out;
  const auto& av = q.atom_vertices();
  for (std::size_t i = 0; i < av.size(); ++i)
    if (inside.count(av[i]) != complement) out.push_back(static_cast<int>(i));
  return out;
}

void verify_same_relation_internal(const TreeQuery& q, int a, int b, const char* who) {
  if (a < 0 || a >= q.size() || b < 0 || b >= q.size())
    throw std::out_of_range(std::string(who) + ": vertex out of range");
  if (!q.internal(a) || !q.internal(b) || q.label(a).text != q.label(b).text)
    throw std::invalid_argument(std::string(who) +
                                ": expected same-relation internal vertices");
}

}  // namespace

std::optional<std::pair<int, int>> find_c2_violation(const TreeQuery& q) {
  for (int x = 0; x < q.size(); ++x) {
    if (!q.internal(x)) continue;
    for (int y = x + 1; y < q.size(); ++y) {
      if (!q.internal(y) || q.label(y).text != q.label(x).text) continue;
      if (!tree_hom(q, rewind(q, y, x)) && !tree_hom(q, rewind(q, x, y)))
        return std::make_pair(x, y);
    }
  }
  return std::nullopt;
}

Database sat_gadget(const TreeQuery& q, int p, int n, const MonotoneCNF& phi) {
  verify_same_relation_internal(q, p, n, "sat_gadget");
  if (tree_hom(q, rewind(q, p, n)) || tree_hom(q, rewind(q, n, p)))
    throw std::invalid_argument(
        "sat_gadget: pair does not violate the second condition");
  GraphQuery graph = tree_to_graph(q);
  GraphQuery sub_p = graph.subquery(atoms_in_subtree(q, p, false));
  GraphQuery sub_n = graph.subquery(atoms_in_subtree(q, n, false));
  GraphQuery rest_p = graph.subquery(atoms_in_subtree(q, p, true));
  GraphQuery rest_n = graph.subquery(atoms_in_subtree(q, n, true));
  const std::string pv = q.var_name(p), nv = q.var_name(n), rv = q.var_name(q.root());

  std::vector<Fact> facts;
  auto emit = [&](std::vector<Fact> fs) {
    for (auto& f : fs) facts.push_back(std::move(f));
  };
  for (const auto& z : phi.variables) {
    emit(canonical_copy(sub_p, {{pv, z}}, {"g.sat.p." + z}));
    emit(canonical_copy(sub_n, {{nv, z}}, {"g.sat.n." + z}));
  }
  for (std::size_t j = 0; j < phi.clauses.size(); ++j) {
    const auto& clause = phi.clauses[j];
    std::string cj = "g.sat.cl" + std::to_string(j);
    for (std::size_t k = 0; k < clause.vars.size(); ++k) {
      FreshNames fresh{"g.sat.c" + std::to_string(j) + ".l" + std::to_string(k)};
      const std::string& z = clause.vars[k];
      if (clause.positive)
        emit(canonical_copy(rest_p, {{rv, cj}, {pv, z}}, fresh));
      else
        emit(canonical_copy(rest_n, {{rv, cj}, {nv, z}}, fresh));
    }
  }
  Database db{std::move(facts)};

  // The reduction produces exactly two kinds of inconsistent blocks: a
  // root-relation block per clause and a binary block per formula variable.
  std::set<std::string> clause_consts;
  for (std::size_t j = 0; j < phi.clauses.size(); ++j)
    clause_consts.insert("g.sat.cl" + std::to_string(j));
  std::set<std::string> var_consts(phi.variables.begin(), phi.variables.end());
  for (const auto& b : db.blocks()) {
    if (b.fact_ids.size() < 2) continue;
    bool clause_block = b.relation == q.label(q.root()).text && b.key.size() == 1 &&
                        clause_consts.count(b.key[0]);
    bool var_block = b.relation == q.label(p).text && b.key.size() == 1 &&
                     var_consts.count(b.key[0]) && b.fact_ids.size() == 2;
    if (!clause_block && !var_block)
      throw std::logic_error("sat_gadget: unexpected inconsistent block " + b.relation);
  }
  return db;
}

Database sat_gadget(const TreeQuery& q, const MonotoneCNF& phi) {
  auto pair = find_c2_violation(q);
  if (!pair)
    throw std::invalid_argument("sat_gadget: query satisfies the second condition");
  return sat_gadget(q, pair->first, pair->second, phi);
}

namespace {

// Consecutive: no same-relation vertex strictly between x and y.
bool consecutive_pair(const TreeQuery& q, int x, int y) {
  for (int z = q.parent(y); z >= 0 && z != x; z = q.parent(z))
    if (q.internal(z) && q.label(z).text == q.label(y).text) return false;
  return true;
}

bool reach_pair_normalized(const TreeQuery& q, int x, int y,
                           const std::vector<std::vector<char>>& feas) {
  if (!q.ancestor(x, y) || !consecutive_pair(q, x, y) || feas[y][x]) return false;
  for (int z = 0; z < q.size(); ++z)
    if (q.internal(z) && q.label(z).text == q.label(y).text && q.ancestor(y, z) &&
        !feas[z][y])
      return false;
  return true;
}

}  // namespace

std::optional<std::pair<int, int>> find_reach_pair(const TreeQuery& q) {
  auto feas = tree_hom_feasibility(q.tree(), q.tree());
  std::optional<std::pair<int, int>> best;
  int best_depth = -1;
  for (int y = 0; y < q.size(); ++y) {
    if (!q.internal(y)) continue;
    // The nearest same-relation proper ancestor, if any.
    int x = -1;
    for (int a = q.parent(y); a >= 0; a = q.parent(a)) {
      if (q.internal(a) && q.label(a).text == q.label(y).text) {
        x = a;
        break;
      }
    }
    if (x < 0 || feas[y][x]) continue;
    int d = q.depth(y);
    if (d > best_depth) {
      best = std::make_pair(x, y);
      best_depth = d;
    }
  }
  if (best && !reach_pair_normalized(q, best->first, best->second, feas))
    return std::nullopt;
  return best;
}

Database reach_gadget(const TreeQuery& q, int x, int y, const Digraph& g) {
  verify_same_relation_internal(q, x, y, "reach_gadget");
  if (!g.acyclic()) throw std::invalid_argument("reach_gadget: graph must be acyclic");
  auto feas = tree_hom_feasibility(q.tree(), q.tree());
  if (!reach_pair_normalized(q, x, y, feas))
    throw std::invalid_argument(
        "reach_gadget: pair is not a normalized witness (consecutive, no root "
        "homomorphism upward, root homomorphisms below)");

  GraphQuery graph = tree_to_graph(q);
  std::set<int> in_x;
  for (int a : atoms_in_subtree(q, x, false)) in_x.insert(a);
  std::set<int> in_y;
  for (int a : atoms_in_subtree(q, y, false)) in_y.insert(a);
  std::vector<int> ctx_atoms, mid_atoms, y_atoms;
  for (int i = 0; i < graph.size(); ++i) {
    if (!in_x.count(i))
      ctx_atoms.push_back(i);  // q minus subtree(x)
    else if (!in_y.count(i))
      mid_atoms.push_back(i);  // subtree(x) minus subtree(y)
    else
      y_atoms.push_back(i);
  }
  GraphQuery ctx = graph.subquery(ctx_atoms);
  GraphQuery mid = graph.subquery(mid_atoms);
  GraphQuery sub_y = graph.subquery(y_atoms);
  const std::string xv = q.var_name(x), yv = q.var_name(y);

  const std::string src = "g.reach.src", snk = "g.reach.snk";
  for (const auto& v : g.vertices)
    if (v == src || v == snk)
      throw std::invalid_argument("reach_gadget: reserved vertex name " + v);

  std::vector<Fact> facts;
  auto emit = [&](std::vector<Fact> fs) {
    for (auto& f : fs) facts.push_back(std::move(f));
  };
  if (!ctx.empty()) {
    for (const auto& u : g.vertices)
      emit(canonical_copy(ctx, {{xv, u}}, {"g.reach.ctx." + u}));
    emit(canonical_copy(ctx, {{xv, src}}, {"g.reach.ctx." + src}));
  }

  std::vector<std::pair<std::string, std::string>> edges;
  for (auto [u, v] : g.edges) edges.emplace_back(g.vertices[u], g.vertices[v]);
  edges.emplace_back(src, g.vertices[g.s]);
  edges.emplace_back(g.vertices[g.t], snk);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    FreshNames fresh{"g.reach.e" + std::to_string(i)};
    emit(canonical_copy(mid, {{xv, edges[i].first}, {yv, edges[i].second}}, fresh));
  }
  for (const auto& u : g.vertices)
    emit(canonical_copy(sub_y, {{yv, u}}, {"g.reach.y." + u}));

  Database db{std::move(facts)};
  for (const auto& b : db.blocks())
    if (b.fact_ids.size() > 1 && b.relation != q.label(x).text)
      throw std::logic_error("reach_gadget: unexpected inconsistent block " + b.relation);
  return db;
}

Database reach_gadget(const TreeQuery& q, const Digraph& g) {
  auto pair = find_reach_pair(q);
  if (!pair)
    throw std::invalid_argument(
        "reach_gadget: no consecutive ancestor pair violates the root "
        "homomorphism condition");
  return reach_gadget(q, pair->first, pair->second, g);
}

// ---------------------------------------------------------------------------
// Self-join-free lifting

GraphQuery sjf_of(const GraphQuery& q) {
  std::vector<Atom> atoms = q.atoms();
  std::set<std::string> names;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atoms[i].relation += std::to_string(i + 1);
    if (!names.insert(atoms[i].relation).second)
      throw std::logic_error("sjf_of: renamed relations collide");
  }
  return GraphQuery(std::move(atoms));
}

Database sjf_lift(const GraphQuery& q, const Database& sjf_db) {
  if (core(q).size() != q.size())
    throw std::invalid_argument("sjf_lift: query is not minimal");
  if (!q.constants().empty())
    throw std::invalid_argument("sjf_lift: query must be constant-free");
  GraphQuery sjf = sjf_of(q);
  std::map<std::string, int> atom_of;
  for (int i = 0; i < sjf.size(); ++i) atom_of.emplace(sjf.atoms()[i].relation, i);

  std::vector<Fact> out;
  for (const Fact& f : sjf_db.facts()) {
    auto it = atom_of.find(f.relation);
    if (it == atom_of.end())
      throw std::invalid_argument("sjf_lift: unknown relation " + f.relation);
    const Atom& renamed = sjf.atoms()[it->second];
    const Atom& original = q.atoms()[it->second];
    if (f.arity() != renamed.arity() || f.key_arity() != renamed.key_arity)
      throw std::invalid_argument("sjf_lift: arity mismatch for " + f.relation);
    Fact lifted;
    lifted.relation = original.relation;
    for (int i = 0; i < f.arity(); ++i) {
      const std::string& c = i < f.key_arity() ? f.key[i] : f.values[i - f.key_arity()];
      std::string paired = c + "@" + original.args[i].name;
      if (i < f.key_arity())
        lifted.key.push_back(std::move(paired));
      else
        lifted.values.push_back(std::move(paired));
    }
    out.push_back(std::move(lifted));
  }
  return Database(std::move(out));
}

// ---------------------------------------------------------------------------
// The worked example instance

std::pair<TreeQuery, Database> fig5_instance() {
  TreeQuery q = parse_tree_query("C(R(A,B),R(B,A))");
  std::vector<Fact> facts = {
      {"C", {"c1"}, {"x1", "z-"}}, {"C", {"c1"}, {"x2", "z-"}},
      {"C", {"c2"}, {"z+", "x1"}}, {"C", {"c2"}, {"z+", "x2"}},
      {"R", {"x1"}, {"a", "b"}},   {"R", {"x1"}, {"b", "a"}},
      {"R", {"x2"}, {"a", "b"}},   {"R", {"x2"}, {"b", "a"}},
      {"R", {"z+"}, {"a", "b"}},   {"R", {"z-"}, {"b", "a"}},
      {"A", {"a"}, {}},            {"B", {"b"}, {}},
  };
  return {std::move(q), Database(std::move(facts))};
}

}  // namespace cqa
