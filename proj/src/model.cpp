#include "cqa/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cqa {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_bare_token_char(char c) {
  // Characters allowed in unquoted database constants and digraph vertices.
  switch (c) {
    case '(': case ')': case ',': case ';': case '#': case '\'':
      return false;
    default:
      return !std::isspace(static_cast<unsigned char>(c)) &&
             std::isprint(static_cast<unsigned char>(c));
  }
}

// Shared cursor for the small recursive-descent parsers below.
struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool accept(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "' " + what, pos);
  }
  std::string identifier() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && is_ident_char(text[pos])) ++pos;
    if (pos == start) throw ParseError("expected identifier", pos);
    return std::string(text.substr(start, pos - start));
  }
  std::string quoted_constant() {
    skip_ws();
    if (pos >= text.size() || text[pos] != '\'')
      throw ParseError("expected quoted constant", pos);
    std::size_t start = ++pos;
    while (pos < text.size() && text[pos] != '\'') ++pos;
    if (pos >= text.size()) throw ParseError("unterminated constant", start);
    if (pos == start) throw ParseError("empty constant", start);
    std::string s(text.substr(start, pos - start));
    ++pos;
    return s;
  }
};

std::string quote_if_needed(const std::string& s) {
  bool bare = !s.empty();
  for (char c : s) bare = bare && is_bare_token_char(c);
  if (bare) return s;
  return "'" + s + "'";
}

}  // namespace

std::string Symbol::str() const {
  return is_constant() ? "'" + name + "'" : name;
}

// ---------------------------------------------------------------------------
// RelationTree

int RelationTree::depth(int v) const {
  int d = 0;
  for (int u = parent(v); u >= 0; u = parent(u)) ++d;
  return d;
}

bool RelationTree::ancestor(int u, int v) const {
  for (int w = parent(v); w >= 0; w = parent(w))
    if (w == u) return true;
  return false;
}

std::vector<int> RelationTree::path_from_root(int v) const {
  std::vector<int> rev;
  for (int w = v; parent(w) >= 0; w = parent(w)) {
    const auto& sib = children(parent(w));
    int idx = static_cast<int>(std::find(sib.begin(), sib.end(), w) - sib.begin());
    rev.push_back(idx);
  }
  return {rev.rbegin(), rev.rend()};
}

std::vector<int> RelationTree::subtree_vertices(int v) const {
  // Pre-order storage makes a subtree a contiguous range.
  std::vector<int> out{v};
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c : children(out[i])) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

RelationTree RelationTree::subtree(int v) const {
  RelationTree t;
  // Recursive copy preserving child order.
  auto copy = [&](auto&& self, int src, int dst_parent) -> void {
    int dst = t.add_vertex(dst_parent, label(src));
    for (int c : children(src)) self(self, c, dst);
  };
  copy(copy, v, -1);
  t.seal();
  return t;
}

int RelationTree::add_vertex(int parent, TreeLabel label) {
  if (nodes_.empty() && parent != -1)
    throw std::invalid_argument("first vertex must be the root");
  if (!nodes_.empty() && (parent < 0 || parent >= size()))
    throw std::invalid_argument("parent out of range");
  int id = size();
  nodes_.push_back({std::move(label), parent, {}});
  if (parent >= 0) nodes_[parent].children.push_back(id);
  return id;
}

void RelationTree::seal() {
  if (nodes_.empty()) throw std::invalid_argument("empty tree");
  std::map<std::string, int> child_counts;  // relation/unary name -> count
  for (const auto& n : nodes_) {
    switch (n.label.kind) {
      case LabelKind::Relation:
        if (n.children.empty())
          throw std::invalid_argument("relation vertex '" + n.label.text +
                                      "' has no children");
        break;
      case LabelKind::Unary:
      case LabelKind::Constant:
      case LabelKind::Bottom:
        if (!n.children.empty())
          throw std::invalid_argument("leaf vertex has children");
        break;
    }
    if (n.label.kind == LabelKind::Relation || n.label.kind == LabelKind::Unary) {
      int cnt = static_cast<int>(n.children.size());
      auto [it, inserted] = child_counts.emplace(n.label.text, cnt);
      if (!inserted && it->second != cnt)
        throw std::invalid_argument(
            "relation name '" + n.label.text +
            "' used with conflicting child counts (" +
            std::to_string(it->second) + " vs " + std::to_string(cnt) + ")");
    }
  }
}

std::string RelationTree::str() const {
  std::string out;
  auto emit = [&](auto&& self, int v) -> void {
    const TreeLabel& l = label(v);
    switch (l.kind) {
      case LabelKind::Bottom: out += '_'; return;
      case LabelKind::Constant: out += "'" + l.text + "'"; return;
      case LabelKind::Unary: out += l.text; return;
      case LabelKind::Relation:
        out += l.text;
        out += '(';
        for (std::size_t i = 0; i < children(v).size(); ++i) {
          if (i) out += ',';
          self(self, children(v)[i]);
        }
        out += ')';
        return;
    }
  };
  emit(emit, root());
  return out;
}

RelationTree parse_relation_tree(std::string_view text) {
  Cursor cur{text};
  RelationTree tree;
  auto node = [&](auto&& self, int parent) -> void {
    char c = cur.peek();
    if (c == '_') {
      ++cur.pos;
      tree.add_vertex(parent, {LabelKind::Bottom, ""});
      return;
    }
    if (c == '\'') {
      tree.add_vertex(parent, {LabelKind::Constant, cur.quoted_constant()});
      return;
    }
    std::size_t at = cur.pos;
    std::string name = cur.identifier();
    if (!std::isupper(static_cast<unsigned char>(name[0])))
      throw ParseError("relation names are uppercase-initial: '" + name + "'", at);
    if (cur.accept('(')) {
      int v = tree.add_vertex(parent, {LabelKind::Relation, name});
      self(self, v);
      while (cur.accept(',')) self(self, v);
      cur.expect(')', "to close argument list");
    } else {
      tree.add_vertex(parent, {LabelKind::Unary, name});
    }
  };
  node(node, -1);
  if (!cur.eof()) throw ParseError("trailing input after tree", cur.pos);
  tree.seal();
  return tree;
}

// ---------------------------------------------------------------------------
// TreeQuery

TreeQuery::TreeQuery(RelationTree tree) : tree_(std::move(tree)) {
  if (tree_.size() == 0) throw std::invalid_argument("empty tree");
  LabelKind rk = tree_.label(0).kind;
  if (rk != LabelKind::Relation && rk != LabelKind::Unary)
    throw std::invalid_argument("a query has at least one atom");
  var_index_.resize(tree_.size());
  int next = 0;
  for (int v = 0; v < tree_.size(); ++v) {
    var_index_[v] = tree_.label(v).kind == LabelKind::Constant ? -1 : next++;
    LabelKind k = tree_.label(v).kind;
    if (k == LabelKind::Relation || k == LabelKind::Unary) atom_vertices_.push_back(v);
  }
}

std::string TreeQuery::var_name(int v) const {
  if (var_index_[v] < 0) throw std::invalid_argument("constant vertex has no variable");
  return "x" + std::to_string(var_index_[v]);
}

std::optional<int> TreeQuery::vertex_of_var(const std::string& name) const {
  for (int v = 0; v < size(); ++v)
    if (var_index_[v] >= 0 && var_name(v) == name) return v;
  return std::nullopt;
}

std::set<std::string> TreeQuery::constants() const {
  std::set<std::string> out;
  for (int v = 0; v < size(); ++v)
    if (label(v).kind == LabelKind::Constant) out.insert(label(v).text);
  return out;
}

TreeQuery parse_tree_query(std::string_view text) {
  RelationTree tree = parse_relation_tree(text);
  if (tree.label(0).kind != LabelKind::Relation)
    throw ParseError("root must be an internal relation vertex (a query has at least one atom)", 0);
  return TreeQuery(std::move(tree));
}

// ---------------------------------------------------------------------------
// GraphQuery

std::string Atom::str() const {
  std::string out = relation + "(";
  for (int i = 0; i < arity(); ++i) {
    if (i == key_arity)
      out += "; ";
    else if (i)
      out += ", ";
    out += args[i].str();
  }
  if (key_arity == arity()) out += ";";
  out += ")";
  return out;
}

GraphQuery::GraphQuery(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  std::map<std::string, std::pair<int, int>> schema;
  for (const auto& a : atoms_) {
    if (a.key_arity < 1 || a.key_arity > a.arity())
      throw std::invalid_argument("atom '" + a.relation + "' has invalid key arity");
    auto sig = std::make_pair(a.key_arity, a.arity());
    auto [it, inserted] = schema.emplace(a.relation, sig);
    if (!inserted && it->second != sig)
      throw std::invalid_argument("inconsistent arity or key arity for relation '" +
                                  a.relation + "'");
  }
}

std::set<std::string> GraphQuery::variables() const {
  std::set<std::string> out;
  for (const auto& a : atoms_)
    for (const auto& s : a.args)
      if (s.is_variable()) out.insert(s.name);
  return out;
}

std::set<std::string> GraphQuery::constants() const {
  std::set<std::string> out;
  for (const auto& a : atoms_)
    for (const auto& s : a.args)
      if (s.is_constant()) out.insert(s.name);
  return out;
}

bool GraphQuery::is_selfjoinfree() const {
  std::set<std::string> seen;
  for (const auto& a : atoms_)
    if (!seen.insert(a.relation).second) return false;
  return true;
}

bool GraphQuery::is_graphbcq(std::string* reason) const {
  auto fail = [&](std::string why) {
    if (reason) *reason = std::move(why);
    return false;
  };
  std::set<std::string> keys;
  for (const auto& a : atoms_) {
    if (a.key_arity != 1) return fail("composite key in atom " + a.str());
    if (!a.args[0].is_variable()) return fail("constant key in atom " + a.str());
    std::set<std::string> vars;
    for (const auto& s : a.args)
      if (s.is_variable() && !vars.insert(s.name).second)
        return fail("variable '" + s.name + "' occurs twice in atom " + a.str());
    if (!keys.insert(a.args[0].name).second)
      return fail("key variable '" + a.args[0].name + "' shared by two atoms");
  }
  return true;
}

GraphQuery GraphQuery::subquery(const std::vector<int>& atom_ids) const {
  std::vector<Atom> out;
  out.reserve(atom_ids.size());
  for (int i : atom_ids) out.push_back(atoms_[i]);
  return GraphQuery(std::move(out));
}

std::string GraphQuery::str() const {
  std::string out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out += ", ";
    out += atoms_[i].str();
  }
  return out;
}

GraphQuery parse_graph_query(std::string_view text) {
  Cursor cur{text};
  std::vector<Atom> atoms;
  auto symbol = [&]() -> Symbol {
    char c = cur.peek();
    if (c == '\'') return Symbol::constant(cur.quoted_constant());
    std::size_t at = cur.pos;
    std::string name = cur.identifier();
    if (!std::islower(static_cast<unsigned char>(name[0])))
      throw ParseError("variables are lowercase-initial: '" + name + "'", at);
    return Symbol::var(name);
  };
  do {
    std::size_t at = cur.pos;
    std::string name = cur.identifier();
    if (!std::isupper(static_cast<unsigned char>(name[0])))
      throw ParseError("relation names are uppercase-initial: '" + name + "'", at);
    cur.expect('(', "after relation name");
    Atom atom;
    atom.relation = std::move(name);
    atom.args.push_back(symbol());
    while (cur.accept(',')) atom.args.push_back(symbol());
    if (cur.accept(';')) {
      atom.key_arity = atom.arity();
      if (cur.peek() != ')') {
        atom.args.push_back(symbol());
        while (cur.accept(',')) atom.args.push_back(symbol());
      }
    } else {
      atom.key_arity = atom.arity();
    }
    cur.expect(')', "to close atom");
    atoms.push_back(std::move(atom));
  } while (cur.accept(','));
  if (!cur.eof()) throw ParseError("trailing input after query", cur.pos);
  if (atoms.empty()) throw ParseError("empty query", 0);
  return GraphQuery(std::move(atoms));
}

GraphQuery tree_to_graph(const TreeQuery& q) {
  std::vector<Atom> atoms;
  for (int v : q.atom_vertices()) {
    Atom a;
    a.relation = q.label(v).text;
    a.key_arity = 1;
    a.args.push_back(Symbol::var(q.var_name(v)));
    if (q.internal(v)) {
      for (int c : q.children(v)) {
        if (q.label(c).kind == LabelKind::Constant)
          a.args.push_back(Symbol::constant(q.label(c).text));
        else
          a.args.push_back(Symbol::var(q.var_name(c)));
      }
    }
    atoms.push_back(std::move(a));
  }
  return GraphQuery(std::move(atoms));
}

// ---------------------------------------------------------------------------
// Facts and databases

std::string Fact::str() const {
  std::string out = relation + "(";
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += ",";
    out += quote_if_needed(key[i]);
  }
  if (!values.empty()) {
    out += "; ";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ",";
      out += quote_if_needed(values[i]);
    }
  }
  out += ")";
  return out;
}

Database::Database(std::vector<Fact> facts) : facts_(std::move(facts)) {
  std::sort(facts_.begin(), facts_.end());
  facts_.erase(std::unique(facts_.begin(), facts_.end()), facts_.end());
  for (int i = 0; i < size(); ++i) {
    const Fact& f = facts_[i];
    if (f.key.empty()) throw std::invalid_argument("fact with empty key: " + f.str());
    auto sig = std::make_pair(f.key_arity(), f.arity());
    auto [it, inserted] = schema_.emplace(f.relation, sig);
    if (!inserted && it->second != sig)
      throw std::invalid_argument("inconsistent arity or key arity for relation '" +
                                  f.relation + "'");
    auto bk = std::make_pair(f.relation, f.key);
    auto [bit, fresh] = block_index_.emplace(bk, static_cast<int>(blocks_.size()));
    if (fresh) blocks_.push_back({f.relation, f.key, {}});
    blocks_[bit->second].fact_ids.push_back(i);
    for (const auto& c : f.key) adom_.push_back(c);
    for (const auto& c : f.values) adom_.push_back(c);
  }
  std::sort(adom_.begin(), adom_.end());
  adom_.erase(std::unique(adom_.begin(), adom_.end()), adom_.end());
  // block_index_ iterates in (relation, key) order; renumber blocks to match.
  std::vector<Block> ordered;
  ordered.reserve(blocks_.size());
  for (auto& [bk, id] : block_index_) {
    ordered.push_back(std::move(blocks_[id]));
    id = static_cast<int>(ordered.size()) - 1;
  }
  blocks_ = std::move(ordered);
}

bool Database::consistent() const {
  for (const auto& b : blocks_)
    if (b.fact_ids.size() > 1) return false;
  return true;
}

const Database::Block* Database::find_block(const std::string& relation,
                                            const std::vector<std::string>& key) const {
  auto it = block_index_.find(std::make_pair(relation, key));
  return it == block_index_.end() ? nullptr : &blocks_[it->second];
}

bool Database::contains(const Fact& f) const {
  return std::binary_search(facts_.begin(), facts_.end(), f);
}

std::string Database::str() const {
  std::string out;
  for (const auto& f : facts_) {
    out += f.str();
    out += '\n';
  }
  return out;
}

Database parse_database(std::string_view text) {
  std::vector<Fact> facts;
  std::size_t line_no = 0;
  std::size_t start = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(msg + " on line " + std::to_string(line_no), line_no);
  };
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    // Strip comments; a '#' inside a quoted constant does not count.
    bool quoted = false;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\'') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        cut = i;
        break;
      }
    }
    line = line.substr(0, cut);
    Cursor cur{line};
    if (cur.eof()) continue;
    try {
      std::string name = cur.identifier();
      if (!std::isupper(static_cast<unsigned char>(name[0])))
        throw ParseError("relation names are uppercase-initial: '" + name + "'", cur.pos);
      cur.expect('(', "after relation name");
      auto token = [&]() -> std::string {
        if (cur.peek() == '\'') return cur.quoted_constant();
        cur.skip_ws();
        std::size_t s = cur.pos;
        while (cur.pos < line.size() && is_bare_token_char(line[cur.pos])) ++cur.pos;
        if (cur.pos == s) throw ParseError("expected constant", cur.pos);
        return std::string(line.substr(s, cur.pos - s));
      };
      Fact f;
      f.relation = std::move(name);
      f.key.push_back(token());
      while (cur.accept(',')) f.key.push_back(token());
      if (cur.accept(';') && cur.peek() != ')') {
        f.values.push_back(token());
        while (cur.accept(',')) f.values.push_back(token());
      }
      cur.expect(')', "to close fact");
      if (!cur.eof()) throw ParseError("trailing input after fact", cur.pos);
      facts.push_back(std::move(f));
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
  }
  try {
    return Database(std::move(facts));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace cqa
