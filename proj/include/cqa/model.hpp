#pragma once

// Core data model: rooted relation trees, tree queries, conjunctive queries
// with designated primary keys, facts and databases, plus the text syntax
// for all of them.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cqa {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Variables and constants live in disjoint namespaces; equality is by
// (kind, name).
struct Symbol {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string name;

  static Symbol var(std::string n) { return {Kind::Variable, std::move(n)}; }
  static Symbol constant(std::string n) { return {Kind::Constant, std::move(n)}; }
  bool is_variable() const { return kind == Kind::Variable; }
  bool is_constant() const { return kind == Kind::Constant; }
  auto operator<=>(const Symbol&) const = default;
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Rooted relation trees

enum class LabelKind { Relation, Unary, Constant, Bottom };

struct TreeLabel {
  LabelKind kind = LabelKind::Bottom;
  std::string text;  // relation name, unary name or constant; empty for Bottom
  auto operator<=>(const TreeLabel&) const = default;
};

// A rooted ordered tree whose internal vertices carry relation labels and
// whose leaves carry unary-relation, constant or bottom labels. Two vertices
// with the same label always have the same number of children. Vertices are
// stored in pre-order; vertex 0 is the root.
class RelationTree {
 public:
  RelationTree() = default;

  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return 0; }
  const TreeLabel& label(int v) const { return nodes_[v].label; }
  int parent(int v) const { return nodes_[v].parent; }
  const std::vector<int>& children(int v) const { return nodes_[v].children; }
  bool internal(int v) const { return nodes_[v].label.kind == LabelKind::Relation; }
  bool leaf(int v) const { return !internal(v); }
  int depth(int v) const;
  // True iff u is a proper ancestor of v.
  bool ancestor(int u, int v) const;
  // Child positions along the path root -> v.
  std::vector<int> path_from_root(int v) const;
  // Vertices of the subtree rooted at v, in pre-order.
  std::vector<int> subtree_vertices(int v) const;
  RelationTree subtree(int v) const;

  std::string str() const;
  bool operator==(const RelationTree& o) const { return nodes_ == o.nodes_; }

  // Builder interface: add the root first, then children under existing
  // vertices, in left-to-right order. Label consistency is checked by seal().
  int add_vertex(int parent, TreeLabel label);
  // Validates label/child-count consistency; throws std::invalid_argument.
  void seal();

 private:
  struct Node {
    TreeLabel label;
    int parent = -1;
    std::vector<int> children;
    auto operator<=>(const Node&) const = default;
  };
  std::vector<Node> nodes_;
  friend RelationTree parse_relation_tree(std::string_view);
};

// Parses the tree syntax:
//   Tree := RelName '(' Tree (',' Tree)* ')' | UnaryRelName | 'constant' | '_'
// Relation and unary names are uppercase-initial identifiers; constants are
// single-quoted; '_' is the bottom label; whitespace is insignificant.
RelationTree parse_relation_tree(std::string_view text);

// ---------------------------------------------------------------------------
// Tree queries

// A rooted relation tree read as a Boolean conjunctive query: every
// non-constant vertex is a query variable ("x0", "x1", ... in pre-order,
// skipping constant vertices), and an internal vertex labeled R with
// children v1..vn contributes the atom R(<self>; v1..vn) whose primary key
// is the vertex's own variable.
class TreeQuery {
 public:
  TreeQuery() = default;
  // Throws std::invalid_argument unless the root carries a Relation or
  // Unary label (a query has at least one atom).
  explicit TreeQuery(RelationTree tree);

  const RelationTree& tree() const { return tree_; }
  int size() const { return tree_.size(); }
  int root() const { return 0; }
  const TreeLabel& label(int v) const { return tree_.label(v); }
  int parent(int v) const { return tree_.parent(v); }
  const std::vector<int>& children(int v) const { return tree_.children(v); }
  bool internal(int v) const { return tree_.internal(v); }
  bool ancestor(int u, int v) const { return tree_.ancestor(u, v); }
  int depth(int v) const { return tree_.depth(v); }

  bool has_variable(int v) const { return var_index_[v] >= 0; }
  // Variable name of a non-constant vertex.
  std::string var_name(int v) const;
  std::optional<int> vertex_of_var(const std::string& name) const;
  // Vertices carrying atoms (internal and unary vertices), in pre-order.
  const std::vector<int>& atom_vertices() const { return atom_vertices_; }
  std::set<std::string> constants() const;

  std::string str() const { return tree_.str(); }
  bool operator==(const TreeQuery& o) const { return tree_ == o.tree_; }

 private:
  RelationTree tree_;
  std::vector<int> var_index_;  // -1 for constant vertices
  std::vector<int> atom_vertices_;
};

// Parses a tree query; in addition to the tree syntax the root must be an
// internal relation vertex.
TreeQuery parse_tree_query(std::string_view text);

// ---------------------------------------------------------------------------
// Conjunctive queries over keyed relations

struct Atom {
  std::string relation;
  int key_arity = 1;
  std::vector<Symbol> args;  // the first key_arity positions are the key

  int arity() const { return static_cast<int>(args.size()); }
  auto operator<=>(const Atom&) const = default;
  std::string str() const;
};

// A Boolean conjunctive query given as an atom set. Relation names have a
// consistent arity and key arity across the query (checked on construction).
class GraphQuery {
 public:
  GraphQuery() = default;
  explicit GraphQuery(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  int size() const { return static_cast<int>(atoms_.size()); }

  std::set<std::string> variables() const;
  std::set<std::string> constants() const;
  bool is_selfjoinfree() const;
  // Simple variable keys, no repeated variable within an atom, pairwise
  // distinct key variables across atoms.
  bool is_graphbcq(std::string* reason = nullptr) const;
  // Subquery on the given atom indices (order preserved).
  GraphQuery subquery(const std::vector<int>& atom_ids) const;

  std::string str() const;
  bool operator==(const GraphQuery& o) const { return atoms_ == o.atoms_; }

 private:
  std::vector<Atom> atoms_;
};

// Parses "R(x; z), S(y; z)": atoms separated by commas, key arguments left
// of ';' ("A(x;)" and "A(x)" both denote an all-key atom). Variables are
// lowercase-initial identifiers, constants are single-quoted.
GraphQuery parse_graph_query(std::string_view text);

// The atom set a tree query stands for.
GraphQuery tree_to_graph(const TreeQuery& q);

// ---------------------------------------------------------------------------
// Facts and databases

struct Fact {
  std::string relation;
  std::vector<std::string> key;
  std::vector<std::string> values;

  int arity() const { return static_cast<int>(key.size() + values.size()); }
  int key_arity() const { return static_cast<int>(key.size()); }
  auto operator<=>(const Fact&) const = default;
  std::string str() const;
};

// A set of facts with derived blocks (maximal sets of key-equal facts) and
// active domain. Relation names have a consistent arity and key arity
// (checked on construction); duplicate facts collapse.
class Database {
 public:
  struct Block {
    std::string relation;
    std::vector<std::string> key;
    std::vector<int> fact_ids;  // indices into facts(), sorted
  };

  Database() = default;
  explicit Database(std::vector<Fact> facts);

  const std::vector<Fact>& facts() const { return facts_; }
  int size() const { return static_cast<int>(facts_.size()); }
  bool empty() const { return facts_.empty(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<std::string>& adom() const { return adom_; }
  bool consistent() const;
  const Block* find_block(const std::string& relation,
                          const std::vector<std::string>& key) const;
  // relation -> (key arity, arity)
  const std::map<std::string, std::pair<int, int>>& schema() const { return schema_; }
  bool contains(const Fact& f) const;

  std::string str() const;
  bool operator==(const Database& o) const { return facts_ == o.facts_; }

 private:
  std::vector<Fact> facts_;   // sorted, unique
  std::vector<Block> blocks_; // sorted by (relation, key)
  std::vector<std::string> adom_;
  std::map<std::string, std::pair<int, int>> schema_;
  std::map<std::pair<std::string, std::vector<std::string>>, int> block_index_;
};

// Line-based fact files: one `R(k1,...,kj; a1,...,am)` per line, `#` starts
// a comment, blank lines are ignored. Constants may be written bare or
// single-quoted.
Database parse_database(std::string_view text);

}  // namespace cqa
