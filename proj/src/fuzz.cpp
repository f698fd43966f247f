#include "cqa/fuzz.hpp"

#include "cqa/oracle.hpp"

#include <algorithm>
#include <map>

namespace cqa {

namespace {

int rand_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace

TreeQuery random_tree_query(Rng& rng, const TreeGenOptions& opt) {
  // Per-tree arities for the two internal labels keep the label/child-count
  // invariant; the tiny alphabet makes self-joins frequent.
  int r_arity = rand_int(rng, 1, 4) == 1 ? 1 : rand_int(rng, 2, 3);
  std::map<std::string, int> arity{{"R", r_arity}, {"S", rand_int(rng, 1, 2)}};
  RelationTree tree;
  int budget = rand_int(rng, 2, std::max(2, opt.max_vertices));
  int used = 0;

  // `reserve` counts sibling slots still owed further up, so the final
  // vertex count never exceeds the budget.
  auto grow = [&](auto&& self, int parent, bool force_internal, int reserve) -> void {
    ++used;
    std::vector<std::string> fits;
    for (const auto& [name, n] : arity)
      if (used + n + reserve <= budget) fits.push_back(name);
    bool internal = !fits.empty() && (force_internal || chance(rng, 0.7));
    if (internal) {
      const std::string& name = (fits.size() == 2 && chance(rng, 0.8)) ? "R" : fits.back();
      int v = tree.add_vertex(parent, {LabelKind::Relation, name});
      int n = arity.at(name);
      for (int i = 0; i < n; ++i) self(self, v, false, reserve + (n - 1 - i));
    } else {
      switch (rand_int(rng, 0, opt.allow_constants ? 3 : 2)) {
        case 0: tree.add_vertex(parent, {LabelKind::Bottom, ""}); break;
        case 1: tree.add_vertex(parent, {LabelKind::Unary, "A"}); break;
        case 2: tree.add_vertex(parent, {LabelKind::Unary, "B"}); break;
        default: tree.add_vertex(parent, {LabelKind::Constant, "c1"}); break;
      }
    }
  };
  grow(grow, -1, true, 0);
  if (tree.label(0).kind != LabelKind::Relation || tree.size() > opt.max_vertices)
    return random_tree_query(rng, opt);
  tree.seal();
  TreeQuery q{std::move(tree)};

  if (chance(rng, opt.duplicate_branch_prob)) {
    // Copy one child subtree of some internal vertex over a sibling.
    std::vector<int> hosts;
    for (int v = 0; v < q.size(); ++v)
      if (q.internal(v) && q.children(v).size() >= 2) hosts.push_back(v);
    if (!hosts.empty()) {
      int host = hosts[rand_int(rng, 0, static_cast<int>(hosts.size()) - 1)];
      const auto& ch = q.children(host);
      int from = ch[rand_int(rng, 0, static_cast<int>(ch.size()) - 1)];
      int to = ch[rand_int(rng, 0, static_cast<int>(ch.size()) - 1)];
      if (from != to) {
        const RelationTree& t = q.tree();
        RelationTree copy;
        auto dup = [&](auto&& self, int src, int parent) -> void {
          int v = src == to ? from : src;
          int dst = copy.add_vertex(parent, t.label(v));
          for (int c : t.children(v)) self(self, c, dst);
        };
        dup(dup, t.root(), -1);
        copy.seal();
        return TreeQuery{std::move(copy)};
      }
    }
  }
  return q;
}

Database random_database(Rng& rng, const TreeQuery& q, const DbGenOptions& opt) {
  std::vector<std::string> pool;
  for (const auto& c : q.constants()) pool.push_back(c);
  const char* names[] = {"a", "b", "c", "d", "e", "f"};
  for (int i = 0; i < 6 && static_cast<int>(pool.size()) < opt.max_adom; ++i)
    pool.push_back(names[i]);
  auto pick = [&]() { return pool[rand_int(rng, 0, static_cast<int>(pool.size()) - 1)]; };

  std::vector<Fact> facts;
  // Planted instantiations of q keep satisfied instances common; vertex
  // images may collide, which plants inconsistent variants too.
  int plants = chance(rng, 0.6) ? (chance(rng, 0.3) ? 2 : 1) : 0;
  for (int p = 0; p < plants; ++p) {
    std::vector<std::string> img(q.size());
    for (int v = 0; v < q.size(); ++v)
      img[v] = q.label(v).kind == LabelKind::Constant ? q.label(v).text : pick();
    for (int v : q.atom_vertices()) {
      Fact f{q.label(v).text, {img[v]}, {}};
      for (int c : q.children(v)) f.values.push_back(img[c]);
      facts.push_back(std::move(f));
    }
  }

  // Schema of q: internal labels with their child counts, unary labels.
  std::map<std::string, int> schema;  // relation -> number of value positions
  for (int v : q.atom_vertices())
    schema.emplace(q.label(v).text, static_cast<int>(q.children(v).size()));
  for (const auto& [rel, nvals] : schema) {
    int nblocks = rand_int(rng, 0, opt.max_blocks_per_relation);
    std::vector<std::string> keys = pool;
    std::shuffle(keys.begin(), keys.end(), rng);
    for (int b = 0; b < nblocks && b < static_cast<int>(keys.size()); ++b) {
      int size = nvals == 0 ? 1 : rand_int(rng, 1, opt.max_block_size);
      for (int i = 0; i < size; ++i) {
        std::vector<std::string> vals;
        for (int j = 0; j < nvals; ++j) vals.push_back(pick());
        facts.push_back({rel, {keys[b]}, std::move(vals)});
      }
    }
  }

  // Trim the largest blocks until the repair space fits the budget.
  Database db{std::move(facts)};
  while (RepairCursor(db).overflowed() || RepairCursor(db).total() > opt.max_repairs) {
    const Database::Block* largest = nullptr;
    for (const auto& b : db.blocks())
      if (!largest || b.fact_ids.size() > largest->fact_ids.size()) largest = &b;
    std::vector<Fact> kept;
    for (int i = 0; i < db.size(); ++i)
      if (i != largest->fact_ids.back()) kept.push_back(db.facts()[i]);
    db = Database(std::move(kept));
  }
  return db;
}

std::vector<RelationTree> trees_in_instance(const Database& r, const std::string& c,
                                            int max_vertices, std::size_t max_count) {
  struct Builder {
    const Database& r;
    std::size_t cap;
    bool truncated = false;

    // All trees starting at constant c with at most `budget` vertices.
    std::vector<std::pair<RelationTree, int>> from(const std::string& c, int budget) {
      std::vector<std::pair<RelationTree, int>> out;
      if (budget < 1) return out;
      {
        RelationTree bot;
        bot.add_vertex(-1, {LabelKind::Bottom, ""});
        bot.seal();
        out.emplace_back(std::move(bot), 1);
      }
      {
        RelationTree ct;
        ct.add_vertex(-1, {LabelKind::Constant, c});
        ct.seal();
        out.emplace_back(std::move(ct), 1);
      }
      for (const auto& [rel, sig] : r.schema()) {
        if (sig.first != 1) continue;
        const Database::Block* b = r.find_block(rel, {c});
        if (!b) continue;
        const Fact& f = r.facts()[b->fact_ids[0]];
        if (sig.second == 1) {
          RelationTree ut;
          ut.add_vertex(-1, {LabelKind::Unary, rel});
          ut.seal();
          out.emplace_back(std::move(ut), 1);
          continue;
        }
        // Cross product of child alternatives within the remaining budget.
        std::vector<std::pair<std::vector<RelationTree>, int>> partial{{{}, 1}};
        for (const auto& d : f.values) {
          std::vector<std::pair<std::vector<RelationTree>, int>> next;
          for (const auto& [prefix, size] : partial) {
            for (auto& [sub, ssize] : from(d, budget - size)) {
              if (size + ssize > budget) continue;
              auto ext = prefix;
              ext.push_back(sub);
              next.emplace_back(std::move(ext), size + ssize);
              if (next.size() > cap) {
                truncated = true;
                break;
              }
            }
            if (truncated) break;
          }
          partial = std::move(next);
          if (truncated) break;
        }
        for (auto& [subs, size] : partial) {
          if (subs.size() != f.values.size()) continue;
          RelationTree t;
          int root = t.add_vertex(-1, {LabelKind::Relation, rel});
          auto graft = [&](auto&& self, const RelationTree& src, int sv, int parent) -> void {
            int dst = t.add_vertex(parent, src.label(sv));
            for (int ch : src.children(sv)) self(self, src, ch, dst);
          };
          for (const auto& sub : subs) graft(graft, sub, sub.root(), root);
          t.seal();
          out.emplace_back(std::move(t), size);
          if (out.size() > cap) {
            truncated = true;
            break;
          }
        }
        if (truncated) break;
      }
      return out;
    }
  };
  Builder builder{r, max_count};
  std::vector<RelationTree> out;
  for (auto& [t, size] : builder.from(c, max_vertices)) out.push_back(std::move(t));
  if (builder.truncated)
    throw std::runtime_error("tree enumeration truncated; lower the budget");
  return out;
}

}  // namespace cqa
