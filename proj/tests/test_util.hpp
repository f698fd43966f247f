#pragma once

// Shared helpers for the test suites: independent brute-force oracles and
// small structural utilities. Everything here stays independent of the
// implementation paths it checks.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqa/fuzz.hpp"
#include "cqa/grammar.hpp"
#include "cqa/model.hpp"

namespace cqa::test {

// Exhaustive homomorphism oracle: tries every total assignment of p's
// variables into q's symbols. Exponential; fine for tiny queries.
inline bool hom_exists_bruteforce(const GraphQuery& p, const GraphQuery& q) {
  std::vector<std::string> vars(p.variables().begin(), p.variables().end());
  std::vector<Symbol> symbols;
  for (const auto& v : q.variables()) symbols.push_back(Symbol::var(v));
  for (const auto& c : q.constants()) symbols.push_back(Symbol::constant(c));
  for (const auto& c : p.constants()) symbols.push_back(Symbol::constant(c));
  if (vars.empty()) symbols.push_back(Symbol::var("dummy"));

  std::map<std::string, Symbol> assign;
  auto image_in_q = [&](const Atom& a) {
    Atom img = a;
    for (auto& s : img.args)
      if (s.is_variable()) s = assign.at(s.name);
    for (const Atom& b : q.atoms())
      if (b == img) return true;
    return false;
  };
  auto rec = [&](auto&& self, std::size_t i) -> bool {
    if (i == vars.size()) {
      for (const Atom& a : p.atoms())
        if (!image_in_q(a)) return false;
      return true;
    }
    for (const Symbol& s : symbols) {
      assign.insert_or_assign(vars[i], s);
      if (self(self, i + 1)) return true;
    }
    assign.erase(vars[i]);
    return false;
  };
  return rec(rec, 0);
}

// Replace one non-root subtree with a bottom leaf; the result maps into the
// original, which gives homomorphism chains for the transitivity tests.
inline TreeQuery prune_random_subtree(Rng& rng, const TreeQuery& q) {
  std::vector<int> candidates;
  for (int v = 1; v < q.size(); ++v)
    if (q.label(v).kind != LabelKind::Bottom) candidates.push_back(v);
  if (candidates.empty()) return q;
  int cut = candidates[std::uniform_int_distribution<int>(
      0, static_cast<int>(candidates.size()) - 1)(rng)];
  RelationTree out;
  const RelationTree& t = q.tree();
  auto copy = [&](auto&& self, int src, int parent) -> void {
    if (src == cut) {
      out.add_vertex(parent, {LabelKind::Bottom, ""});
      return;
    }
    int dst = out.add_vertex(parent, t.label(src));
    for (int c : t.children(src)) self(self, c, dst);
  };
  copy(copy, t.root(), -1);
  out.seal();
  return TreeQuery(std::move(out));
}

// Trees derivable from S_v using at most `backward_budget` backward rules;
// bounded unrolling of the grammar, capped at `max_count` results.
inline std::vector<RelationTree> derive_bounded(const TreeCFG& g, int v, int backward_budget,
                                                std::size_t max_count = 500) {
  const TreeQuery& q = g.query();
  struct Out {
    RelationTree tree;
    int used;
  };
  auto rec = [&](auto&& self, int vertex, int budget) -> std::vector<Out> {
    std::vector<Out> result;
    const TreeLabel& l = q.label(vertex);
    if (l.kind != LabelKind::Relation) {
      RelationTree t;
      t.add_vertex(-1, l);
      t.seal();
      result.push_back({std::move(t), 0});
      return result;
    }
    for (int x : g.chain(vertex)) {
      int cost = x == vertex ? 0 : 1;
      if (cost > budget) continue;
      std::vector<std::pair<std::vector<RelationTree>, int>> partial{{{}, cost}};
      for (int child : q.children(x)) {
        std::vector<std::pair<std::vector<RelationTree>, int>> next;
        for (auto& [prefix, used] : partial) {
          for (auto& sub : self(self, child, budget - used)) {
            if (used + sub.used > budget) continue;
            auto ext = prefix;
            ext.push_back(sub.tree);
            next.emplace_back(std::move(ext), used + sub.used);
            if (next.size() > max_count) break;
          }
          if (next.size() > max_count) break;
        }
        partial = std::move(next);
      }
      for (auto& [subs, used] : partial) {
        RelationTree t;
        int root = t.add_vertex(-1, q.label(x));
        auto graft = [&](auto&& gr, const RelationTree& src, int sv, int parent) -> void {
          int dst = t.add_vertex(parent, src.label(sv));
          for (int ch : src.children(sv)) gr(gr, src, ch, dst);
        };
        for (const auto& sub : subs) graft(graft, sub, sub.root(), root);
        t.seal();
        result.push_back({std::move(t), used});
        if (result.size() > max_count) return result;
      }
    }
    return result;
  };
  std::vector<RelationTree> out;
  for (auto& o : rec(rec, v, backward_budget)) out.push_back(std::move(o.tree));
  return out;
}

}  // namespace cqa::test
