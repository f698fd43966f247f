#include "cqa/homomorphism.hpp"

#include <algorithm>
#include <stdexcept>

namespace cqa {

std::vector<std::vector<char>> tree_hom_feasibility(const RelationTree& p,
                                                    const RelationTree& q) {
  int np = p.size(), nq = q.size();
  std::vector<std::vector<char>> feas(np, std::vector<char>(nq, 0));
  // Pre-order stores parents before children, so a reverse scan sees all
  // children of u before u itself.
  for (int u = np - 1; u >= 0; --u) {
    const TreeLabel& lu = p.label(u);
    for (int v = 0; v < nq; ++v) {
      const TreeLabel& lv = q.label(v);
      bool ok = false;
      switch (lu.kind) {
        case LabelKind::Bottom:
          ok = true;
          break;
        case LabelKind::Constant:
          ok = lv.kind == LabelKind::Constant && lv.text == lu.text;
          break;
        case LabelKind::Unary:
          ok = lv.kind == LabelKind::Unary && lv.text == lu.text;
          break;
        case LabelKind::Relation: {
          ok = lv.kind == LabelKind::Relation && lv.text == lu.text &&
               p.children(u).size() == q.children(v).size();
          for (std::size_t i = 0; ok && i < p.children(u).size(); ++i)
            ok = feas[p.children(u)[i]][q.children(v)[i]];
          break;
        }
      }
      feas[u][v] = ok;
    }
  }
  return feas;
}

namespace {

// Image of vertex u of p when p's root maps to w; valid whenever the root
// mapping is feasible.
int forced_image(const RelationTree& p, const RelationTree& q, int u, int w) {
  for (int step : p.path_from_root(u)) {
    if (step >= static_cast<int>(q.children(w).size())) return -1;
    w = q.children(w)[step];
  }
  return w;
}

TreeHomWitness build_witness(const RelationTree& p, const RelationTree& q, int w) {
  TreeHomWitness wit;
  wit.map.assign(p.size(), -1);
  auto walk = [&](auto&& self, int u, int v) -> void {
    wit.map[u] = v;
    for (std::size_t i = 0; i < p.children(u).size(); ++i)
      self(self, p.children(u)[i], q.children(v)[i]);
  };
  walk(walk, p.root(), w);
  return wit;
}

}  // namespace

std::optional<TreeHomWitness> tree_hom(const RelationTree& p, const RelationTree& q,
                                       std::optional<std::pair<int, int>> pin) {
  if (pin) {
    if (pin->first < 0 || pin->first >= p.size())
      throw std::out_of_range("pin vertex not in source tree");
    if (pin->second < 0 || pin->second >= q.size())
      throw std::out_of_range("pin vertex not in target tree");
  }
  auto feas = tree_hom_feasibility(p, q);
  for (int w = 0; w < q.size(); ++w) {
    if (!feas[p.root()][w]) continue;
    if (pin && forced_image(p, q, pin->first, w) != pin->second) continue;
    return build_witness(p, q, w);
  }
  return std::nullopt;
}

namespace {

struct CQHomSearch {
  const GraphQuery& p;
  const GraphQuery& q;
  std::map<std::string, Symbol> assignment;
  std::vector<char> done;

  explicit CQHomSearch(const GraphQuery& p_, const GraphQuery& q_) : p(p_), q(q_) {
    done.assign(p.atoms().size(), 0);
  }

  bool unifiable(const Atom& pa, const Atom& qa) const {
    if (pa.relation != qa.relation || pa.arity() != qa.arity() ||
        pa.key_arity != qa.key_arity)
      return false;
    std::map<std::string, Symbol> local;
    for (int i = 0; i < pa.arity(); ++i) {
      const Symbol& s = pa.args[i];
      const Symbol& t = qa.args[i];
      if (s.is_constant()) {
        if (!(t.is_constant() && t.name == s.name)) return false;
        continue;
      }
      const Symbol* bound = nullptr;
      if (auto a = assignment.find(s.name); a != assignment.end()) bound = &a->second;
      else if (auto l = local.find(s.name); l != local.end()) bound = &l->second;
      if (bound) {
        if (*bound != t) return false;
      } else {
        local.emplace(s.name, t);
      }
    }
    return true;
  }

  void bind(const Atom& pa, const Atom& qa, std::vector<std::string>& added) {
    for (int i = 0; i < pa.arity(); ++i) {
      const Symbol& s = pa.args[i];
      if (s.is_variable() && !assignment.count(s.name)) {
        assignment.emplace(s.name, qa.args[i]);
        added.push_back(s.name);
      }
    }
  }

  int candidate_count(int i) const {
    int n = 0;
    for (const Atom& qa : q.atoms())
      if (unifiable(p.atoms()[i], qa)) ++n;
    return n;
  }

  bool solve(int remaining) {
    if (remaining == 0) return true;
    // Most-constrained atom first.
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
    done[best] = 1;
    for (const Atom& qa : q.atoms()) {
      if (!unifiable(p.atoms()[best], qa)) continue;
      std::vector<std::string> added;
      bind(p.atoms()[best], qa, added);
      if (solve(remaining - 1)) return true;
      for (const auto& v : added) assignment.erase(v);
    }
    done[best] = 0;
    return false;
  }
};

}  // namespace

std::optional<CQHomWitness> cq_hom(const GraphQuery& p, const GraphQuery& q) {
  CQHomSearch search(p, q);
  if (!search.solve(static_cast<int>(p.atoms().size()))) return std::nullopt;
  return CQHomWitness{std::move(search.assignment)};
}

GraphQuery core(const GraphQuery& q) {
  GraphQuery cur = q;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < cur.size(); ++i) {
      std::vector<int> keep;
      for (int j = 0; j < cur.size(); ++j)
        if (j != i) keep.push_back(j);
      GraphQuery smaller = cur.subquery(keep);
      if (cq_hom(cur, smaller)) {
        cur = std::move(smaller);
        changed = true;
        break;
      }
    }
  }
  return cur;
}

}  // namespace cqa
