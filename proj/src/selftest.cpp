#include "cqa/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "cqa/classification.hpp"
#include "cqa/engine.hpp"
#include "cqa/fuzz.hpp"
#include "cqa/gadgets.hpp"
#include "cqa/grammar.hpp"
#include "cqa/homomorphism.hpp"
#include "cqa/model.hpp"
#include "cqa/oracle.hpp"

namespace cqa {

std::string CriterionResult::line() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.0f", ms);
  return std::string(pass ? "[PASS] " : "[FAIL] ") + std::to_string(index) + ". " +
         name + ": " + detail + " (" + buf + " ms)";
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Check {
  CriterionResult result;
  Clock::time_point start = Clock::now();
  int failures = 0;
  std::string first_failure;

  Check(int index, std::string name) {
    result.index = index;
    result.name = std::move(name);
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = what;
    }
  }
  CriterionResult finish(const std::string& summary, double limit_ms) {
    result.ms = elapsed_ms(start);
    result.pass = failures == 0 && result.ms < limit_ms;
    result.detail = summary;
    if (failures > 0)
      result.detail += "; " + std::to_string(failures) + " failures, first: " + first_failure;
    else if (result.ms >= limit_ms)
      result.detail += "; exceeded time limit";
    return result;
  }
};

// Shared corpus for the engine-versus-oracle and frugal-universality checks.
struct EngineFuzzCase {
  TreeQuery q;
  Database db;
};

std::vector<EngineFuzzCase> engine_fuzz_corpus(Rng& rng, int count) {
  std::vector<EngineFuzzCase> out;
  out.reserve(count);
  TreeGenOptions topt;
  DbGenOptions dopt;
  while (static_cast<int>(out.size()) < count) {
    TreeQuery q =
        random_tree_query_where(rng, [](const TreeQuery& t) { return check_conditions(t).c2; }, topt);
    out.push_back({q, random_database(rng, q, dopt)});
  }
  return out;
}

CriterionResult golden_classification() {
  Check c(1, "golden tree classifications");
  TreeQuery q1 = parse_tree_query("C(R(A,B),R(B,A))");
  TreeQuery q2 = parse_tree_query("C(R(A,B),R(A,B))");
  c.require(classify_tree(q1).cls == ComplexityClass::CoNPComplete,
            "C(R(A,B),R(B,A)) must be coNP-complete");
  c.require(classify_tree(q2).cls == ComplexityClass::InFO,
            "C(R(A,B),R(A,B)) must be in FO");
  return c.finish("coNP-complete vs FO as expected", 1000);
}

CriterionResult fig5_reproduction() {
  Check c(2, "bundled example instance");
  auto [q1, db] = fig5_instance();
  RepairCursor cur(db);
  c.require(cur.total() == 16, "expected 16 repairs");
  GraphQuery g = tree_to_graph(q1);
  c.require(!brute_certain(g, db), "certain answer must be false");
  Database starred({
      {"C", {"c1"}, {"x1", "z-"}},
      {"C", {"c2"}, {"z+", "x2"}},
      {"R", {"x1"}, {"b", "a"}},
      {"R", {"x2"}, {"a", "b"}},
      {"R", {"z+"}, {"a", "b"}},
      {"R", {"z-"}, {"b", "a"}},
      {"A", {"a"}, {}},
      {"B", {"b"}, {}},
  });
  bool enumerated = false;
  for (std::uint64_t i = 0; i < cur.total(); ++i)
    if (cur.repair(i) == starred) enumerated = true;
  c.require(enumerated, "starred repair not enumerated");
  c.require(!eval_cq(g, starred), "starred repair must falsify the query");
  return c.finish("16 repairs; starred repair enumerated and falsifying", 1000);
}

// Has a pair of same-relation internal vertices (in either tree relation).
bool has_self_join(const TreeQuery& q) {
  std::map<std::string, int> seen;
  for (int v = 0; v < q.size(); ++v)
    if (q.internal(v) && ++seen[q.label(v).text] > 1) return true;
  return false;
}

std::pair<CriterionResult, CriterionResult> engine_oracle_and_frugal(Rng& rng, int count) {
  Check c3(3, "engine vs oracle equivalence");
  Check c4(4, "frugal repair universality");
  auto corpus = engine_fuzz_corpus(rng, count);
  int with_self_joins = 0;
  for (const auto& fc : corpus) {
    GraphQuery g = tree_to_graph(fc.q);
    with_self_joins += has_self_join(fc.q);
    bool oracle = brute_certain(g, fc.db, 1 << 20);
    bool engine = certain_trace(fc.q, fc.db);
    if (engine != oracle)
      c3.require(false, "certain_trace disagrees on q=" + fc.q.str() + " db:\n" + fc.db.str());
    Database frugal = frugal_repair(fc.q, fc.db);  // throws on incomparability
    bool frugal_sat = eval_cq(g, frugal).has_value();
    if (frugal_sat != oracle)
      c4.require(false, "frugal evaluation disagrees on q=" + fc.q.str() + " db:\n" + fc.db.str());
  }
  auto r3 = c3.finish(std::to_string(corpus.size()) + " fuzzed pairs (" +
                          std::to_string(with_self_joins) +
                          " with self-joins), 0 disagreements",
                      300000);
  auto r4 = c4.finish(std::to_string(corpus.size()) +
                          " fuzzed pairs, frugal evaluation matches the oracle",
                      300000);
  return {r3, r4};
}

CriterionResult branch_rewind_equivalence(Rng& rng, int trees) {
  Check c(5, "branch/rewind homomorphism equivalence");
  long pairs = 0;
  for (int i = 0; i < trees; ++i) {
    TreeQuery q = random_tree_query(rng, {.max_vertices = 10});
    auto feas = tree_hom_feasibility(q.tree(), q.tree());
    for (int x = 0; x < q.size(); ++x) {
      if (!q.internal(x)) continue;
      for (int y = x + 1; y < q.size(); ++y) {
        if (!q.internal(y) || q.label(y).text != q.label(x).text) continue;
        if (q.ancestor(x, y) || q.ancestor(y, x)) continue;
        ++pairs;
        bool hom_yx = tree_hom(q, rewind(q, y, x)).has_value();
        bool hom_xy = tree_hom(q, rewind(q, x, y)).has_value();
        c.require(hom_yx == static_cast<bool>(feas[y][x]),
                  "rewind/branch mismatch on " + q.str());
        c.require(hom_xy == static_cast<bool>(feas[x][y]),
                  "rewind/branch mismatch (swapped) on " + q.str());
      }
    }
  }
  return c.finish(std::to_string(trees) + " trees, " + std::to_string(pairs) +
                      " incomparable pairs, both directions",
                  120000);
}

CriterionResult preorder_totality(Rng& rng, int trees) {
  Check c(6, "preorder totality and transitivity under the branch condition");
  int used = 0;
  long checks = 0;
  for (int i = 0; i < trees; ++i) {
    TreeQuery q = random_tree_query(rng, {.max_vertices = 10});
    if (!check_conditions(q).c_branch) continue;
    ++used;
    // group atoms by label
    std::map<std::string, std::vector<int>> groups;
    for (int v : q.atom_vertices()) groups[q.label(v).text].push_back(v);
    for (const auto& [rel, atoms] : groups) {
      for (int x : atoms)
        for (int y : atoms) {
          ++checks;
          c.require(preorder_le(q, x, y) || preorder_le(q, y, x),
                    "incomparable atoms under branch condition: " + q.str());
        }
      for (int x : atoms)
        for (int y : atoms)
          for (int z : atoms) {
            if (preorder_le(q, x, y) && preorder_le(q, y, z)) {
              ++checks;
              c.require(preorder_le(q, x, z), "transitivity violated: " + q.str());
            }
          }
    }
  }
  return c.finish(std::to_string(used) + " branch-satisfying trees, " +
                      std::to_string(checks) + " pair/triple checks",
                  120000);
}

CriterionResult sat_gadget_soundness() {
  Check c(7, "monotone-SAT gadget soundness");
  TreeQuery q1 = parse_tree_query("C(R(A,B),R(B,A))");
  auto pair = find_c2_violation(q1);
  c.require(pair.has_value(), "no C2 violation found for the witness query");
  if (!pair) return c.finish("aborted", 60000);

  // All clauses over <= 3 variables: nonempty subsets of {x1,x2,x3}, both
  // polarities; formulas are clause subsets of size 1..3.
  std::vector<MonotoneCNF::Clause> clauses;
  std::vector<std::string> vars{"x1", "x2", "x3"};
  for (int mask = 1; mask < 8; ++mask) {
    for (bool positive : {true, false}) {
      MonotoneCNF::Clause cl;
      cl.positive = positive;
      for (int b = 0; b < 3; ++b)
        if (mask & (1 << b)) cl.vars.push_back(vars[b]);
      clauses.push_back(std::move(cl));
    }
  }
  int formulas = 0;
  GraphQuery graph_q1 = tree_to_graph(q1);
  auto run_formula = [&](const std::vector<int>& idx) {
    MonotoneCNF cnf;
    std::set<std::string> used_vars;
    for (int i : idx) {
      cnf.clauses.push_back(clauses[i]);
      for (const auto& v : clauses[i].vars) used_vars.insert(v);
    }
    cnf.variables.assign(used_vars.begin(), used_vars.end());
    ++formulas;
    Database db = sat_gadget(q1, pair->first, pair->second, cnf);
    bool certain = brute_certain(graph_q1, db, 1 << 20);
    c.require(certain == !cnf_satisfiable(cnf), "gadget verdict mismatch");
  };
  int n = static_cast<int>(clauses.size());
  for (int i = 0; i < n; ++i) {
    run_formula({i});
    for (int j = i + 1; j < n; ++j) {
      run_formula({i, j});
      for (int k = j + 1; k < n; ++k) run_formula({i, j, k});
    }
  }
  c.require(formulas >= 144, "expected at least 144 formulas");
  return c.finish(std::to_string(formulas) + " monotone CNFs, certain == unsatisfiable",
                  60000);
}

CriterionResult reach_gadget_soundness() {
  Check c(8, "reachability gadget soundness");
  TreeQuery rrx = parse_tree_query("R(R(X(_)))");
  auto pair = find_reach_pair(rrx);
  c.require(pair.has_value(), "no witness pair for the path query");
  if (!pair) return c.finish("aborted", 120000);
  int dags = 0, runs = 0;
  for (int k = 1; k <= 4; ++k) {
    std::vector<std::pair<int, int>> slots;
    for (int u = 0; u < k; ++u)
      for (int v = 0; v < k; ++v)
        if (u != v) slots.emplace_back(u, v);
    for (std::uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
      Digraph g;
      for (int u = 0; u < k; ++u) g.vertices.push_back("v" + std::to_string(u));
      for (std::size_t e = 0; e < slots.size(); ++e)
        if (mask & (1u << e)) g.edges.push_back(slots[e]);
      g.s = 0;
      g.t = 0;
      if (!g.acyclic()) continue;
      ++dags;
      for (int s = 0; s < k; ++s)
        for (int t = 0; t < k; ++t) {
          g.s = s;
          g.t = t;
          ++runs;
          Database db = reach_gadget(rrx, pair->first, pair->second, g);
          bool certain = brute_certain(tree_to_graph(rrx), db, 1 << 20);
          c.require(certain == !g.reachable_s_to_t(),
                    "gadget verdict mismatch on a DAG with " + std::to_string(k) +
                        " vertices");
        }
    }
  }
  return c.finish(std::to_string(dags) + " DAGs, " + std::to_string(runs) +
                      " (s,t) designations, certain == unreachable",
                  120000);
}

CriterionResult cfg_worked_example() {
  Check c(9, "grammar derivation worked example");
  TreeQuery q = parse_tree_query("A(R(R(U,_),X('c1')),R(Y(_),Z('c2',_)))");
  TreeCFG g(q);
  RelationTree accepted =
      parse_relation_tree("A(R(R(R(U,_),X('c1')),X('c1')),R(Y(_),Z('c2',_)))");
  RelationTree swapped =
      parse_relation_tree("A(R(Y(_),Z('c2',_)),R(R(R(U,_),X('c1')),X('c1')))");
  c.require(derives(g, q.root(), accepted), "worked tree must be accepted");
  c.require(!derives(g, q.root(), swapped), "child-swapped variant must be rejected");
  return c.finish("accepts the worked tree, rejects the child-swapped variant", 1000);
}

CriterionResult forward_fixpoint_agreement(Rng& rng, int count) {
  Check c(10, "forward-only and fixpoint root decisions agree under C1");
  TreeGenOptions topt;
  DbGenOptions dopt;
  int done = 0;
  while (done < count) {
    TreeQuery q =
        random_tree_query_where(rng, [](const TreeQuery& t) { return check_conditions(t).c1; }, topt);
    Database db = random_database(rng, q, dopt);
    TreeCFG g(q);
    CertMemo fix = compute_B(g, db);
    CertMemo fwd = compute_B_forward(g, db);
    int root_nt = g.nonterminal(q.root());
    for (const auto& cst : db.adom())
      c.require(fix.contains(cst, root_nt) == fwd.contains(cst, root_nt),
                "root decision differs for constant " + cst + " on q=" + q.str());
    ++done;
  }
  return c.finish(std::to_string(done) + " fuzzed C1 pairs, per-constant root decisions",
                  120000);
}

CriterionResult graph_classification_examples() {
  Check c(11, "graph query classification examples");
  auto cls = [](const char* text) {
    return classify_graph(parse_graph_query(text)).overall;
  };
  c.require(cls("R(x; z), S(y; z)") == ComplexityClass::CoNPComplete,
            "R(x; z), S(y; z) must be coNP-complete");
  c.require(cls("R(x; y, z), R(z; x, y)") == ComplexityClass::LHardNotFOUpperOpen,
            "R(x; y, z), R(z; x, y) must land in the L-hard bucket");
  c.require(cls("R(x; z), R(y; z)") == ComplexityClass::InFO,
            "R(x; z), R(y; z) must be FO after core minimization");
  // The coNP case is backed by a strong cycle in the attack graph.
  AttackGraph ag = attack_graph(parse_graph_query("R(x; z), S(y; z)"));
  c.require(ag.attacks(0, 1) && ag.attacks(1, 0) && ag.has_strong_cycle(),
            "expected a mutual strong attack");
  return c.finish("coNP-complete / L-hard bucket / FO after core", 5000);
}

}  // namespace

std::vector<CriterionResult> run_selftest(const SelftestOptions& opt) {
  Rng rng(opt.seed);
  int fuzz34 = opt.quick ? 400 : 5000;
  int trees5 = opt.quick ? 300 : 2000;
  int fuzz10 = opt.quick ? 200 : 1500;

  std::vector<CriterionResult> out;
  out.push_back(golden_classification());
  out.push_back(fig5_reproduction());
  auto [r3, r4] = engine_oracle_and_frugal(rng, fuzz34);
  out.push_back(r3);
  out.push_back(r4);
  out.push_back(branch_rewind_equivalence(rng, trees5));
  out.push_back(preorder_totality(rng, trees5));
  out.push_back(sat_gadget_soundness());
  out.push_back(reach_gadget_soundness());
  out.push_back(cfg_worked_example());
  out.push_back(forward_fixpoint_agreement(rng, fuzz10));
  out.push_back(graph_classification_examples());
  return out;
}

}  // namespace cqa
