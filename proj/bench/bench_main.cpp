// Serial versus OpenMP comparison for the two data-parallel kernels: the
// brute-force repair scan and the fixpoint saturation.

#include <benchmark/benchmark.h>

#include "cqa/engine.hpp"
#include "cqa/fuzz.hpp"
#include "cqa/gadgets.hpp"
#include "cqa/model.hpp"
#include "cqa/oracle.hpp"

namespace {

// SAT gadget instances scale the repair space as 2^(variables + clauses).
cqa::Database sat_instance(int vars) {
  cqa::TreeQuery q1 = cqa::parse_tree_query("C(R(A,B),R(B,A))");
  cqa::MonotoneCNF cnf;
  for (int i = 0; i < vars; ++i) cnf.variables.push_back("z" + std::to_string(i));
  for (int i = 0; i < vars; ++i) {
    cqa::MonotoneCNF::Clause pos{true, {cnf.variables[i], cnf.variables[(i + 1) % vars]}};
    cnf.clauses.push_back(pos);
  }
  return cqa::sat_gadget(q1, cnf);
}

void bench_oracle_serial(benchmark::State& state) {
  cqa::TreeQuery q1 = cqa::parse_tree_query("C(R(A,B),R(B,A))");
  cqa::GraphQuery g = cqa::tree_to_graph(q1);
  cqa::Database db = sat_instance(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(cqa::brute_certain_serial(g, db, UINT64_MAX));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(cqa::RepairCursor(db).total()));
}

void bench_oracle_parallel(benchmark::State& state) {
  cqa::TreeQuery q1 = cqa::parse_tree_query("C(R(A,B),R(B,A))");
  cqa::GraphQuery g = cqa::tree_to_graph(q1);
  cqa::Database db = sat_instance(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(cqa::brute_certain_parallel(g, db, UINT64_MAX));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(cqa::RepairCursor(db).total()));
}

// A long chain database drives many fixpoint rounds.
cqa::Database chain_instance(int length) {
  std::vector<cqa::Fact> facts;
  for (int i = 0; i < length; ++i) {
    std::string a = "n" + std::to_string(i), b = "n" + std::to_string(i + 1);
    facts.push_back({"R", {a}, {b}});
    facts.push_back({"R", {a}, {b + "x"}});
    facts.push_back({"R", {b + "x"}, {b}});
  }
  facts.push_back({"X", {"n" + std::to_string(length)}, {"end"}});
  return cqa::Database(std::move(facts));
}

void bench_fixpoint_worklist(benchmark::State& state) {
  cqa::TreeQuery q = cqa::parse_tree_query("R(R(X(_)))");
  cqa::TreeCFG g(q);
  cqa::Database db = chain_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cqa::compute_B(g, db).size());
}

void bench_fixpoint_rounds_parallel(benchmark::State& state) {
  cqa::TreeQuery q = cqa::parse_tree_query("R(R(X(_)))");
  cqa::TreeCFG g(q);
  cqa::Database db = chain_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cqa::compute_B_rounds_parallel(g, db).size());
}

}  // namespace

BENCHMARK(bench_oracle_serial)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_oracle_parallel)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_fixpoint_worklist)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_fixpoint_rounds_parallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
