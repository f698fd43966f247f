// Command-line surface: classify, certain, oracle, frugal, gadget, selftest.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cqa/classification.hpp"
#include "cqa/engine.hpp"
#include "cqa/gadgets.hpp"
#include "cqa/grammar.hpp"
#include "cqa/model.hpp"
#include "cqa/oracle.hpp"
#include "cqa/selftest.hpp"

namespace {

using Clock = std::chrono::steady_clock;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Literal argument, or @path for file contents.
std::string read_arg(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') return read_file(arg.substr(1));
  return arg;
}

std::string fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t oracle_cap(std::uint64_t flag_value, bool flag_given) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("CQA_ORACLE_CAP")) return std::strtoull(env, nullptr, 10);
  return cqa::kDefaultOracleCap;
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void print_timing(Clock::time_point start) {
  std::printf("timing_ms = %.3f\n", ms_since(start));
}

int cmd_classify(const std::string& query_arg, bool graph) {
  auto start = Clock::now();
  std::string text = read_arg(query_arg);
  std::printf("command = classify\n");
  std::printf("input.query = %s\n", text.c_str());
  std::printf("input.digest = %s\n", fnv1a(text).c_str());
  if (graph) {
    cqa::GraphClassification c = cqa::classify_graph(cqa::parse_graph_query(text));
    std::fputs(cqa::classification_record(c).c_str(), stdout);
  } else {
    cqa::TreeQuery q = cqa::parse_tree_query(text);
    std::fputs(cqa::classification_record(cqa::classify_tree(q), q).c_str(), stdout);
  }
  print_timing(start);
  return 0;
}

int cmd_certain(const std::string& query_arg, const std::string& db_path,
                const std::string& method, std::uint64_t cap, bool force) {
  auto start = Clock::now();
  std::string qtext = read_arg(query_arg);
  std::string dbtext = read_file(db_path);
  cqa::TreeQuery q = cqa::parse_tree_query(qtext);
  cqa::Database db = cqa::parse_database(dbtext);
  std::printf("command = certain\n");
  std::printf("input.query = %s\n", qtext.c_str());
  std::printf("input.db = %s\n", db_path.c_str());
  std::printf("input.digest = %s\n", fnv1a(qtext + "\n" + dbtext).c_str());

  cqa::CertainAnswer answer;
  if (method == "auto") {
    answer = cqa::certain(q, db, cap);
  } else {
    answer.classification = cqa::classify_tree(q);
    const auto& cond = answer.classification.conditions;
    if (method == "forward") {
      if (!cond.c1 && !force)
        throw std::runtime_error("forward method requires C1 (use --force to override)");
      answer.method = cqa::Method::ForwardOnly;
      cqa::TreeCFG g(q);
      cqa::CertMemo B = cqa::compute_B_forward(g, db);
      for (const auto& c : db.adom())
        if (B.contains(c, g.nonterminal(q.root()))) {
          answer.witness = c;
          break;
        }
      answer.value = answer.witness.has_value();
    } else if (method == "fixpoint") {
      if (!cond.c2 && !force)
        throw std::runtime_error("fixpoint method requires C2 (use --force to override)");
      answer.method = cqa::Method::Fixpoint;
      answer.witness = cqa::certain_trace_witness(q, db);
      answer.value = answer.witness.has_value();
    } else {  // oracle
      answer.method = cqa::Method::Oracle;
      answer.value = cqa::brute_certain(cqa::tree_to_graph(q), db, cap);
    }
  }
  std::printf("class = %s\n", cqa::to_string(answer.classification.cls).c_str());
  std::printf("method = %s\n", cqa::to_string(answer.method).c_str());
  std::printf("verdict = %s\n", answer.value ? "true" : "false");
  if (answer.witness) std::printf("witness = %s\n", answer.witness->c_str());
  print_timing(start);
  return answer.value ? 0 : 1;
}

int cmd_oracle(const std::string& query_arg, const std::string& db_path,
               std::uint64_t cap, bool trace) {
  auto start = Clock::now();
  std::string qtext = read_arg(query_arg);
  cqa::Database db = cqa::parse_database(read_file(db_path));
  cqa::RepairCursor cursor(db);
  std::printf("command = oracle\n");
  std::printf("input.digest = %s\n", fnv1a(qtext + "\n" + db.str()).c_str());
  std::printf("repairs = %s\n",
              cursor.overflowed() ? "overflow" : std::to_string(cursor.total()).c_str());
  bool value;
  if (trace) {
    cqa::TreeQuery q = cqa::parse_tree_query(qtext);
    auto witness = cqa::brute_certain_trace_witness(q, db, cap);
    value = witness.has_value();
    std::printf("method = oracle-trace\n");
    std::printf("verdict = %s\n", value ? "true" : "false");
    if (witness) std::printf("witness = %s\n", witness->c_str());
  } else {
    cqa::GraphQuery q = cqa::parse_graph_query(qtext);
    value = cqa::brute_certain(q, db, cap);
    std::printf("method = oracle\n");
    std::printf("verdict = %s\n", value ? "true" : "false");
  }
  print_timing(start);
  return value ? 0 : 1;
}

int cmd_frugal(const std::string& query_arg, const std::string& db_path) {
  std::string qtext = read_arg(query_arg);
  cqa::TreeQuery q = cqa::parse_tree_query(qtext);
  cqa::Database db = cqa::parse_database(read_file(db_path));
  cqa::Database repair = cqa::frugal_repair(q, db);
  std::printf("# frugal repair for %s\n", qtext.c_str());
  std::fputs(repair.str().c_str(), stdout);
  return 0;
}

void emit_instance(const cqa::Database& db, const std::string& out_path) {
  cqa::RepairCursor cursor(db);
  int inconsistent = 0;
  for (const auto& b : db.blocks()) inconsistent += b.fact_ids.size() > 1;
  if (out_path.empty()) {
    std::fputs(db.str().c_str(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << db.str();
  }
  std::printf("facts = %d\n", db.size());
  std::printf("blocks = %zu\n", db.blocks().size());
  std::printf("inconsistent_blocks = %d\n", inconsistent);
  std::printf("repairs = %s\n",
              cursor.overflowed() ? "overflow" : std::to_string(cursor.total()).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consistent query answering for rooted tree queries"};
  app.require_subcommand(1);

  // classify
  std::string cl_query;
  bool cl_graph = false;
  auto* classify = app.add_subcommand("classify", "complexity class of a query");
  classify->add_option("query", cl_query, "query text, or @file")->required();
  classify->add_flag("--graph", cl_graph, "atom-set syntax and graph classification");

  // certain
  std::string ce_query, ce_db, ce_method = "auto";
  std::uint64_t ce_cap = cqa::kDefaultOracleCap;
  bool ce_force = false;
  auto* certain = app.add_subcommand("certain", "certain answer on a database");
  certain->add_option("query", ce_query, "tree query text, or @file")->required();
  certain->add_option("db", ce_db, "fact file")->required()->check(CLI::ExistingFile);
  certain->add_option("--method", ce_method, "auto|fixpoint|forward|oracle")
      ->check(CLI::IsMember({"auto", "fixpoint", "forward", "oracle"}));
  auto* ce_cap_opt = certain->add_option("--cap", ce_cap, "repair cap for the oracle");
  certain->add_flag("--force", ce_force, "run the method despite failed conditions");

  // oracle
  std::string or_query, or_db;
  std::uint64_t or_cap = cqa::kDefaultOracleCap;
  bool or_trace = false;
  auto* oracle = app.add_subcommand("oracle", "brute-force repair enumeration");
  oracle->add_option("query", or_query, "query text, or @file")->required();
  oracle->add_option("db", or_db, "fact file")->required()->check(CLI::ExistingFile);
  auto* or_cap_opt = oracle->add_option("--cap", or_cap, "repair cap");
  oracle->add_flag("--trace", or_trace, "decide the trace problem instead");

  // frugal
  std::string fr_query, fr_db;
  auto* frugal = app.add_subcommand("frugal", "print the frugal repair");
  frugal->add_option("query", fr_query, "tree query text, or @file")->required();
  frugal->add_option("db", fr_db, "fact file")->required()->check(CLI::ExistingFile);

  // gadget
  auto* gadget = app.add_subcommand("gadget", "reduction instance generators");
  gadget->require_subcommand(1);
  std::string ga_out;

  std::string sat_query, sat_cnf, sat_pair;
  auto* gsat = gadget->add_subcommand("sat", "monotone-SAT reduction instance");
  gsat->add_option("--query", sat_query, "tree query file")->required()->check(CLI::ExistingFile);
  gsat->add_option("--cnf", sat_cnf, "formula, e.g. \"(x1|x2)&(~x1|~x2)\"")->required();
  gsat->add_option("--pair", sat_pair, "witness pair as two variables, e.g. x1,x4");
  gsat->add_option("--out", ga_out, "output fact file (default stdout)");

  std::string re_query, re_edges, re_s = "s", re_t = "t";
  auto* greach = gadget->add_subcommand("reach", "reachability reduction instance");
  greach->add_option("--query", re_query, "tree query file")->required()->check(CLI::ExistingFile);
  greach->add_option("--edges", re_edges, "edge list, e.g. \"s>u,u>t\"");
  greach->add_option("--s", re_s, "source vertex (default s)");
  greach->add_option("--t", re_t, "target vertex (default t)");
  greach->add_option("--out", ga_out, "output fact file (default stdout)");

  auto* gfig5 = gadget->add_subcommand("fig5", "the bundled 12-fact example instance");
  gfig5->add_option("--out", ga_out, "output fact file (default stdout)");

  std::string sl_query, sl_db;
  auto* gsjf = gadget->add_subcommand("sjf-lift", "lift a self-join-free instance");
  gsjf->add_option("--query", sl_query, "atom-set query file")->required()->check(CLI::ExistingFile);
  gsjf->add_option("--db", sl_db, "fact file over the renamed schema")->required()->check(CLI::ExistingFile);
  gsjf->add_option("--out", ga_out, "output fact file (default stdout)");

  // selftest
  std::uint64_t st_seed = 20240817;
  bool st_quick = false;
  auto* selftest = app.add_subcommand("selftest", "run the bundled verification suite");
  selftest->add_option("--seed", st_seed, "fuzzing seed");
  selftest->add_flag("--quick", st_quick, "reduced iteration counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*classify) return cmd_classify(cl_query, cl_graph);
    if (*certain)
      return cmd_certain(ce_query, ce_db, ce_method, oracle_cap(ce_cap, ce_cap_opt->count() > 0),
                         ce_force);
    if (*oracle)
      return cmd_oracle(or_query, or_db, oracle_cap(or_cap, or_cap_opt->count() > 0), or_trace);
    if (*frugal) return cmd_frugal(fr_query, fr_db);
    if (*gadget) {
      if (*gsat) {
        cqa::TreeQuery q = cqa::parse_tree_query(read_file(sat_query));
        cqa::MonotoneCNF cnf = cqa::parse_cnf(sat_cnf);
        cqa::Database db;
        if (sat_pair.empty()) {
          db = cqa::sat_gadget(q, cnf);
        } else {
          auto comma = sat_pair.find(',');
          if (comma == std::string::npos)
            throw std::runtime_error("--pair expects two variables, e.g. x1,x4");
          auto p = q.vertex_of_var(sat_pair.substr(0, comma));
          auto n = q.vertex_of_var(sat_pair.substr(comma + 1));
          if (!p || !n) throw std::runtime_error("--pair names an unknown variable");
          db = cqa::sat_gadget(q, *p, *n, cnf);
        }
        emit_instance(db, ga_out);
        return 0;
      }
      if (*greach) {
        cqa::TreeQuery q = cqa::parse_tree_query(read_file(re_query));
        cqa::Digraph g = cqa::parse_digraph(re_edges, re_s, re_t);
        emit_instance(cqa::reach_gadget(q, g), ga_out);
        return 0;
      }
      if (*gfig5) {
        emit_instance(cqa::fig5_instance().second, ga_out);
        return 0;
      }
      if (*gsjf) {
        cqa::GraphQuery q = cqa::parse_graph_query(read_file(sl_query));
        cqa::Database db = cqa::parse_database(read_file(sl_db));
        emit_instance(cqa::sjf_lift(q, db), ga_out);
        return 0;
      }
    }
    if (*selftest) {
      auto results = cqa::run_selftest({st_seed, st_quick});
      bool all = true;
      for (const auto& r : results) {
        std::puts(r.line().c_str());
        all = all && r.pass;
      }
      return all ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
