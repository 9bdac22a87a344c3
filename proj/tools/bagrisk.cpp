#include <CLI11.hpp>
#include <httplib.h>

#include <charconv>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bagrisk/bench.hpp"
#include "bagrisk/bp.hpp"
#include "bagrisk/errors.hpp"
#include "bagrisk/graph_io.hpp"
#include "bagrisk/jt.hpp"
#include "bagrisk/ordering.hpp"
#include "bagrisk/service.hpp"
#include "bagrisk/synth.hpp"
#include "bagrisk/ve.hpp"

namespace fs = std::filesystem;
using namespace bagrisk;

namespace {

std::size_t to_size(const std::string& text) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw CLI::ValidationError("not a non-negative integer: " + text);
  return value;
}

// "2,3,4" -> {2,3,4}
std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(to_size(item));
  }
  return out;
}

// "10..220" with a step, or a plain comma list.
std::vector<std::size_t> parse_range(const std::string& text, std::size_t step) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return parse_list(text);
  const std::size_t lo = to_size(text.substr(0, dots));
  const std::size_t hi = to_size(text.substr(dots + 2));
  if (step == 0) throw CLI::ValidationError("--step must be positive");
  std::vector<std::size_t> out;
  for (std::size_t n = lo; n <= hi; n += step) out.push_back(n);
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw BagError(ErrorCode::ParseError, "cannot write " + path);
  out << text;
}

Heuristic heuristic_or_throw(const std::string& name) {
  const auto h = parse_heuristic(name);
  if (!h) throw CLI::ValidationError("unknown --order " + name);
  return *h;
}

struct GenArgs {
  std::size_t nodes = 10;
  std::size_t max_parents = 2;
  std::size_t cluster_size = 10;
  std::uint64_t seed = 0;
  std::string inter_edges = "pairwise";
  std::string out;
};

int run_gen(Family family, const GenArgs& a) {
  GenSpec spec;
  spec.family = family;
  spec.n = a.nodes;
  spec.m = a.max_parents;
  spec.seed = a.seed;
  if (family == Family::Clustered) {
    spec.n_c = a.cluster_size;
    const auto ie = parse_inter_edges(a.inter_edges);
    if (!ie) throw CLI::ValidationError("unknown --inter-edges " + a.inter_edges);
    spec.inter_edges = *ie;
  }
  write_output(a.out, write_graph(generate(spec)));
  return 0;
}

struct AnalyzeArgs {
  std::string graph;
  std::string algorithm = "jt";
  std::string order = "min-weight";
  std::uint64_t seed = 0;
  std::string evidence;
  bool mpe = false;
};

int run_analyze(const AnalyzeArgs& a) {
  using clock = std::chrono::steady_clock;
  const BagGraph g = load_graph(a.graph);
  const EvidenceSet evidence = a.evidence.empty() ? EvidenceSet{} : load_evidence(a.evidence, g);
  OrderSpec spec{heuristic_or_throw(a.order), a.seed, std::nullopt};

  std::vector<double> marginals;
  std::vector<std::pair<std::string, std::string>> metrics;
  auto metric = [&metrics](const std::string& k, auto v) {
    std::ostringstream s;
    s << v;
    metrics.emplace_back(k, s.str());
  };

  const auto start = clock::now();
  if (a.algorithm == "ve") {
    const VeSweep sweep = ve_all_marginals(g, evidence, spec);
    marginals = sweep.marginals;
    metric("max_scope", sweep.max_scope);
    metric("peak_table_bytes", sweep.peak_table_bytes);
  } else if (a.algorithm == "bp") {
    BpEngine engine(build_factor_graph(g));
    marginals = engine.marginals(evidence);
    metric("factor_count", engine.graph().factor_count());
    metric("messages", engine.messages_last_pass());
  } else if (a.algorithm == "jt") {
    JunctionTree jt(g, JunctionTree::Options{spec, kDefaultMaxScope});
    jt.calibrate(evidence);
    marginals = jt.all_marginals();
    const JtMetrics m = jt.metrics();
    metric("factor_count", m.factor_count);
    metric("max_scope", m.max_scope);
    metric("est_bytes", m.est_bytes);
    metric("build_seconds", m.build_seconds);
    metric("calibrate_seconds", m.calibrate_seconds);
    metric("messages", jt.counters().messages);
  } else {
    throw CLI::ValidationError("unknown --algorithm " + a.algorithm);
  }
  metric("wall_seconds", std::chrono::duration<double>(clock::now() - start).count());

  std::printf("node,label,probability,evidence\n");
  for (NodeId v = 0; v < g.size(); ++v) {
    const auto it = evidence.find(v);
    const char* observed = it == evidence.end() ? "" : (it->second ? "T" : "F");
    std::printf("%zu,%s,%.12f,%s\n", static_cast<std::size_t>(v), g.node(v).label.c_str(), marginals[v],
                observed);
  }
  std::printf("\nmetric,value\n");
  std::printf("algorithm,%s\norder,%s\n", a.algorithm.c_str(), a.order.c_str());
  for (const auto& [k, v] : metrics) std::printf("%s,%s\n", k.c_str(), v.c_str());

  if (a.mpe) {
    const EvidenceSet best = ve_mpe(g, evidence, spec);
    std::printf("\nmpe_node,label,state\n");
    for (const auto& [v, value] : best) {
      std::printf("%zu,%s,%s\n", static_cast<std::size_t>(v), g.node(v).label.c_str(), value ? "T" : "F");
    }
  }
  return 0;
}

struct BenchArgs {
  std::string mode;
  std::string family = "random";
  std::string nodes = "10..50";
  std::size_t step = 10;
  std::string max_parents = "2";
  std::string cluster_size = "10";
  std::size_t reps = 20;
  std::uint64_t seed = 0;
  std::string inter_edges = "pairwise";
  double cap_seconds = 60.0;
  std::size_t cap_scope = 28;
  bool no_warmup = false;
  std::string out = ".";
  bool quiet = false;
};

int run_bench(const BenchArgs& a) {
  BenchGrid grid;
  const auto family = parse_family(a.family);
  if (!family) throw CLI::ValidationError("unknown --family " + a.family);
  const auto ie = parse_inter_edges(a.inter_edges);
  if (!ie) throw CLI::ValidationError("unknown --inter-edges " + a.inter_edges);
  grid.family = *family;
  grid.nodes = parse_range(a.nodes, a.step);
  grid.max_parents = parse_list(a.max_parents);
  grid.cluster_sizes = parse_list(a.cluster_size);
  grid.reps = a.reps;
  grid.seed = a.seed;
  grid.inter_edges = *ie;
  grid.cap_seconds = a.cap_seconds;
  grid.cap_scope = a.cap_scope;
  grid.warmup = !a.no_warmup;

  RunObserver progress;
  if (!a.quiet) {
    progress = [](const RunMetrics& r) {
      std::fprintf(stderr, "%s %-15s n=%-4zu m=%zu n_c=%-3zu seed=%-6llu %10.6fs scope=%zu%s\n",
                   r.algorithm.c_str(), r.phase.c_str(), r.n, r.m, r.n_c,
                   static_cast<unsigned long long>(r.seed), r.wall_time, r.max_scope,
                   r.capped ? " capped" : "");
    };
  }
  const auto rows = a.mode == "static" ? bench_static(grid, progress) : bench_dynamic(grid, progress);
  fs::create_directories(a.out);
  const std::string stem = a.mode + "_" + a.family;
  emit_report(rows, a.out, stem);
  std::printf("%zu runs written to %s/%s_runs.csv\n", rows.size(), a.out.c_str(), stem.c_str());
  return 0;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int run_serve(const std::string& host, int port, const std::string& snapshots) {
  RiskService::Options options;
  if (!snapshots.empty()) options.snapshot_dir = snapshots;
  RiskService service(options);
  httplib::Server server;
  mount_routes(server, service);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::fprintf(stderr, "listening on %s:%d (%zu restored sessions)\n", host.c_str(), port,
               service.session_count());
  if (!server.listen(host, port)) {
    std::fprintf(stderr, "cannot bind %s:%d\n", host.c_str(), port);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian attack graph risk analysis"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic graph document");
  gen->require_subcommand(1);
  GenArgs gen_random_args, gen_cluster_args;
  auto* gen_random_cmd = gen->add_subcommand("random", "pseudo-random DAG");
  gen_random_cmd->add_option("--nodes", gen_random_args.nodes)->required();
  gen_random_cmd->add_option("--max-parents", gen_random_args.max_parents)->required();
  gen_random_cmd->add_option("--seed", gen_random_args.seed);
  gen_random_cmd->add_option("--out", gen_random_args.out, "output file (stdout if omitted)");
  auto* gen_cluster_cmd = gen->add_subcommand("cluster", "clusters of random DAGs");
  gen_cluster_cmd->add_option("--nodes", gen_cluster_args.nodes)->required();
  gen_cluster_cmd->add_option("--cluster-size", gen_cluster_args.cluster_size)->required();
  gen_cluster_cmd->add_option("--max-parents", gen_cluster_args.max_parents)->required();
  gen_cluster_cmd->add_option("--seed", gen_cluster_args.seed);
  gen_cluster_cmd->add_option("--inter-edges", gen_cluster_args.inter_edges, "pairwise | sparse");
  gen_cluster_cmd->add_option("--out", gen_cluster_args.out, "output file (stdout if omitted)");

  // analyze
  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "marginals (or posteriors) of every node");
  analyze->add_option("--graph", analyze_args.graph)->required()->check(CLI::ExistingFile);
  analyze->add_option("--algorithm", analyze_args.algorithm, "ve | bp | jt")
      ->check(CLI::IsMember({"ve", "bp", "jt"}));
  analyze->add_option("--order", analyze_args.order,
                      "random | min-neighbours | min-fill | min-weight | weighted-min-fill");
  analyze->add_option("--seed", analyze_args.seed, "seed for the random order");
  analyze->add_option("--evidence", analyze_args.evidence, "evidence document")->check(CLI::ExistingFile);
  analyze->add_flag("--mpe", analyze_args.mpe, "also print the most probable explanation");

  // bench
  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "timing and memory benchmark grid");
  bench->add_option("mode", bench_args.mode, "static | dynamic")
      ->required()
      ->check(CLI::IsMember({"static", "dynamic"}));
  bench->add_option("--family", bench_args.family, "random | cluster");
  bench->add_option("--nodes", bench_args.nodes, "LO..HI or a comma list");
  bench->add_option("--step", bench_args.step);
  bench->add_option("--max-parents", bench_args.max_parents, "comma list");
  bench->add_option("--cluster-size", bench_args.cluster_size, "comma list");
  bench->add_option("--reps", bench_args.reps);
  bench->add_option("--seed", bench_args.seed);
  bench->add_option("--inter-edges", bench_args.inter_edges, "pairwise | sparse");
  bench->add_option("--cap-seconds", bench_args.cap_seconds, "per-run wall-time ceiling");
  bench->add_option("--cap-scope", bench_args.cap_scope, "largest factor scope attempted");
  bench->add_flag("--no-warmup", bench_args.no_warmup);
  bench->add_flag("--quiet", bench_args.quiet);
  bench->add_option("--out", bench_args.out, "output directory");

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string snapshots;
  auto* serve = app.add_subcommand("serve", "HTTP risk service");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--snapshots", snapshots, "session snapshot directory");

  // transforms
  std::string split_graph, split_node, split_out;
  auto* split = app.add_subcommand("split", "replace an initial node by one copy per child");
  split->add_option("--graph", split_graph)->required()->check(CLI::ExistingFile);
  split->add_option("--node", split_node, "id or label")->required();
  split->add_option("--out", split_out);

  std::string zd_graph, zd_out;
  double zd_p = 0.01;
  auto* zero_day = app.add_subcommand("zero-day", "add a zero-day source node");
  zero_day->add_option("--graph", zd_graph)->required()->check(CLI::ExistingFile);
  zero_day->add_option("--p", zd_p, "exploit probability of each added edge");
  zero_day->add_option("--out", zd_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_random_cmd->parsed()) return run_gen(Family::PseudoRandom, gen_random_args);
    if (gen_cluster_cmd->parsed()) return run_gen(Family::Clustered, gen_cluster_args);
    if (analyze->parsed()) return run_analyze(analyze_args);
    if (bench->parsed()) return run_bench(bench_args);
    if (serve->parsed()) return run_serve(host, port, snapshots);
    if (split->parsed()) {
      const BagGraph g = load_graph(split_graph);
      auto node = g.find_label(split_node);
      if (!node && !split_node.empty() &&
          split_node.find_first_not_of("0123456789") == std::string::npos) {
        node = static_cast<NodeId>(to_size(split_node));
      }
      if (!node || !g.contains(*node)) throw BagError(ErrorCode::UnknownNode, "no node " + split_node);
      write_output(split_out, write_graph(split_initial_node(g, *node)));
      return 0;
    }
    if (zero_day->parsed()) {
      write_output(zd_out, write_graph(augment_zero_day(load_graph(zd_graph), zd_p)));
      return 0;
    }
  } catch (const BagError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
