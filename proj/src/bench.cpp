#include "bagrisk/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include "bagrisk/errors.hpp"
#include "bagrisk/jt.hpp"
#include "bagrisk/ordering.hpp"
#include "bagrisk/rng.hpp"
#include "bagrisk/ve.hpp"

namespace bagrisk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Cell {
  std::size_t n;
  std::size_t m;
  std::size_t n_c;
};

std::vector<Cell> cells_of(const BenchGrid& grid) {
  std::vector<Cell> cells;
  for (std::size_t n : grid.nodes) {
    for (std::size_t m : grid.max_parents) {
      if (grid.family == Family::PseudoRandom) {
        cells.push_back({n, m, 0});
        continue;
      }
      for (std::size_t c : grid.cluster_sizes) {
        if (c > 0 && n % c == 0) cells.push_back({n, m, c});
      }
    }
  }
  return cells;
}

GenSpec spec_for(const BenchGrid& grid, const Cell& cell, std::uint64_t seed) {
  GenSpec spec;
  spec.family = grid.family;
  spec.n = cell.n;
  spec.m = cell.m;
  spec.n_c = cell.n_c;
  spec.seed = seed;
  spec.inter_edges = grid.inter_edges;
  return spec;
}

class Runner {
 public:
  Runner(const BenchGrid& grid, const Cell& cell, std::uint64_t seed)
      : grid_(grid), base_{"", "", cell.n, cell.m, cell.n_c, seed, 0.0, 0, 0, false} {}

  RunMetrics row(const char* algorithm, const char* phase) const {
    RunMetrics r = base_;
    r.algorithm = algorithm;
    r.phase = phase;
    return r;
  }

  RunMetrics ve(const BagGraph& g, const EvidenceSet& evidence, const char* phase) const {
    RunMetrics r = row("ve", phase);
    const OrderSpec spec{Heuristic::Random, base_.seed, std::nullopt};
    std::set<NodeId> keep;
    for (const auto& [id, value] : evidence) keep.insert(id);
    const auto order = resolve_order(g, spec, keep);
    const std::size_t predicted = max_scope_of(g, order);
    if (predicted > grid_.cap_scope) {
      r.capped = true;
      r.max_scope = predicted;
      r.est_bytes = table_bytes(predicted);
      return r;
    }
    VeOptions options;
    options.max_scope = grid_.cap_scope;
    const auto start = Clock::now();
    options.deadline = start + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(grid_.cap_seconds));
    try {
      const VeSweep sweep = ve_all_marginals(g, evidence, spec, options);
      r.wall_time = seconds_since(start);
      r.max_scope = sweep.max_scope;
      r.est_bytes = sweep.peak_table_bytes;
    } catch (const BagError& e) {
      if (e.code() != ErrorCode::ResourceCap && e.code() != ErrorCode::ScopeOverflow) throw;
      r.wall_time = seconds_since(start);
      r.capped = true;
      r.max_scope = predicted;
      r.est_bytes = table_bytes(predicted);
    }
    return r;
  }

  // Returns build and query rows; `engine` receives the tree when it fits.
  std::pair<RunMetrics, RunMetrics> jt_static(const BagGraph& g, std::optional<JunctionTree>& engine) const {
    RunMetrics build = row("jt", "static_build");
    RunMetrics query = row("jt", "static_query");
    JunctionTree::Options options;
    options.max_scope = grid_.cap_scope;
    auto start = Clock::now();
    try {
      engine.emplace(g, options);
    } catch (const BagError& e) {
      if (e.code() != ErrorCode::ScopeOverflow) throw;
      const CliqueTree tree = build_clique_tree(g);
      for (RunMetrics* r : {&build, &query}) {
        r->capped = true;
        r->max_scope = tree.max_factor_scope();
        r->est_bytes = tree.estimated_bytes();
      }
      return {build, query};
    }
    build.wall_time = seconds_since(start);
    start = Clock::now();
    engine->calibrate({});
    const auto marginals = engine->all_marginals();
    query.wall_time = seconds_since(start);
    (void)marginals;
    const JtMetrics m = engine->metrics();
    for (RunMetrics* r : {&build, &query}) {
      r->max_scope = m.max_scope;
      r->est_bytes = m.est_bytes;
    }
    return {build, query};
  }

 private:
  const BenchGrid& grid_;
  RunMetrics base_;
};

template <typename RunFn>
std::vector<RunMetrics> run_grid(const BenchGrid& grid, const RunObserver& observer, RunFn run) {
  std::vector<RunMetrics> rows;
  for (const Cell& cell : cells_of(grid)) {
    if (grid.warmup && grid.reps > 0) {
      std::vector<RunMetrics> discard;
      run(cell, grid.seed, discard);
    }
    for (std::size_t r = 0; r < grid.reps; ++r) {
      const std::size_t before = rows.size();
      run(cell, grid.seed + r, rows);
      if (observer) {
        for (std::size_t i = before; i < rows.size(); ++i) observer(rows[i]);
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<RunMetrics> bench_static(const BenchGrid& grid, const RunObserver& observer) {
  return run_grid(grid, observer, [&grid](const Cell& cell, std::uint64_t seed, std::vector<RunMetrics>& out) {
    const BagGraph g = generate(spec_for(grid, cell, seed));
    const Runner runner(grid, cell, seed);
    if (grid.run_ve) out.push_back(runner.ve(g, {}, "static_query"));
    if (grid.run_jt) {
      std::optional<JunctionTree> engine;
      auto [build, query] = runner.jt_static(g, engine);
      out.push_back(build);
      out.push_back(query);
    }
  });
}

std::vector<RunMetrics> bench_dynamic(const BenchGrid& grid, const RunObserver& observer) {
  return run_grid(grid, observer, [&grid](const Cell& cell, std::uint64_t seed, std::vector<RunMetrics>& out) {
    const BagGraph g = generate(spec_for(grid, cell, seed));
    const Runner runner(grid, cell, seed);
    Rng pick(seed ^ 0x9e3779b97f4a7c15ULL);
    const EvidenceSet evidence{{static_cast<NodeId>(pick.below(g.size())), true}};
    if (grid.run_jt) {
      std::optional<JunctionTree> engine;
      auto [build, query] = runner.jt_static(g, engine);
      out.push_back(build);
      out.push_back(query);
      RunMetrics dyn = runner.row("jt", "dynamic_requery");
      dyn.max_scope = build.max_scope;
      dyn.est_bytes = build.est_bytes;
      dyn.capped = build.capped;
      if (engine) {
        const auto start = Clock::now();
        engine->requery(evidence);
        dyn.wall_time = seconds_since(start);
      }
      out.push_back(dyn);
    }
    if (grid.run_ve) out.push_back(runner.ve(g, evidence, "dynamic_requery"));
  });
}

std::vector<CellSummary> summarize(const std::vector<RunMetrics>& rows) {
  using Key = std::tuple<std::string, std::string, std::size_t, std::size_t, std::size_t>;
  std::map<Key, std::vector<const RunMetrics*>> groups;
  std::vector<Key> order;
  for (const auto& r : rows) {
    Key key{r.algorithm, r.phase, r.n, r.m, r.n_c};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  auto mean_std = [](const std::vector<double>& xs) -> std::pair<double, double> {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0};
  };
  std::vector<CellSummary> out;
  for (const auto& key : order) {
    const auto& runs = groups[key];
    CellSummary s{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), std::get<4>(key)};
    s.runs = runs.size();
    std::vector<double> times;
    std::vector<double> scopes;
    double bytes = 0.0;
    for (const RunMetrics* r : runs) {
      if (r->capped) {
        ++s.capped;
      } else {
        times.push_back(r->wall_time);
      }
      scopes.push_back(static_cast<double>(r->max_scope));
      bytes += static_cast<double>(r->est_bytes);
    }
    std::tie(s.mean_time, s.std_time) = mean_std(times);
    std::tie(s.mean_max_scope, s.std_max_scope) = mean_std(scopes);
    s.mean_est_bytes = bytes / static_cast<double>(runs.size());
    out.push_back(std::move(s));
  }
  return out;
}

void write_runs_csv(std::ostream& out, const std::vector<RunMetrics>& rows) {
  out << kRunColumns << '\n';
  out.precision(9);
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.phase << ',' << r.n << ',' << r.m << ',' << r.n_c << ',' << r.seed << ','
        << r.wall_time << ',' << r.max_scope << ',' << r.est_bytes << ',' << (r.capped ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "algorithm,phase,n,m,n_c,runs,capped,mean_time,std_time,mean_max_scope,std_max_scope,mean_est_bytes\n";
  out.precision(9);
  for (const auto& c : cells) {
    out << c.algorithm << ',' << c.phase << ',' << c.n << ',' << c.m << ',' << c.n_c << ',' << c.runs << ','
        << c.capped << ',' << c.mean_time << ',' << c.std_time << ',' << c.mean_max_scope << ','
        << c.std_max_scope << ',' << c.mean_est_bytes << '\n';
  }
}

void emit_report(const std::vector<RunMetrics>& rows, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ofstream runs(dir / (stem + "_runs.csv"));
  std::ofstream summary(dir / (stem + "_summary.csv"));
  if (!runs || !summary) throw BagError(ErrorCode::InvalidSpec, "cannot write report into " + dir.string());
  write_runs_csv(runs, rows);
  write_summary_csv(summary, summarize(rows));
}

}  // namespace bagrisk
