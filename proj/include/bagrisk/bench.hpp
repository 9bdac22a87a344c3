#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bagrisk/synth.hpp"

namespace bagrisk {

struct RunMetrics {
  std::string algorithm;  // "ve" | "jt"
  std::string phase;      // static_build | static_query | dynamic_requery
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t n_c = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds
  std::size_t max_scope = 0;
  std::uint64_t est_bytes = 0;
  bool capped = false;  // skipped or aborted by the resource cap
};

struct BenchGrid {
  Family family = Family::PseudoRandom;
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> max_parents{2};
  std::vector<std::size_t> cluster_sizes{10};  // Clustered only
  std::size_t reps = 20;
  std::uint64_t seed = 0;
  InterEdges inter_edges = InterEdges::Pairwise;
  double cap_seconds = 60.0;
  std::size_t cap_scope = 28;
  bool warmup = true;
  bool run_ve = true;
  bool run_jt = true;
};

/// Called after every finished run (progress reporting); may be empty.
using RunObserver = std::function<void(const RunMetrics&)>;

/// Per (n, m, n_c, seed): VE all marginals under a random order and, for JT,
/// the tree build (MinWeight) and calibration plus all marginals.
std::vector<RunMetrics> bench_static(const BenchGrid& grid, const RunObserver& observer = {});

/// As bench_static, then one uniformly chosen node is observed T: JT requery
/// on the cached tree and VE all marginals from scratch, both as
/// dynamic_requery rows.
std::vector<RunMetrics> bench_dynamic(const BenchGrid& grid, const RunObserver& observer = {});

struct CellSummary {
  std::string algorithm;
  std::string phase;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t n_c = 0;
  std::size_t runs = 0;
  std::size_t capped = 0;
  double mean_time = 0.0;  // over uncapped runs
  double std_time = 0.0;
  double mean_max_scope = 0.0;  // over all runs
  double std_max_scope = 0.0;
  double mean_est_bytes = 0.0;
};

std::vector<CellSummary> summarize(const std::vector<RunMetrics>& rows);

inline constexpr const char* kRunColumns = "algorithm,phase,n,m,n_c,seed,wall_time,max_scope,est_bytes,capped";

void write_runs_csv(std::ostream& out, const std::vector<RunMetrics>& rows);
void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells);

/// Writes <dir>/<stem>_runs.csv and <dir>/<stem>_summary.csv.
void emit_report(const std::vector<RunMetrics>& rows, const std::filesystem::path& dir,
                 const std::string& stem);

}  // namespace bagrisk
