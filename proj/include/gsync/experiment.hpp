#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsync/certificate.hpp"
#include "gsync/graph.hpp"
#include "gsync/instance.hpp"
#include "gsync/kuramoto.hpp"
#include "gsync/solver.hpp"

namespace gsync {

struct OutputPaths {
  std::string csv;
  std::string svg_dir;
  std::string json;
  std::string instance;
  std::string point;
  std::string trajectory_dir;
};

struct ExperimentConfig {
  GraphParams graph;
  Index r = 1;
  Field field = Field::real;
  std::vector<Index> p{3};
  std::vector<double> sigma{0.0};
  int trials = 1;
  std::uint64_t seed = 0;

  SolveOptions solver;
  InitKind init = InitKind::random;

  FlowOptions flow;
  /// "random" or "twisted".
  std::string flow_init = "random";
  Index twist_q = 1;

  /// Measurements file for solve/certify (generated from the fields above
  /// when empty).
  std::string instance_path;
  InstanceFormat instance_format = InstanceFormat::edge_measurements;
  /// Point file for certify, or the initial point when init is "given".
  std::string point_path;

  OutputPaths output;

  /// Throws ParameterError.
  void validate() const;
};

/// Unknown keys are rejected. Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

nlohmann::json to_json(const CertificateReport& c);
nlohmann::json to_json(const TheoryBounds& b);
template <typename S>
nlohmann::json to_json(const SolveReport<S>& r);

/// Worker count: SYNC_THREADS if set and positive, capped by the OpenMP
/// maximum; otherwise the OpenMP maximum.
int worker_threads();

// ---- sweep --------------------------------------------------------------

struct TrialOutcome {
  double corr = 0.0;
  Index rank = 0;
  double time_s = 0.0;
  long iterations = 0;
  bool certified = false;
  bool failed = false;
};

struct SweepRow {
  double sigma = 0.0;
  Index p = 0;
  double corr_mean = 0.0;
  double rank_r_frac = 0.0;
  double rank_def_frac = 0.0;
  double time_mean_s = 0.0;
  double iters_mean = 0.0;
  double certified_frac = 0.0;
};

/// Per-trial seeds for the sweep cell (p_idx, sigma_idx, trial).
struct TrialSeeds {
  std::uint64_t truth, noise, init;
};
TrialSeeds trial_seeds(std::uint64_t base, std::size_t p_idx, std::size_t sigma_idx, int trial);

/// Detailed per-trial record, kept for property checks.
struct TrialRecord {
  std::size_t p_idx = 0, sigma_idx = 0;
  int trial = 0;
  TrialOutcome outcome;
  std::optional<CertificateReport> certificate;
  std::optional<TheoryBounds> bounds;
  double corr_raw = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // p-major, then sigma
  std::vector<TrialRecord> trials;
};

/// Full factorial over (p, sigma) x trials, executed on `threads` workers
/// and aggregated in cell order. A failed trial makes its cell's means NaN.
SweepResult run_sweep(const ExperimentConfig& cfg, int threads);

/// Columns sigma,p,corr_mean,rank_r_frac,rank_def_frac,time_mean_s,iters_mean,certified_frac.
/// With include_timing = false the time column is written empty.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool include_timing = true);

/// One chart per metric (metric vs sigma, a series per p) into dir.
/// Returns the written paths.
std::vector<std::string> write_sweep_svgs(const std::string& dir, const std::vector<SweepRow>& rows);

// ---- flow ---------------------------------------------------------------

struct FlowTrialResult {
  Index p = 0;
  int trial = 0;
  std::string termination;
  double final_sync_error = 0.0;
  /// NaN unless synchronized.
  double time_to_sync = 0.0;
  long steps = 0;
  std::vector<FlowSample> samples;
};

std::vector<FlowTrialResult> run_flow(const ExperimentConfig& cfg, int threads);

/// Columns p,trial,termination,final_sync_error,time_to_sync,steps.
void write_flow_csv(std::ostream& out, const std::vector<FlowTrialResult>& trials);

// ---- selftest -----------------------------------------------------------

struct SelftestCheck {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Embedded invariant suite at fixed seeds. Every tolerance is multiplied by
/// tolerance_scale; a check passes when error < tolerance.
std::vector<SelftestCheck> run_selftest(double tolerance_scale = 1.0);

}  // namespace gsync
