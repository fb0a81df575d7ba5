#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stochagg/model.hpp"
#include "stochagg/stepper.hpp"

namespace stochagg {

inline constexpr int kDefaultQ0 = 5;
// Salt for the per-path initial-perturbation stream, disjoint from increment streams.
inline constexpr std::uint64_t kInitStreamSalt = 0x1D1A7C0DEull;

struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single sample
  double min = 0.0;
  double max = 0.0;
};

// Deterministic ordered reduction. Variance is computed on values shifted by
// the first sample, so identical samples give exactly zero.
SampleStats sample_stats(const std::vector<double>& xs);

struct EnsembleTimeStats {
  double t = 0.0;
  SampleStats mass;
  SampleStats l2_sq;
  SampleStats min_u;
  SampleStats max_u;
};

struct EnsembleStats {
  std::vector<EnsembleTimeStats> per_time;
  // Mean over paths of sup_t ||u||^2_L2 (record times, or every step when enabled).
  double sup_l2_sq_mean = 0.0;
  // Mean over paths of (sup_t ||u||_L2)^q0.
  double sup_l2_q0_moment = 0.0;
  // Mean over paths of (int_0^T ||grad A(u)||^2 dt)^(q0/2).
  double grad_A_q0_moment = 0.0;
  double grad_A_integral_mean = 0.0;
  int q0 = kDefaultQ0;
  bool sup_every_step = false;
  std::size_t path_count = 0;
  std::size_t failed_count = 0;
  std::uint64_t bound_violations = 0;
  std::uint64_t node_steps = 0;

  std::size_t success_count() const { return path_count - failed_count; }
  // More than 10% of paths blew up.
  bool failed() const { return failed_count * 10 > path_count; }
};

struct EnsembleOptions {
  std::size_t n_paths = 8;
  unsigned workers = 1;
  bool keep_paths = false;
  int q0 = kDefaultQ0;
  bool sup_every_step = false;
};

// Per-path summary retained after the reduction.
struct PathSummary {
  std::size_t index = 0;
  std::vector<DiagnosticsRow> records;
  std::optional<BlowUpReport> blowup;
  double sup_l2_sq = 0.0;
  double grad_A_integral = 0.0;
  BoundViolationSummary bounds;
  std::optional<PathResult> full;  // only with keep_paths
};

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<PathSummary> paths;
};

using SinkFactory = std::function<std::vector<std::unique_ptr<PathSink>>(std::size_t path_index)>;

// Initial field of one path: u0, perturbed with the path's init stream when perturb_delta > 0.
Field path_initial_condition(const Field& u0, const ModelSpec& spec, const RunConfig& config, std::size_t path);

// Runs n_paths independent paths (streams derive_stream(seed, path)) on `workers`
// threads. Results do not depend on the worker count.
EnsembleResult run_ensemble(const ModelSpec& spec, const Field& u0, const RunConfig& config,
                            const EnsembleOptions& options, const SinkFactory& sinks = {});

struct MassCurveRow {
  double t = 0.0;
  double mean_a = 0.0;
  double std_a = 0.0;
  double mean_b = 0.0;
  double std_b = 0.0;
  double diff = 0.0;  // mean_b - mean_a
};

// Throws std::invalid_argument when the record times differ.
std::vector<MassCurveRow> mass_curve_compare(const EnsembleStats& a, const EnsembleStats& b);
std::string mass_curve_csv(const std::vector<MassCurveRow>& rows);

struct NamedStats {
  std::string name;
  const EnsembleStats* stats;
};
// t, then <name>_mean,<name>_std for each series.
std::string mass_curves_csv(const std::vector<NamedStats>& series);

std::string ensemble_stats_csv(const EnsembleStats& stats);

}  // namespace stochagg
