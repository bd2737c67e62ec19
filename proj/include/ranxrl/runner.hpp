#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranxrl/config.hpp"
#include "ranxrl/slicing_env.hpp"

namespace ranxrl {

enum class Mode { rl, xrl };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode mode);

struct SliceSummary {
  std::string name;
  double mean_env_reward = 0.0;
  double mean_latency_s = 0.0;
  double median_latency_s = 0.0;
  double mean_dropped_bits = 0.0;
  double mean_drop_fraction = 0.0;
  double sla_violation_fraction = 0.0;  // intervals with any dropped traffic
  double mean_granted_prb = 0.0;
};

struct RunSummary {
  Mode mode = Mode::rl;
  std::uint64_t seed = 0;
  long timesteps = 0;
  long train_iterations = 0;
  long explainer_calls = 0;  // single-state explanations performed
  double wall_seconds = 0.0;
  double mean_total_env_reward = 0.0;  // trailing window, summed over slices
  std::vector<SliceSummary> slices;
};

// Runs one seeded experiment and writes metrics.jsonl, rewards.csv,
// latency_cdf.csv, drops_box.csv, run_summary.json, config.json and
// checkpoints/ under out_dir; xrl mode additionally writes xai.jsonl and
// waterfall_early.csv / waterfall_late.csv.
RunSummary run_single(const ExperimentConfig& config, Mode mode,
                      std::uint64_t seed, const std::string& out_dir);

// Runs every seed in config.run.seeds under out_root/seed_<n>/ and writes an
// aggregate summary.json next to them.
std::vector<RunSummary> run_experiment(const ExperimentConfig& config,
                                       Mode mode, const std::string& out_root);

// Replays trained checkpoints greedily and writes attribution waterfall rows
// for one slice's visited states.
void export_waterfall(const ExperimentConfig& config,
                      const std::string& checkpoint_dir, int slice_index,
                      std::uint64_t seed, int probes,
                      const std::string& out_csv);

// Rebuilds the CSV summaries in a run directory from its metrics.jsonl and
// returns a short human-readable report.
std::string summarize_run(const std::string& run_dir);

// Full-precision float formatting shared by every CSV writer.
std::string csv_double(double v);

struct IntervalSlice {
  SliceStepMetrics metrics;
  double loss = 0.0;
  bool trained = false;
};

struct IntervalRecord {
  long t = 0;
  double epsilon = 0.0;
  std::vector<IntervalSlice> slices;
};

struct MetricsFile {
  std::vector<std::string> slice_names;
  std::vector<IntervalRecord> records;
};

MetricsFile read_metrics_jsonl(const std::string& path);

void write_rewards_csv(const std::string& path,
                       const std::vector<std::string>& names,
                       const std::vector<IntervalRecord>& history);
void write_latency_cdf_csv(const std::string& path,
                           const std::vector<std::string>& names,
                           const std::vector<IntervalRecord>& history,
                           double measurement_fraction);
void write_drops_box_csv(const std::string& path,
                         const std::vector<std::string>& names,
                         const std::vector<IntervalRecord>& history,
                         double measurement_fraction);

// Index of the first interval inside the trailing measurement window.
std::size_t measurement_start(std::size_t total, double fraction);

}  // namespace ranxrl
