#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranxrl/agent.hpp"
#include "ranxrl/slicing_env.hpp"
#include "ranxrl/xai_reward.hpp"

namespace ranxrl {

struct RunControls {
  long max_timesteps = 30000;
  long episode_length = 100;  // intervals between demand/channel re-draws
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  double measurement_fraction = 0.2;  // trailing window used for summaries

  void validate() const;
};

struct ExperimentConfig {
  GnbConfig gnb;
  std::vector<SliceSpec> slices;
  AgentConfig agent;
  XaiConfig xai;
  RunControls run;

  void validate() const;
};

// Three-slice defaults: a latency-critical slice, a broadband slice and a
// machine-type slice.
ExperimentConfig default_experiment_config();

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& config,
                            const std::string& path);

ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string render_experiment_config(const ExperimentConfig& config);

}  // namespace ranxrl
