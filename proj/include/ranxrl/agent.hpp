#pragma once

#include <cstdint>
#include <vector>

#include "ranxrl/qnetwork.hpp"
#include "ranxrl/rng.hpp"
#include "ranxrl/slicing_env.hpp"

namespace ranxrl {

struct AgentConfig {
  double gamma = 0.99;
  double learning_rate = 0.001;
  int batch_size = 32;
  double tau = 0.005;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_decay_steps = 15000;
  long start_timesteps = 1000;  // warmup with uniform random actions
  std::size_t buffer_capacity = 20000;
  std::vector<int> hidden_sizes = {24, 24};
  double clip_grad_norm = 0.0;  // 0 disables clipping

  void validate() const;
};

// Linear decay from start to end over decay_steps, then flat.
class EpsilonSchedule {
 public:
  EpsilonSchedule(double start, double end, long decay_steps)
      : start_(start), end_(end), decay_steps_(decay_steps) {}

  double value(long step) const {
    if (step >= decay_steps_ || decay_steps_ <= 0) return end_;
    return start_ + (end_ - start_) * static_cast<double>(step) /
                        static_cast<double>(decay_steps_);
  }

 private:
  double start_;
  double end_;
  long decay_steps_;
};

// Maps raw observations onto the network's input range and back.
class StateNormalizer {
 public:
  StateNormalizer() = default;
  StateNormalizer(double snr_scale_db, double demand_scale_bits,
                  int capacity_prb)
      : snr_scale_(snr_scale_db),
        demand_scale_(demand_scale_bits),
        capacity_(capacity_prb) {}

  // demand is scaled by twice the slice's configured mean.
  static StateNormalizer for_slice(const GnbConfig& gnb, const SliceSpec& spec) {
    return StateNormalizer(40.0, 2.0 * spec.mean_demand_bits, gnb.capacity_prb);
  }

  std::vector<double> normalize(const SliceObservation& obs) const {
    return {obs.snr_db / snr_scale_, obs.demand_bits / demand_scale_,
            static_cast<double>(obs.remaining_capacity_prb) / capacity_};
  }

  SliceObservation denormalize(const std::vector<double>& v) const;

 private:
  double snr_scale_ = 40.0;
  double demand_scale_ = 1.0;
  int capacity_ = 1;
};

struct Transition {
  SliceObservation state;
  std::vector<double> state_norm;  // cached network input
  int action_index = 0;
  double env_reward = 0.0;
  SliceObservation next_state;
  std::vector<double> next_state_norm;
  bool terminal = false;
};

// Fixed-capacity ring buffer with uniform sampling; oldest entries evicted
// first once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  // logical index 0 is the oldest stored transition
  const Transition& operator[](std::size_t logical) const;

  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

// Double-Q regression targets: the online network picks the next action, the
// target network values it. Terminal transitions use the reward alone.
std::vector<double> compute_targets(const std::vector<const Transition*>& batch,
                                    const std::vector<double>& composite_rewards,
                                    const QNetwork& online,
                                    const QNetwork& target, double gamma);

struct TrainOutput {
  bool trained = false;  // false when the buffer cannot fill a batch yet
  double loss = 0.0;
  std::vector<double> composite_rewards;
  std::vector<std::vector<double>> batch_states;  // normalized, for the explainer
};

// One slice's learner: online/target networks, replay buffer, exploration.
class SliceAgent {
 public:
  SliceAgent(AgentConfig config, StateNormalizer normalizer, int num_actions,
             std::uint64_t init_seed, std::uint64_t explore_seed,
             std::uint64_t sample_seed);

  // Uniform during warmup, epsilon-greedy afterwards; argmax ties go to the
  // lowest action index.
  int select_action(const SliceObservation& obs, long step_count);

  void store_transition(const SliceObservation& state, int action_index,
                        double env_reward, const SliceObservation& next_state,
                        bool terminal);

  // Samples a batch, applies the composite reward
  // r + mu * xai_reward_prev, regresses on double-Q targets and soft-updates
  // the target network. No-op when the buffer is smaller than a batch.
  TrainOutput train_iteration(double xai_reward_prev, double mu);

  double epsilon_at(long step) const { return schedule_.value(step); }
  int num_actions() const { return num_actions_; }
  const AgentConfig& config() const { return config_; }
  const StateNormalizer& normalizer() const { return normalizer_; }
  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  QNetwork& online() { return online_; }
  QNetwork& target() { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }

  void save_checkpoint(const std::string& path) const { online_.save(path); }

 private:
  AgentConfig config_;
  StateNormalizer normalizer_;
  int num_actions_;
  EpsilonSchedule schedule_;
  QNetwork online_;
  QNetwork target_;
  ReplayBuffer buffer_;
  Rng explore_rng_;
  Rng sample_rng_;
};

int argmax_lowest(const std::vector<double>& values);

}  // namespace ranxrl
