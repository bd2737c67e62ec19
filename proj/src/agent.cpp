#include "ranxrl/agent.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ranxrl {

void AgentConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("gamma must be in [0, 1)");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("learning_rate must be positive");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("tau must be in (0, 1]");
  if (epsilon_start < epsilon_end)
    throw std::invalid_argument("epsilon_start must be >= epsilon_end");
  if (epsilon_end < 0.0 || epsilon_start > 1.0)
    throw std::invalid_argument("epsilon must stay within [0, 1]");
  if (epsilon_decay_steps < 0)
    throw std::invalid_argument("epsilon_decay_steps must be >= 0");
  if (start_timesteps < 0)
    throw std::invalid_argument("start_timesteps must be >= 0");
  if (buffer_capacity < static_cast<std::size_t>(batch_size))
    throw std::invalid_argument("buffer_capacity must hold at least one batch");
  for (int h : hidden_sizes)
    if (h <= 0) throw std::invalid_argument("hidden layer sizes must be positive");
  if (clip_grad_norm < 0.0)
    throw std::invalid_argument("clip_grad_norm must be >= 0");
}

SliceObservation StateNormalizer::denormalize(const std::vector<double>& v) const {
  if (v.size() != 3)
    throw std::invalid_argument("normalized state must have 3 features");
  SliceObservation obs;
  obs.snr_db = v[0] * snr_scale_;
  obs.demand_bits = v[1] * demand_scale_;
  obs.remaining_capacity_prb =
      static_cast<int>(std::lround(v[2] * capacity_));
  return obs;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("buffer capacity must be > 0");
  data_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    data_.push_back(std::move(t));
    ++size_;
  } else {
    data_[head_] = std::move(t);
  }
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::operator[](std::size_t logical) const {
  if (logical >= size_) throw std::out_of_range("replay index out of range");
  if (size_ < capacity_) return data_[logical];
  return data_[(head_ + logical) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n,
                                                      Rng& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = pick(rng);
  return out;
}

int argmax_lowest(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::vector<double> compute_targets(const std::vector<const Transition*>& batch,
                                    const std::vector<double>& composite_rewards,
                                    const QNetwork& online,
                                    const QNetwork& target, double gamma) {
  if (batch.size() != composite_rewards.size())
    throw std::invalid_argument("one composite reward per transition expected");
  std::vector<double> targets(batch.size());
  std::vector<double> q_online, q_target;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    double y = composite_rewards[i];
    if (!t.terminal) {
      online.forward(t.next_state_norm, q_online);
      target.forward(t.next_state_norm, q_target);
      const int a_next = argmax_lowest(q_online);
      y += gamma * q_target[a_next];
    }
    targets[i] = y;
  }
  return targets;
}

namespace {

std::vector<int> network_layers(const AgentConfig& config, int num_actions) {
  std::vector<int> sizes;
  sizes.push_back(3);  // snr, demand, remaining capacity
  for (int h : config.hidden_sizes) sizes.push_back(h);
  sizes.push_back(num_actions);
  return sizes;
}

}  // namespace

SliceAgent::SliceAgent(AgentConfig config, StateNormalizer normalizer,
                       int num_actions, std::uint64_t init_seed,
                       std::uint64_t explore_seed, std::uint64_t sample_seed)
    : config_(std::move(config)),
      normalizer_(normalizer),
      num_actions_(num_actions),
      schedule_(config_.epsilon_start, config_.epsilon_end,
                config_.epsilon_decay_steps),
      online_(network_layers(config_, num_actions), init_seed,
              AdamConfig{config_.learning_rate, 0.9, 0.999, 1e-8}),
      target_(network_layers(config_, num_actions), init_seed,
              AdamConfig{config_.learning_rate, 0.9, 0.999, 1e-8}),
      buffer_(config_.buffer_capacity),
      explore_rng_(explore_seed),
      sample_rng_(sample_seed) {
  config_.validate();
  if (num_actions_ <= 0)
    throw std::invalid_argument("agent needs at least one action");
  // identical seeds make the target network start as a copy of the online one
}

int SliceAgent::select_action(const SliceObservation& obs, long step_count) {
  std::uniform_int_distribution<int> uniform_action(0, num_actions_ - 1);
  if (step_count < config_.start_timesteps) return uniform_action(explore_rng_);
  const double eps = schedule_.value(step_count);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(explore_rng_) < eps) return uniform_action(explore_rng_);
  return argmax_lowest(online_.forward(normalizer_.normalize(obs)));
}

void SliceAgent::store_transition(const SliceObservation& state,
                                  int action_index, double env_reward,
                                  const SliceObservation& next_state,
                                  bool terminal) {
  if (action_index < 0 || action_index >= num_actions_)
    throw std::invalid_argument("stored action index out of range");
  Transition t;
  t.state = state;
  t.state_norm = normalizer_.normalize(state);
  t.action_index = action_index;
  t.env_reward = env_reward;
  t.next_state = next_state;
  t.next_state_norm = normalizer_.normalize(next_state);
  t.terminal = terminal;
  buffer_.push(std::move(t));
}

TrainOutput SliceAgent::train_iteration(double xai_reward_prev, double mu) {
  TrainOutput out;
  const std::size_t batch_size = static_cast<std::size_t>(config_.batch_size);
  if (buffer_.size() < batch_size) return out;

  const std::vector<std::size_t> indices =
      buffer_.sample_indices(batch_size, sample_rng_);

  std::vector<const Transition*> batch(batch_size);
  out.composite_rewards.resize(batch_size);
  out.batch_states.resize(batch_size);
  QBatch regress;
  regress.states.resize(batch_size);
  regress.actions.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const Transition& t = buffer_[indices[i]];
    batch[i] = &t;
    out.composite_rewards[i] = t.env_reward + mu * xai_reward_prev;
    out.batch_states[i] = t.state_norm;
    regress.states[i] = t.state_norm;
    regress.actions[i] = t.action_index;
  }
  regress.targets =
      compute_targets(batch, out.composite_rewards, online_, target_,
                      config_.gamma);

  out.loss = online_.train_step(regress, config_.clip_grad_norm);
  target_.soft_update_from(online_, config_.tau);
  out.trained = true;
  return out;
}

}  // namespace ranxrl
