#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ranxrl {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One training batch: per sample a state vector, the action whose Q-value the
// squared error is taken on, and the regression target for that value.
struct QBatch {
  std::vector<std::vector<double>> states;
  std::vector<int> actions;
  std::vector<double> targets;
};

// Small dense network: ReLU hidden layers, linear output. Owns its Adam
// moment accumulators, so a network value is a complete training state.
class QNetwork {
 public:
  QNetwork() = default;
  // He-uniform weight init scaled by fan-in, biases zero.
  QNetwork(std::vector<int> layer_sizes, std::uint64_t init_seed,
           AdamConfig adam = {});

  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  const AdamConfig& adam() const { return adam_; }
  std::uint64_t adam_step_count() const { return adam_steps_; }

  void forward(const std::vector<double>& x, std::vector<double>& q) const;
  std::vector<double> forward(const std::vector<double>& x) const;

  // Mean squared error of the selected action values against the targets.
  double batch_loss(const QBatch& batch) const;

  // Analytic loss gradient, flattened layer by layer (weights then biases).
  std::pair<double, std::vector<double>> gradients(const QBatch& batch) const;

  // One Adam update on the batch gradient. clip_grad_norm > 0 rescales the
  // global gradient norm down to that value first. Returns the batch loss.
  double train_step(const QBatch& batch, double clip_grad_norm = 0.0);

  // target <- tau * online + (1 - tau) * target, weights and biases only.
  void soft_update_from(const QNetwork& online, double tau);

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& flat);

  void save(const std::string& path) const;
  static QNetwork load(const std::string& path);

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major [in][out]
    std::vector<double> b;
    std::vector<double> m_w, v_w, m_b, v_b;
  };

  void check_input(const std::vector<double>& x) const;
  void check_batch(const QBatch& batch) const;

  std::vector<int> layer_sizes_;
  std::vector<Layer> layers_;
  AdamConfig adam_;
  std::uint64_t adam_steps_ = 0;

  // forward scratch; instances are single-threaded values
  mutable std::vector<std::vector<double>> scratch_;
};

}  // namespace ranxrl
