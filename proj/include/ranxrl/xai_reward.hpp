#pragma once

#include <vector>

namespace ranxrl {

struct XaiConfig {
  double mu = 0.5;              // weight of the explanation bonus
  double entropy_floor = 1e-3;  // keeps the reciprocal bounded
  std::size_t background_size = 16;
  long background_refresh_period = 250;  // train iterations between refreshes

  void validate() const;
};

// Softmax over the magnitudes of a state's attributions; the max is
// subtracted before exponentiation for numerical stability.
std::vector<double> attribution_softmax(const std::vector<double>& shap_values);

// Shannon entropy in nats of a probability vector.
double shannon_entropy(const std::vector<double>& probs);

// Explanation bonus for one training batch: the reciprocal of the highest
// attribution entropy across the batch, floored to stay finite. Low entropy
// means the policy leans on few features, which is rewarded.
double xrl_reward(const std::vector<double>& batch_entropies,
                  double entropy_floor);

double composite_reward(double env_reward, double mu, double xai_reward_prev);

}  // namespace ranxrl
