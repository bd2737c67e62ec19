#include "ranxrl/xai_reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranxrl {

void XaiConfig::validate() const {
  if (mu < 0.0) throw std::invalid_argument("mu must be >= 0");
  if (entropy_floor <= 0.0)
    throw std::invalid_argument("entropy_floor must be positive");
  if (background_size == 0)
    throw std::invalid_argument("background_size must be positive");
  if (background_refresh_period <= 0)
    throw std::invalid_argument("background_refresh_period must be positive");
}

std::vector<double> attribution_softmax(const std::vector<double>& shap_values) {
  if (shap_values.empty())
    throw std::invalid_argument("softmax of empty attribution vector");
  std::vector<double> mag(shap_values.size());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    if (!std::isfinite(shap_values[i]))
      throw std::invalid_argument("attribution values must be finite");
    mag[i] = std::fabs(shap_values[i]);
  }
  const double peak = *std::max_element(mag.begin(), mag.end());
  double total = 0.0;
  for (double& m : mag) {
    m = std::exp(m - peak);
    total += m;
  }
  for (double& m : mag) m /= total;
  return mag;
}

double shannon_entropy(const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("entropy of empty vector");
  double h = 0.0;
  for (double p : probs) {
    if (p < 0.0 || p > 1.0 + 1e-12)
      throw std::invalid_argument("entropy input is not a probability");
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double xrl_reward(const std::vector<double>& batch_entropies,
                  double entropy_floor) {
  if (batch_entropies.empty())
    throw std::invalid_argument("xrl reward needs at least one entropy");
  if (entropy_floor <= 0.0)
    throw std::invalid_argument("entropy_floor must be positive");
  const double worst =
      *std::max_element(batch_entropies.begin(), batch_entropies.end());
  return 1.0 / std::max(worst, entropy_floor);
}

double composite_reward(double env_reward, double mu, double xai_reward_prev) {
  return env_reward + mu * xai_reward_prev;
}

}  // namespace ranxrl
