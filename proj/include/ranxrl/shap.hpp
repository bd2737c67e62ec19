#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ranxrl/qnetwork.hpp"
#include "ranxrl/rng.hpp"

namespace ranxrl {

// Scalar model under explanation; input is a normalized state.
using ModelFn = std::function<double(const std::vector<double>&)>;

// Reference states used to marginalize features excluded from a coalition.
struct BackgroundSet {
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t num_features() const { return rows.empty() ? 0 : rows[0].size(); }
  void validate() const;
};

struct Attribution {
  std::vector<double> shap_values;
  double base_value = 0.0;  // mean model output over the background
  double fx = 0.0;          // model output at the explained state
};

// Exact interventional Shapley values by full coalition enumeration.
// Feature count is capped because cost grows as 2^L.
Attribution exact_shapley(const ModelFn& f, const std::vector<double>& x,
                          const BackgroundSet& background);

std::vector<Attribution> explain_batch(const ModelFn& f,
                                       const std::vector<std::vector<double>>& xs,
                                       const BackgroundSet& background);

// Greedy-policy readout of a Q-network: the PRB count of the argmax action
// (ties resolved toward the lowest index).
ModelFn greedy_prb_model(const QNetwork& net, int chunk_prb);

// Draws up to n distinct rows from a pool of normalized states.
BackgroundSet sample_background(const std::vector<std::vector<double>>& pool,
                                std::size_t n, Rng& rng);

}  // namespace ranxrl
