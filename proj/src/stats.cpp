#include "ranxrl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranxrl {

double mean_of(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean of empty sample set");
  double acc = 0.0;
  for (double s : samples) acc += s;
  return acc / static_cast<double>(samples.size());
}

double quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("quantile of empty sample set");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("q must be in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double pos = q * static_cast<double>(samples.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= samples.size()) return samples.back();
  const double frac = pos - static_cast<double>(lo);
  return samples[lo] + frac * (samples[lo + 1] - samples[lo]);
}

std::vector<std::pair<double, double>> summarize_cdf(
    std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("cdf of empty sample set");
  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> cdf(samples.size());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    cdf[i] = {samples[i], static_cast<double>(i + 1) / n};
  return cdf;
}

BoxStats summarize_box(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("box of empty sample set");
  BoxStats box;
  box.mean = mean_of(samples);
  std::sort(samples.begin(), samples.end());
  box.p25 = quantile(samples, 0.25);
  box.median = quantile(samples, 0.50);
  box.p75 = quantile(samples, 0.75);
  box.iqr = box.p75 - box.p25;
  const double lo_fence = box.p25 - 1.5 * box.iqr;
  const double hi_fence = box.p75 + 1.5 * box.iqr;
  box.whisker_low = box.p25;
  box.whisker_high = box.p75;
  bool any_inside = false;
  for (double s : samples) {
    if (s < lo_fence || s > hi_fence) {
      box.outliers.push_back(s);
      continue;
    }
    if (!any_inside) {
      box.whisker_low = s;
      any_inside = true;
    }
    box.whisker_high = s;
  }
  box.right_skewed = box.mean > box.median;
  return box;
}

}  // namespace ranxrl
