#pragma once

#include <utility>
#include <vector>

namespace ranxrl {

// Linear-interpolation quantile on the sorted order statistics, q in [0, 1].
double quantile(std::vector<double> samples, double q);

// Empirical CDF: sorted (value, cumulative fraction) pairs, one per sample.
std::vector<std::pair<double, double>> summarize_cdf(
    std::vector<double> samples);

struct BoxStats {
  double mean = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double iqr = 0.0;
  double whisker_low = 0.0;   // smallest sample within 1.5 IQR of p25
  double whisker_high = 0.0;  // largest sample within 1.5 IQR of p75
  std::vector<double> outliers;
  bool right_skewed = false;  // mean above median
};

BoxStats summarize_box(std::vector<double> samples);

double mean_of(const std::vector<double>& samples);

}  // namespace ranxrl
