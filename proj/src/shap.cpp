#include "ranxrl/shap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ranxrl/agent.hpp"

namespace ranxrl {

namespace {

constexpr std::size_t kMaxFeatures = 20;  // 2^L coalitions per explanation

int popcount(unsigned mask) {
  int n = 0;
  for (; mask; mask &= mask - 1) ++n;
  return n;
}

}  // namespace

void BackgroundSet::validate() const {
  if (rows.empty()) throw std::invalid_argument("background set is empty");
  const std::size_t width = rows[0].size();
  if (width == 0) throw std::invalid_argument("background rows have no features");
  for (const auto& row : rows)
    if (row.size() != width)
      throw std::invalid_argument("background rows have mixed widths");
}

Attribution exact_shapley(const ModelFn& f, const std::vector<double>& x,
                          const BackgroundSet& background) {
  background.validate();
  const std::size_t L = x.size();
  if (L == 0) throw std::invalid_argument("cannot explain an empty state");
  if (L != background.num_features())
    throw std::invalid_argument("state and background widths differ");
  if (L > kMaxFeatures)
    throw std::invalid_argument("too many features for exact enumeration");

  const unsigned full = (1u << L) - 1u;
  const double inv_rows = 1.0 / static_cast<double>(background.size());

  // v(S): mean model output with features in S taken from x and the rest
  // replaced by background values.
  std::vector<double> value(full + 1u, 0.0);
  std::vector<double> blended(L);
  for (unsigned mask = 0; mask <= full; ++mask) {
    if (mask == full) {
      value[mask] = f(x);
      continue;
    }
    double acc = 0.0;
    for (const auto& row : background.rows) {
      for (std::size_t l = 0; l < L; ++l)
        blended[l] = (mask >> l) & 1u ? x[l] : row[l];
      acc += f(blended);
    }
    value[mask] = acc * inv_rows;
  }

  std::vector<double> factorial(L + 1, 1.0);
  for (std::size_t i = 1; i <= L; ++i)
    factorial[i] = factorial[i - 1] * static_cast<double>(i);

  Attribution out;
  out.base_value = value[0];
  out.fx = value[full];
  out.shap_values.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const unsigned bit = 1u << l;
    for (unsigned mask = 0; mask <= full; ++mask) {
      if (mask & bit) continue;
      const int s = popcount(mask);
      const double weight =
          factorial[s] * factorial[L - s - 1] / factorial[L];
      out.shap_values[l] += weight * (value[mask | bit] - value[mask]);
    }
  }
  return out;
}

std::vector<Attribution> explain_batch(
    const ModelFn& f, const std::vector<std::vector<double>>& xs,
    const BackgroundSet& background) {
  std::vector<Attribution> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(exact_shapley(f, x, background));
  return out;
}

ModelFn greedy_prb_model(const QNetwork& net, int chunk_prb) {
  if (chunk_prb <= 0) throw std::invalid_argument("chunk_prb must be positive");
  return [&net, chunk_prb](const std::vector<double>& x) {
    return static_cast<double>(chunk_prb) *
           static_cast<double>(argmax_lowest(net.forward(x)));
  };
}

BackgroundSet sample_background(const std::vector<std::vector<double>>& pool,
                                std::size_t n, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("background pool is empty");
  BackgroundSet bg;
  if (pool.size() <= n) {
    bg.rows = pool;
    return bg;
  }
  // partial Fisher-Yates over an index vector: first n entries are a uniform
  // draw without replacement
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  bg.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) bg.rows.push_back(pool[idx[i]]);
  return bg;
}

}  // namespace ranxrl
