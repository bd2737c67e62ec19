#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "ranxrl/shap.hpp"

using namespace ranxrl;

namespace {

double sum_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

BackgroundSet bg_from(std::vector<std::vector<double>> rows) {
  BackgroundSet bg;
  bg.rows = std::move(rows);
  return bg;
}

}  // namespace

TEST_CASE("linear model recovers the closed-form attribution") {
  // f(x) = 2 x0 - x1 + 0.5 x2 + 0.25; phi_l = w_l (x_l - mean background_l)
  const ModelFn f = [](const std::vector<double>& x) {
    return 2.0 * x[0] - x[1] + 0.5 * x[2] + 0.25;
  };
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto bg = bg_from({{0.0, 1.0, -2.0}, {1.0, 1.0, 0.0}});
  const Attribution a = exact_shapley(f, x, bg);
  // background means (0.5, 1, -1)
  CHECK(a.shap_values[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(a.shap_values[1] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(a.shap_values[2] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(a.fx == doctest::Approx(1.75));
  CHECK(a.base_value == doctest::Approx(-0.25));
  CHECK(std::fabs(a.base_value + sum_of(a.shap_values) - a.fx) < 1e-9);
}

TEST_CASE("attributions always add up to the gap between fx and the base") {
  QNetwork net({3, 8, 5}, 77);
  const ModelFn f = greedy_prb_model(net, 10);
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> pool;
  for (int k = 0; k < 40; ++k) pool.push_back({u(rng), u(rng), u(rng)});
  const BackgroundSet bg = sample_background(pool, 16, rng);
  for (int k = 0; k < 25; ++k) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const Attribution a = exact_shapley(f, x, bg);
    CHECK(std::fabs(a.base_value + sum_of(a.shap_values) - a.fx) < 1e-9);
    CHECK(a.fx >= 0.0);
    CHECK(a.fx <= 40.0);  // 5 actions, chunk 10
  }
}

TEST_CASE("a feature the model ignores gets exactly zero credit") {
  const ModelFn f = [](const std::vector<double>& x) {
    return std::sin(x[0]) + x[1] * x[1];  // never reads x[2]
  };
  const auto bg = bg_from({{0.3, -0.7, 5.0}, {-1.1, 0.2, -9.0}, {0.0, 0.0, 1.0}});
  const Attribution a = exact_shapley(f, {0.9, 0.4, 123.0}, bg);
  CHECK(a.shap_values[2] == 0.0);
  CHECK(std::fabs(a.base_value + sum_of(a.shap_values) - a.fx) < 1e-9);
}

TEST_CASE("symmetric features earn equal credit") {
  const ModelFn f = [](const std::vector<double>& x) { return x[0] + x[1]; };
  const auto bg = bg_from({{0.0, 0.0, 1.0}, {1.0, 1.0, -1.0}});
  const Attribution a = exact_shapley(f, {2.0, 2.0, 5.0}, bg);
  CHECK(a.shap_values[0] == doctest::Approx(a.shap_values[1]).epsilon(1e-12));
  CHECK(a.shap_values[0] == doctest::Approx(1.5));
  CHECK(a.shap_values[2] == 0.0);
}

TEST_CASE("greedy readout reports the argmax action in PRBs") {
  QNetwork net({1, 3}, 1);
  net.set_parameters({0.0, 0.0, 0.0, 0.1, 0.5, 0.3});  // Q = biases
  const ModelFn f = greedy_prb_model(net, 10);
  CHECK(f({0.0}) == 10.0);

  net.set_parameters({0.0, 0.0, 0.0, 0.5, 0.5, 0.1});  // tie: lowest index
  CHECK(f({0.0}) == 0.0);

  net.set_parameters({0.0, 0.0, 0.0, 0.0, 0.0, 0.0});  // all equal
  CHECK(f({1.0}) == 0.0);
  CHECK_THROWS_AS(greedy_prb_model(net, 0), std::invalid_argument);
}

TEST_CASE("background sampling draws distinct rows") {
  std::vector<std::vector<double>> pool;
  for (int k = 0; k < 30; ++k)
    pool.push_back({static_cast<double>(k), 0.0, 0.0});

  Rng rng(42);
  const BackgroundSet bg = sample_background(pool, 16, rng);
  CHECK(bg.size() == 16);
  CHECK(bg.num_features() == 3);
  std::set<double> distinct;
  for (const auto& row : bg.rows) distinct.insert(row[0]);
  CHECK(distinct.size() == 16);  // without replacement

  Rng rng2(42);
  CHECK(sample_background(pool, 16, rng2).rows == bg.rows);  // seeded draw

  Rng rng3(7);
  const BackgroundSet all = sample_background(pool, 64, rng3);
  CHECK(all.size() == pool.size());  // small pool: keep every row
  CHECK(all.rows == pool);
  CHECK_THROWS_AS(sample_background({}, 4, rng3), std::invalid_argument);
}

TEST_CASE("explain_batch matches one-at-a-time explanations") {
  QNetwork net({3, 6, 4}, 9);
  const ModelFn f = greedy_prb_model(net, 10);
  const auto bg = bg_from({{0.1, 0.2, 0.3}, {0.9, 0.8, 0.7}, {0.4, 0.4, 0.4}});
  const std::vector<std::vector<double>> xs{{0.2, 0.5, 0.9}, {0.7, 0.1, 0.3}};
  const auto batch = explain_batch(f, xs, bg);
  REQUIRE(batch.size() == 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Attribution one = exact_shapley(f, xs[i], bg);
    CHECK(batch[i].shap_values == one.shap_values);
    CHECK(batch[i].base_value == one.base_value);
    CHECK(batch[i].fx == one.fx);
  }
}

TEST_CASE("explainer rejects malformed inputs") {
  const ModelFn f = [](const std::vector<double>& x) { return x[0]; };
  const auto bg = bg_from({{1.0, 2.0}});
  CHECK_THROWS_AS(exact_shapley(f, {}, bg_from({{}})), std::invalid_argument);
  CHECK_THROWS_AS(exact_shapley(f, {1.0, 2.0, 3.0}, bg),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_shapley(f, {1.0, 2.0}, bg_from({})),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_shapley(f, {1.0, 2.0},
                                bg_from({{1.0, 2.0}, {1.0}})),
                  std::invalid_argument);
  const std::vector<double> wide(21, 0.0);
  CHECK_THROWS_AS(exact_shapley(f, wide,
                                bg_from({std::vector<double>(21, 0.0)})),
                  std::invalid_argument);
}
