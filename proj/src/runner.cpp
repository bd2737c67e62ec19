#include "ranxrl/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ranxrl/agent.hpp"
#include "ranxrl/shap.hpp"
#include "ranxrl/stats.hpp"
#include "ranxrl/xai_reward.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ranxrl {

Mode mode_from_string(const std::string& s) {
  if (s == "rl") return Mode::rl;
  if (s == "xrl") return Mode::xrl;
  throw std::invalid_argument("unknown mode \"" + s + "\" (expected rl or xrl)");
}

std::string to_string(Mode mode) { return mode == Mode::rl ? "rl" : "xrl"; }

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::size_t measurement_start(std::size_t total, double fraction) {
  if (total == 0) return 0;
  auto window = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(total)));
  if (window == 0) window = 1;
  if (window > total) window = total;
  return total - window;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json interval_to_json(const IntervalRecord& rec,
                      const std::vector<std::string>& names) {
  json slices = json::array();
  for (std::size_t i = 0; i < rec.slices.size(); ++i) {
    const SliceStepMetrics& m = rec.slices[i].metrics;
    slices.push_back({{"slice", names[i]},
                      {"action_prb", m.allocated_prb},
                      {"granted_prb", m.granted_prb},
                      {"snr_db", m.snr_db},
                      {"demand_bits", m.demand_bits},
                      {"capacity_bits", m.capacity_bits},
                      {"latency_s", m.latency_s},
                      {"served_bits", m.served_bits},
                      {"dropped_bits", m.dropped_bits},
                      {"drop_fraction", m.drop_fraction},
                      {"env_reward", m.env_reward},
                      {"loss", rec.slices[i].loss},
                      {"trained", rec.slices[i].trained}});
  }
  return {{"t", rec.t}, {"epsilon", rec.epsilon}, {"slices", slices}};
}

struct WaterfallSnapshot {
  long t = -1;
  std::vector<std::vector<double>> states;
  std::vector<Attribution> attributions;
};

void write_waterfall_csv(const fs::path& path,
                         const std::vector<std::string>& names,
                         const std::vector<WaterfallSnapshot>& snapshots) {
  std::ofstream out = open_out(path);
  out << "slice,t,probe,x_snr,x_demand,x_capacity,base_value,fx,"
         "shap_snr,shap_demand,shap_capacity\n";
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const WaterfallSnapshot& snap = snapshots[i];
    for (std::size_t k = 0; k < snap.attributions.size(); ++k) {
      const Attribution& a = snap.attributions[k];
      const std::vector<double>& x = snap.states[k];
      out << names[i] << ',' << snap.t << ',' << k;
      for (double v : x) out << ',' << csv_double(v);
      out << ',' << csv_double(a.base_value) << ',' << csv_double(a.fx);
      for (double v : a.shap_values) out << ',' << csv_double(v);
      out << '\n';
    }
  }
}

std::vector<std::vector<double>> buffer_state_pool(const ReplayBuffer& buffer) {
  std::vector<std::vector<double>> pool;
  pool.reserve(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i)
    pool.push_back(buffer[i].state_norm);
  return pool;
}

std::vector<double> window_values(
    const std::vector<IntervalRecord>& history, std::size_t start,
    std::size_t slice, double (*pick)(const IntervalSlice&)) {
  std::vector<double> out;
  out.reserve(history.size() - start);
  for (std::size_t t = start; t < history.size(); ++t)
    out.push_back(pick(history[t].slices[slice]));
  return out;
}

double pick_latency(const IntervalSlice& s) { return s.metrics.latency_s; }
double pick_dropped(const IntervalSlice& s) { return s.metrics.dropped_bits; }
double pick_drop_fraction(const IntervalSlice& s) {
  return s.metrics.drop_fraction;
}
double pick_env_reward(const IntervalSlice& s) { return s.metrics.env_reward; }
double pick_granted(const IntervalSlice& s) {
  return static_cast<double>(s.metrics.granted_prb);
}

}  // namespace

void write_rewards_csv(const std::string& path,
                       const std::vector<std::string>& names,
                       const std::vector<IntervalRecord>& history) {
  std::ofstream out = open_out(path);
  out << "t";
  for (const auto& n : names) out << ',' << n << "_env_reward";
  out << ",total_env_reward\n";
  for (const IntervalRecord& rec : history) {
    out << rec.t;
    double total = 0.0;
    for (const IntervalSlice& s : rec.slices) {
      out << ',' << csv_double(s.metrics.env_reward);
      total += s.metrics.env_reward;
    }
    out << ',' << csv_double(total) << '\n';
  }
}

void write_latency_cdf_csv(const std::string& path,
                           const std::vector<std::string>& names,
                           const std::vector<IntervalRecord>& history,
                           double measurement_fraction) {
  std::ofstream out = open_out(path);
  out << "slice,latency_s,cum_prob\n";
  const std::size_t start =
      measurement_start(history.size(), measurement_fraction);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto cdf =
        summarize_cdf(window_values(history, start, i, pick_latency));
    for (const auto& [value, prob] : cdf)
      out << names[i] << ',' << csv_double(value) << ',' << csv_double(prob)
          << '\n';
  }
}

void write_drops_box_csv(const std::string& path,
                         const std::vector<std::string>& names,
                         const std::vector<IntervalRecord>& history,
                         double measurement_fraction) {
  std::ofstream out = open_out(path);
  out << "slice,mean,p25,median,p75,iqr,whisker_low,whisker_high,"
         "num_outliers,right_skewed\n";
  const std::size_t start =
      measurement_start(history.size(), measurement_fraction);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const BoxStats box =
        summarize_box(window_values(history, start, i, pick_drop_fraction));
    out << names[i] << ',' << csv_double(box.mean) << ','
        << csv_double(box.p25) << ',' << csv_double(box.median) << ','
        << csv_double(box.p75) << ',' << csv_double(box.iqr) << ','
        << csv_double(box.whisker_low) << ',' << csv_double(box.whisker_high)
        << ',' << box.outliers.size() << ',' << (box.right_skewed ? 1 : 0)
        << '\n';
  }
}

MetricsFile read_metrics_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  MetricsFile file;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ": bad metrics line: " + e.what());
    }
    IntervalRecord rec;
    rec.t = j.at("t").get<long>();
    rec.epsilon = j.at("epsilon").get<double>();
    for (const json& s : j.at("slices")) {
      if (file.records.empty())
        file.slice_names.push_back(s.at("slice").get<std::string>());
      IntervalSlice slice;
      SliceStepMetrics& m = slice.metrics;
      m.allocated_prb = s.at("action_prb").get<int>();
      m.granted_prb = s.at("granted_prb").get<int>();
      m.snr_db = s.at("snr_db").get<double>();
      m.demand_bits = s.at("demand_bits").get<double>();
      m.capacity_bits = s.at("capacity_bits").get<double>();
      m.latency_s = s.at("latency_s").get<double>();
      m.served_bits = s.at("served_bits").get<double>();
      m.dropped_bits = s.at("dropped_bits").get<double>();
      m.drop_fraction = s.at("drop_fraction").get<double>();
      m.env_reward = s.at("env_reward").get<double>();
      slice.loss = s.at("loss").get<double>();
      slice.trained = s.at("trained").get<bool>();
      rec.slices.push_back(std::move(slice));
    }
    if (rec.slices.size() != file.slice_names.size())
      throw std::runtime_error(path + ": inconsistent slice count");
    file.records.push_back(std::move(rec));
  }
  if (file.records.empty())
    throw std::runtime_error(path + ": no metrics records");
  return file;
}

namespace {

RunSummary summarize_history(const std::vector<IntervalRecord>& history,
                             const std::vector<std::string>& names,
                             double measurement_fraction) {
  RunSummary sum;
  sum.timesteps = static_cast<long>(history.size());
  const std::size_t start =
      measurement_start(history.size(), measurement_fraction);
  double total_acc = 0.0;
  for (std::size_t t = start; t < history.size(); ++t) {
    double interval_total = 0.0;
    for (const IntervalSlice& s : history[t].slices)
      interval_total += s.metrics.env_reward;
    total_acc += interval_total;
  }
  sum.mean_total_env_reward =
      total_acc / static_cast<double>(history.size() - start);
  for (std::size_t i = 0; i < names.size(); ++i) {
    SliceSummary s;
    s.name = names[i];
    const auto rewards = window_values(history, start, i, pick_env_reward);
    const auto latencies = window_values(history, start, i, pick_latency);
    const auto dropped = window_values(history, start, i, pick_dropped);
    const auto drop_fracs =
        window_values(history, start, i, pick_drop_fraction);
    const auto granted = window_values(history, start, i, pick_granted);
    s.mean_env_reward = mean_of(rewards);
    s.mean_latency_s = mean_of(latencies);
    s.median_latency_s = quantile(latencies, 0.5);
    s.mean_dropped_bits = mean_of(dropped);
    s.mean_drop_fraction = mean_of(drop_fracs);
    double violations = 0.0;
    for (double d : dropped)
      if (d > 0.0) violations += 1.0;
    s.sla_violation_fraction = violations / static_cast<double>(dropped.size());
    s.mean_granted_prb = mean_of(granted);
    sum.slices.push_back(std::move(s));
  }
  return sum;
}

json summary_to_json(const RunSummary& sum) {
  json slices = json::array();
  for (const SliceSummary& s : sum.slices)
    slices.push_back({{"slice", s.name},
                      {"mean_env_reward", s.mean_env_reward},
                      {"mean_latency_s", s.mean_latency_s},
                      {"median_latency_s", s.median_latency_s},
                      {"mean_dropped_bits", s.mean_dropped_bits},
                      {"mean_drop_fraction", s.mean_drop_fraction},
                      {"sla_violation_fraction", s.sla_violation_fraction},
                      {"mean_granted_prb", s.mean_granted_prb}});
  return {{"mode", to_string(sum.mode)},
          {"seed", sum.seed},
          {"timesteps", sum.timesteps},
          {"train_iterations", sum.train_iterations},
          {"explainer_calls", sum.explainer_calls},
          {"wall_seconds", sum.wall_seconds},
          {"mean_total_env_reward", sum.mean_total_env_reward},
          {"slices", slices}};
}

}  // namespace

RunSummary run_single(const ExperimentConfig& config, Mode mode,
                      std::uint64_t seed, const std::string& out_dir) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const fs::path dir(out_dir);
  fs::create_directories(dir / "checkpoints");
  save_experiment_config(config, (dir / "config.json").string());

  const int num_slices = config.gnb.num_slices;
  std::vector<std::string> names;
  for (const SliceSpec& s : config.slices) names.push_back(s.name);

  SlicingEnv env(config.gnb, config.slices);
  env.reset(derive_seed(seed, RngConcern::traffic),
            derive_seed(seed, RngConcern::channel));
  const int num_actions = env.action_space().size();

  std::vector<SliceAgent> agents;
  agents.reserve(num_slices);
  std::vector<Rng> background_rngs;
  for (int i = 0; i < num_slices; ++i) {
    agents.emplace_back(config.agent,
                        StateNormalizer::for_slice(config.gnb, config.slices[i]),
                        num_actions, derive_seed(seed, RngConcern::net_init, i),
                        derive_seed(seed, RngConcern::exploration, i),
                        derive_seed(seed, RngConcern::buffer_sampling, i));
    background_rngs.emplace_back(
        derive_seed(seed, RngConcern::background, i));
  }

  const bool explain = mode == Mode::xrl;
  const double mu_effective = explain ? config.xai.mu : 0.0;
  std::vector<double> xai_prev(num_slices, 0.0);
  std::vector<BackgroundSet> backgrounds(num_slices);
  std::vector<WaterfallSnapshot> waterfall_early(num_slices);
  std::vector<WaterfallSnapshot> waterfall_late(num_slices);

  std::ofstream metrics_out = open_out(dir / "metrics.jsonl");
  std::ofstream xai_out;
  if (explain) xai_out = open_out(dir / "xai.jsonl");

  std::vector<IntervalRecord> history;
  history.reserve(config.run.max_timesteps);
  long train_iterations = 0;
  long explainer_calls = 0;

  for (long t = 0; t < config.run.max_timesteps; ++t) {
    const std::vector<SliceObservation> obs = env.observations();
    std::vector<int> action_idx(num_slices);
    std::vector<PrbAction> actions(num_slices);
    for (int i = 0; i < num_slices; ++i) {
      action_idx[i] = agents[i].select_action(obs[i], t);
      actions[i].prbs = env.action_space().prbs_of(action_idx[i]);
    }
    StepResult sr = env.step(actions);
    const bool terminal = (t + 1) % config.run.episode_length == 0;
    for (int i = 0; i < num_slices; ++i)
      agents[i].store_transition(obs[i], action_idx[i], sr.rewards[i],
                                 sr.next_observations[i], terminal);

    IntervalRecord rec;
    rec.t = t;
    rec.epsilon = agents[0].epsilon_at(t);
    rec.slices.resize(num_slices);
    for (int i = 0; i < num_slices; ++i)
      rec.slices[i].metrics = sr.metrics.slices[i];

    if (t >= config.agent.start_timesteps) {
      bool trained_this_interval = false;
      json xai_slices = json::array();
      for (int i = 0; i < num_slices; ++i) {
        const double xai_applied = xai_prev[i];
        TrainOutput out = agents[i].train_iteration(xai_applied, mu_effective);
        rec.slices[i].loss = out.loss;
        rec.slices[i].trained = out.trained;
        if (!out.trained) continue;
        trained_this_interval = true;
        if (!explain) continue;

        if (train_iterations % config.xai.background_refresh_period == 0)
          backgrounds[i] =
              sample_background(buffer_state_pool(agents[i].buffer()),
                                config.xai.background_size,
                                background_rngs[i]);
        const ModelFn model =
            greedy_prb_model(agents[i].online(), config.gnb.chunk_prb);
        const std::vector<Attribution> attributions =
            explain_batch(model, out.batch_states, backgrounds[i]);
        explainer_calls += static_cast<long>(attributions.size());

        std::vector<double> entropies(attributions.size());
        std::vector<double> mean_abs(attributions[0].shap_values.size(), 0.0);
        for (std::size_t k = 0; k < attributions.size(); ++k) {
          entropies[k] = shannon_entropy(
              attribution_softmax(attributions[k].shap_values));
          for (std::size_t l = 0; l < mean_abs.size(); ++l)
            mean_abs[l] += std::fabs(attributions[k].shap_values[l]) /
                           static_cast<double>(attributions.size());
        }
        const double reward_next =
            xrl_reward(entropies, config.xai.entropy_floor);
        xai_prev[i] = reward_next;

        double entropy_mean = mean_of(entropies);
        double entropy_max =
            *std::max_element(entropies.begin(), entropies.end());
        xai_slices.push_back({{"slice", names[i]},
                              {"xai_reward_applied", xai_applied},
                              {"xrl_reward", reward_next},
                              {"entropy_max", entropy_max},
                              {"entropy_mean", entropy_mean},
                              {"mean_abs_shap", mean_abs}});

        const std::size_t keep = std::min<std::size_t>(8, attributions.size());
        WaterfallSnapshot snap;
        snap.t = t;
        snap.states.assign(out.batch_states.begin(),
                           out.batch_states.begin() + keep);
        snap.attributions.assign(attributions.begin(),
                                 attributions.begin() + keep);
        if (waterfall_early[i].t < 0) waterfall_early[i] = snap;
        waterfall_late[i] = std::move(snap);
      }
      if (trained_this_interval) ++train_iterations;
      if (explain && !xai_slices.empty())
        xai_out << json{{"t", t}, {"slices", xai_slices}}.dump() << '\n';
    }

    metrics_out << interval_to_json(rec, names).dump() << '\n';
    history.push_back(std::move(rec));

    if (terminal) env.episode_reset();
  }
  metrics_out.close();
  if (explain) xai_out.close();

  write_rewards_csv((dir / "rewards.csv").string(), names, history);
  write_latency_cdf_csv((dir / "latency_cdf.csv").string(), names, history,
                        config.run.measurement_fraction);
  write_drops_box_csv((dir / "drops_box.csv").string(), names, history,
                      config.run.measurement_fraction);
  for (int i = 0; i < num_slices; ++i)
    agents[i].save_checkpoint(
        (dir / "checkpoints" / ("slice_" + std::to_string(i) + ".qnet"))
            .string());
  if (explain) {
    write_waterfall_csv(dir / "waterfall_early.csv", names, waterfall_early);
    write_waterfall_csv(dir / "waterfall_late.csv", names, waterfall_late);
  }

  RunSummary sum =
      summarize_history(history, names, config.run.measurement_fraction);
  sum.mode = mode;
  sum.seed = seed;
  sum.train_iterations = train_iterations;
  sum.explainer_calls = explainer_calls;
  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  std::ofstream summary_out = open_out(dir / "run_summary.json");
  summary_out << summary_to_json(sum).dump(2) << '\n';
  return sum;
}

std::vector<RunSummary> run_experiment(const ExperimentConfig& config,
                                       Mode mode,
                                       const std::string& out_root) {
  fs::create_directories(out_root);
  std::vector<RunSummary> summaries;
  for (std::uint64_t seed : config.run.seeds) {
    const fs::path run_dir = fs::path(out_root) / ("seed_" + std::to_string(seed));
    summaries.push_back(run_single(config, mode, seed, run_dir.string()));
  }

  json per_seed = json::array();
  double mean_total = 0.0;
  for (const RunSummary& s : summaries) {
    per_seed.push_back(summary_to_json(s));
    mean_total += s.mean_total_env_reward;
  }
  mean_total /= static_cast<double>(summaries.size());
  json agg = {{"mode", to_string(mode)},
              {"num_seeds", summaries.size()},
              {"mean_total_env_reward", mean_total},
              {"runs", per_seed}};
  std::ofstream out = open_out(fs::path(out_root) / "summary.json");
  out << agg.dump(2) << '\n';
  return summaries;
}

void export_waterfall(const ExperimentConfig& config,
                      const std::string& checkpoint_dir, int slice_index,
                      std::uint64_t seed, int probes,
                      const std::string& out_csv) {
  config.validate();
  if (slice_index < 0 || slice_index >= config.gnb.num_slices)
    throw std::invalid_argument("slice index out of range");
  if (probes <= 0) throw std::invalid_argument("probes must be positive");

  const int num_slices = config.gnb.num_slices;
  std::vector<QNetwork> nets;
  std::vector<StateNormalizer> normalizers;
  for (int i = 0; i < num_slices; ++i) {
    const fs::path p =
        fs::path(checkpoint_dir) / ("slice_" + std::to_string(i) + ".qnet");
    nets.push_back(QNetwork::load(p.string()));
    normalizers.push_back(StateNormalizer::for_slice(config.gnb,
                                                     config.slices[i]));
  }

  SlicingEnv env(config.gnb, config.slices);
  env.reset(derive_seed(seed, RngConcern::traffic),
            derive_seed(seed, RngConcern::channel));

  const long rollout = probes + 64;
  std::vector<std::vector<double>> visited;
  std::vector<long> visited_t;
  for (long t = 0; t < rollout; ++t) {
    const std::vector<SliceObservation> obs = env.observations();
    std::vector<PrbAction> actions(num_slices);
    for (int i = 0; i < num_slices; ++i) {
      const int a = argmax_lowest(nets[i].forward(normalizers[i].normalize(obs[i])));
      actions[i].prbs = env.action_space().prbs_of(a);
    }
    visited.push_back(normalizers[slice_index].normalize(obs[slice_index]));
    visited_t.push_back(t);
    env.step(actions);
  }

  Rng bg_rng(derive_seed(seed, RngConcern::background, slice_index));
  const std::size_t pool_end = visited.size() - static_cast<std::size_t>(probes);
  const std::vector<std::vector<double>> pool(visited.begin(),
                                              visited.begin() + pool_end);
  const BackgroundSet background =
      sample_background(pool, config.xai.background_size, bg_rng);
  const ModelFn model =
      greedy_prb_model(nets[slice_index], config.gnb.chunk_prb);

  std::ofstream out = open_out(out_csv);
  out << "slice,t,probe,x_snr,x_demand,x_capacity,base_value,fx,"
         "shap_snr,shap_demand,shap_capacity\n";
  for (int k = 0; k < probes; ++k) {
    const std::size_t idx = pool_end + static_cast<std::size_t>(k);
    const Attribution a = exact_shapley(model, visited[idx], background);
    out << config.slices[slice_index].name << ',' << visited_t[idx] << ','
        << k;
    for (double v : visited[idx]) out << ',' << csv_double(v);
    out << ',' << csv_double(a.base_value) << ',' << csv_double(a.fx);
    for (double v : a.shap_values) out << ',' << csv_double(v);
    out << '\n';
  }
}

std::string summarize_run(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const ExperimentConfig config =
      load_experiment_config((dir / "config.json").string());
  const MetricsFile file = read_metrics_jsonl((dir / "metrics.jsonl").string());

  write_rewards_csv((dir / "rewards.csv").string(), file.slice_names,
                    file.records);
  write_latency_cdf_csv((dir / "latency_cdf.csv").string(), file.slice_names,
                        file.records, config.run.measurement_fraction);
  write_drops_box_csv((dir / "drops_box.csv").string(), file.slice_names,
                      file.records, config.run.measurement_fraction);

  RunSummary sum = summarize_history(file.records, file.slice_names,
                                     config.run.measurement_fraction);
  const std::size_t start = measurement_start(
      file.records.size(), config.run.measurement_fraction);

  std::ostringstream report;
  report << "intervals: " << file.records.size() << " (window: last "
         << file.records.size() - start << ")\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %12s %14s %16s %14s %10s\n", "slice",
                "mean_reward", "mean_latency", "median_latency",
                "drop_fraction", "violations");
  report << line;
  for (const SliceSummary& s : sum.slices) {
    std::snprintf(line, sizeof(line), "%-10s %12.4f %14.6f %16.6f %14.6f %10.4f\n",
                  s.name.c_str(), s.mean_env_reward, s.mean_latency_s,
                  s.median_latency_s, s.mean_drop_fraction,
                  s.sla_violation_fraction);
    report << line;
  }
  std::snprintf(line, sizeof(line), "mean total env reward (window): %.6f\n",
                sum.mean_total_env_reward);
  report << line;
  return report.str();
}

}  // namespace ranxrl
