#include "ranxrl/config.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ranxrl {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const char* section,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(std::string("unknown key \"") + it.key() +
                                  "\" in " + section);
  }
}

GnbConfig gnb_from_json(const json& j) {
  require_keys(j, "gnb",
               {"capacity_prb", "chunk_prb", "prb_bandwidth_hz",
                "interval_seconds", "demand_unit_bits"});
  GnbConfig g;
  g.capacity_prb = j.value("capacity_prb", g.capacity_prb);
  g.chunk_prb = j.value("chunk_prb", g.chunk_prb);
  g.prb_bandwidth_hz = j.value("prb_bandwidth_hz", g.prb_bandwidth_hz);
  g.interval_seconds = j.value("interval_seconds", g.interval_seconds);
  g.demand_unit_bits = j.value("demand_unit_bits", g.demand_unit_bits);
  return g;
}

json gnb_to_json(const GnbConfig& g) {
  return {{"capacity_prb", g.capacity_prb},
          {"chunk_prb", g.chunk_prb},
          {"prb_bandwidth_hz", g.prb_bandwidth_hz},
          {"interval_seconds", g.interval_seconds},
          {"demand_unit_bits", g.demand_unit_bits}};
}

SliceSpec slice_from_json(const json& j) {
  require_keys(j, "slices[]",
               {"name", "sla_latency_s", "mean_demand_bits", "mean_snr_db"});
  SliceSpec s;
  if (!j.contains("name")) throw std::invalid_argument("slice entry needs a name");
  s.name = j.at("name").get<std::string>();
  s.sla_latency_s = j.value("sla_latency_s", s.sla_latency_s);
  s.mean_demand_bits = j.value("mean_demand_bits", s.mean_demand_bits);
  s.mean_snr_db = j.value("mean_snr_db", s.mean_snr_db);
  return s;
}

json slice_to_json(const SliceSpec& s) {
  return {{"name", s.name},
          {"sla_latency_s", s.sla_latency_s},
          {"mean_demand_bits", s.mean_demand_bits},
          {"mean_snr_db", s.mean_snr_db}};
}

AgentConfig agent_from_json(const json& j) {
  require_keys(j, "agent",
               {"gamma", "learning_rate", "batch_size", "tau", "epsilon_start",
                "epsilon_end", "epsilon_decay_steps", "start_timesteps",
                "buffer_capacity", "hidden_sizes", "clip_grad_norm"});
  AgentConfig a;
  a.gamma = j.value("gamma", a.gamma);
  a.learning_rate = j.value("learning_rate", a.learning_rate);
  a.batch_size = j.value("batch_size", a.batch_size);
  a.tau = j.value("tau", a.tau);
  a.epsilon_start = j.value("epsilon_start", a.epsilon_start);
  a.epsilon_end = j.value("epsilon_end", a.epsilon_end);
  a.epsilon_decay_steps = j.value("epsilon_decay_steps", a.epsilon_decay_steps);
  a.start_timesteps = j.value("start_timesteps", a.start_timesteps);
  a.buffer_capacity = j.value("buffer_capacity", a.buffer_capacity);
  if (j.contains("hidden_sizes"))
    a.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  a.clip_grad_norm = j.value("clip_grad_norm", a.clip_grad_norm);
  return a;
}

json agent_to_json(const AgentConfig& a) {
  return {{"gamma", a.gamma},
          {"learning_rate", a.learning_rate},
          {"batch_size", a.batch_size},
          {"tau", a.tau},
          {"epsilon_start", a.epsilon_start},
          {"epsilon_end", a.epsilon_end},
          {"epsilon_decay_steps", a.epsilon_decay_steps},
          {"start_timesteps", a.start_timesteps},
          {"buffer_capacity", a.buffer_capacity},
          {"hidden_sizes", a.hidden_sizes},
          {"clip_grad_norm", a.clip_grad_norm}};
}

XaiConfig xai_from_json(const json& j) {
  require_keys(j, "xai",
               {"mu", "entropy_floor", "background_size",
                "background_refresh_period"});
  XaiConfig x;
  x.mu = j.value("mu", x.mu);
  x.entropy_floor = j.value("entropy_floor", x.entropy_floor);
  x.background_size = j.value("background_size", x.background_size);
  x.background_refresh_period =
      j.value("background_refresh_period", x.background_refresh_period);
  return x;
}

json xai_to_json(const XaiConfig& x) {
  return {{"mu", x.mu},
          {"entropy_floor", x.entropy_floor},
          {"background_size", x.background_size},
          {"background_refresh_period", x.background_refresh_period}};
}

RunControls run_from_json(const json& j) {
  require_keys(j, "run",
               {"max_timesteps", "episode_length", "seeds",
                "measurement_fraction"});
  RunControls r;
  r.max_timesteps = j.value("max_timesteps", r.max_timesteps);
  r.episode_length = j.value("episode_length", r.episode_length);
  if (j.contains("seeds"))
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.measurement_fraction =
      j.value("measurement_fraction", r.measurement_fraction);
  return r;
}

json run_to_json(const RunControls& r) {
  return {{"max_timesteps", r.max_timesteps},
          {"episode_length", r.episode_length},
          {"seeds", r.seeds},
          {"measurement_fraction", r.measurement_fraction}};
}

}  // namespace

void RunControls::validate() const {
  if (max_timesteps <= 0)
    throw std::invalid_argument("max_timesteps must be positive");
  if (episode_length <= 0)
    throw std::invalid_argument("episode_length must be positive");
  if (seeds.empty()) throw std::invalid_argument("at least one seed required");
  if (measurement_fraction <= 0.0 || measurement_fraction > 1.0)
    throw std::invalid_argument("measurement_fraction must be in (0, 1]");
}

void ExperimentConfig::validate() const {
  gnb.validate();
  if (static_cast<int>(slices.size()) != gnb.num_slices)
    throw std::invalid_argument("slice list does not match gnb.num_slices");
  for (const auto& s : slices) s.validate();
  agent.validate();
  xai.validate();
  run.validate();
  if (agent.start_timesteps >= run.max_timesteps)
    throw std::invalid_argument("warmup consumes the whole run");
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  cfg.slices = {
      {"urllc", 0.010, 4.0e6, 25.0},
      {"embb", 0.040, 2.0e7, 25.0},
      {"mmtc", 0.020, 8.0e6, 25.0},
  };
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  require_keys(j, "config root", {"gnb", "slices", "agent", "xai", "run"});
  ExperimentConfig cfg = default_experiment_config();
  if (j.contains("gnb")) cfg.gnb = gnb_from_json(j.at("gnb"));
  if (j.contains("slices")) {
    cfg.slices.clear();
    for (const auto& entry : j.at("slices"))
      cfg.slices.push_back(slice_from_json(entry));
  }
  cfg.gnb.num_slices = static_cast<int>(cfg.slices.size());
  if (j.contains("agent")) cfg.agent = agent_from_json(j.at("agent"));
  if (j.contains("xai")) cfg.xai = xai_from_json(j.at("xai"));
  if (j.contains("run")) cfg.run = run_from_json(j.at("run"));
  cfg.validate();
  return cfg;
}

std::string render_experiment_config(const ExperimentConfig& config) {
  json j;
  j["gnb"] = gnb_to_json(config.gnb);
  j["slices"] = json::array();
  for (const auto& s : config.slices) j["slices"].push_back(slice_to_json(s));
  j["agent"] = agent_to_json(config.agent);
  j["xai"] = xai_to_json(config.xai);
  j["run"] = run_to_json(config.run);
  return j.dump(2) + "\n";
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return parse_experiment_config(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_experiment_config(const ExperimentConfig& config,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << render_experiment_config(config);
}

}  // namespace ranxrl
