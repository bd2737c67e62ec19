#include "ranxrl/slicing_env.hpp"

#include <cmath>
#include <stdexcept>

namespace ranxrl {

namespace {
constexpr double kLinearSnrFloor = 1e-6;  // -60 dB
}

void GnbConfig::validate() const {
  if (capacity_prb <= 0) throw std::invalid_argument("capacity_prb must be > 0");
  if (chunk_prb <= 0) throw std::invalid_argument("chunk_prb must be > 0");
  if (capacity_prb % chunk_prb != 0)
    throw std::invalid_argument("chunk_prb must divide capacity_prb");
  if (interval_seconds <= 0.0)
    throw std::invalid_argument("interval_seconds must be > 0");
  if (prb_bandwidth_hz <= 0.0)
    throw std::invalid_argument("prb_bandwidth_hz must be > 0");
  if (demand_unit_bits <= 0.0)
    throw std::invalid_argument("demand_unit_bits must be > 0");
  if (num_slices <= 0) throw std::invalid_argument("num_slices must be > 0");
}

void SliceSpec::validate() const {
  if (sla_latency_s <= 0.0)
    throw std::invalid_argument("sla_latency_s must be > 0 for slice " + name);
  if (mean_demand_bits <= 0.0)
    throw std::invalid_argument("mean_demand_bits must be > 0 for slice " + name);
}

double gamma_capacity(int prbs, double snr_db, double prb_bandwidth_hz) {
  if (prbs <= 0) return 0.0;
  const double snr_linear = std::pow(10.0, snr_db / 10.0);
  return static_cast<double>(prbs) * prb_bandwidth_hz * std::log2(1.0 + snr_linear);
}

double sample_demand(const GnbConfig& gnb, const SliceSpec& spec, Rng& rng) {
  const double mean_units = spec.mean_demand_bits / gnb.demand_unit_bits;
  std::poisson_distribution<long long> dist(mean_units);
  return static_cast<double>(dist(rng)) * gnb.demand_unit_bits;
}

double sample_snr(const SliceSpec& spec, Rng& rng) {
  // Squared Rayleigh amplitude is exponential; sample the linear SNR directly.
  const double mean_linear = std::pow(10.0, spec.mean_snr_db / 10.0);
  std::exponential_distribution<double> dist(1.0 / mean_linear);
  double linear = dist(rng);
  if (linear < kLinearSnrFloor) linear = kLinearSnrFloor;
  return 10.0 * std::log10(linear);
}

ServeResult serve_interval(double demand_bits, int prbs, double snr_db,
                           double sla_latency_s, double prb_bandwidth_hz) {
  ServeResult r;
  if (demand_bits <= 0.0) return r;

  const double cap = gamma_capacity(prbs, snr_db, prb_bandwidth_hz);
  if (demand_bits <= cap * sla_latency_s) {
    r.latency_s = demand_bits / cap;
    r.served_bits = demand_bits;
    return r;
  }
  // Deadline exceeded: the deficit rate d makes the effective service rate
  // cap + d = demand/sla, so latency lands exactly on the deadline.
  r.drop_rate_bps = demand_bits / sla_latency_s - cap;
  r.dropped_bits = demand_bits - cap * sla_latency_s;
  r.served_bits = cap * sla_latency_s;
  // guard the deadline against the last-ulp rounding of cap + d
  r.latency_s = std::min(demand_bits / (cap + r.drop_rate_bps), sla_latency_s);
  return r;
}

double env_reward(double alpha_gap_bps, double snr_db, int chunk_prb,
                  double prb_bandwidth_hz) {
  const double g = gamma_capacity(chunk_prb, snr_db, prb_bandwidth_hz);
  const double rho_up = 2.0 * g;
  const double rho_lower = -g;
  if (alpha_gap_bps < rho_lower) return alpha_gap_bps - 4.0 * rho_lower;
  if (alpha_gap_bps > rho_up) return -(alpha_gap_bps - rho_up);
  const double x = alpha_gap_bps / rho_up;
  return (1.0 - x) * x;
}

SlicingEnv::SlicingEnv(GnbConfig gnb, std::vector<SliceSpec> slices)
    : gnb_(gnb),
      slices_(std::move(slices)),
      action_space_(gnb.capacity_prb, gnb.chunk_prb) {
  gnb_.num_slices = static_cast<int>(slices_.size());
  gnb_.validate();
  if (slices_.empty()) throw std::invalid_argument("need at least one slice");
  for (const auto& s : slices_) s.validate();
}

std::vector<SliceObservation> SlicingEnv::sample_initial_observations() {
  std::vector<SliceObservation> obs(slices_.size());
  for (std::size_t i = 0; i < slices_.size(); ++i) {
    obs[i].demand_bits = sample_demand(gnb_, slices_[i], traffic_rng_);
    obs[i].snr_db = sample_snr(slices_[i], channel_rng_);
    obs[i].remaining_capacity_prb = gnb_.capacity_prb;
  }
  return obs;
}

std::vector<SliceObservation> SlicingEnv::reset(std::uint64_t traffic_seed,
                                                std::uint64_t channel_seed) {
  traffic_rng_.seed(traffic_seed);
  channel_rng_.seed(channel_seed);
  t_ = 0;
  obs_ = sample_initial_observations();
  ready_ = true;
  return obs_;
}

std::vector<SliceObservation> SlicingEnv::episode_reset() {
  if (!ready_) throw std::logic_error("episode_reset before reset");
  obs_ = sample_initial_observations();
  return obs_;
}

StepResult SlicingEnv::step(const std::vector<PrbAction>& actions) {
  if (!ready_) throw std::logic_error("step before reset");
  if (actions.size() != slices_.size())
    throw std::invalid_argument("need exactly one action per slice");
  for (const auto& a : actions) {
    if (!action_space_.contains(a.prbs))
      throw std::invalid_argument("invalid action: " + std::to_string(a.prbs) +
                                  " PRBs is not in the action space");
  }

  const std::size_t n = slices_.size();
  StepResult out;
  out.rewards.resize(n);
  out.metrics.t = t_;
  out.metrics.slices.resize(n);

  // Sequential capacity sharing: each slice sees what is left after the
  // slices before it, and the next observation reports that same view.
  std::vector<int> next_nu(n);
  int remaining = gnb_.capacity_prb;
  for (std::size_t i = 0; i < n; ++i) {
    next_nu[i] = remaining;
    auto& m = out.metrics.slices[i];
    m.allocated_prb = actions[i].prbs;
    m.granted_prb = std::min(actions[i].prbs, remaining);
    remaining -= m.granted_prb;

    const SliceObservation& o = obs_[i];
    m.snr_db = o.snr_db;
    m.demand_bits = o.demand_bits;
    m.capacity_bits =
        gamma_capacity(m.granted_prb, o.snr_db) * gnb_.interval_seconds;

    const ServeResult served =
        serve_interval(o.demand_bits, m.granted_prb, o.snr_db,
                       slices_[i].sla_latency_s, gnb_.prb_bandwidth_hz);
    m.latency_s = served.latency_s;
    m.served_bits = served.served_bits;
    m.dropped_bits = served.dropped_bits;
    m.drop_fraction =
        o.demand_bits > 0.0 ? served.dropped_bits / o.demand_bits : 0.0;

    const double alpha = gamma_capacity(m.granted_prb, o.snr_db) -
                         o.demand_bits / gnb_.interval_seconds;
    m.env_reward = env_reward(alpha, o.snr_db);
    out.rewards[i] = m.env_reward;
  }

  out.next_observations.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.next_observations[i].demand_bits =
        sample_demand(gnb_, slices_[i], traffic_rng_);
    out.next_observations[i].snr_db = sample_snr(slices_[i], channel_rng_);
    out.next_observations[i].remaining_capacity_prb = next_nu[i];
  }
  obs_ = out.next_observations;
  ++t_;
  return out;
}

}  // namespace ranxrl
