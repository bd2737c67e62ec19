#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranxrl/rng.hpp"

namespace ranxrl {

// Radio configuration of one gNB.
struct GnbConfig {
  int capacity_prb = 100;           // C, total PRBs
  int chunk_prb = 10;               // smallest allocation unit
  double prb_bandwidth_hz = 180000.0;
  double interval_seconds = 1.0;    // decision interval length
  double demand_unit_bits = 1e4;    // granularity of the Poisson traffic draws
  int num_slices = 3;

  void validate() const;
};

// Per-slice traffic/channel model and SLA.
struct SliceSpec {
  std::string name;
  double sla_latency_s = 0.0;    // latency ceiling
  double mean_demand_bits = 0.0; // mean offered traffic per interval
  double mean_snr_db = 25.0;     // mean of the channel quality distribution

  void validate() const;
};

// What one agent sees at the start of an interval.
struct SliceObservation {
  double snr_db = 0.0;
  double demand_bits = 0.0;
  int remaining_capacity_prb = 0;
};

// Discrete PRB allocation, a multiple of the chunk size.
struct PrbAction {
  int prbs = 0;
};

// The discrete action set {0, chunk, 2*chunk, ..., capacity}.
class ActionSpace {
 public:
  ActionSpace(int capacity_prb, int chunk_prb)
      : capacity_prb_(capacity_prb), chunk_prb_(chunk_prb) {}

  int size() const { return capacity_prb_ / chunk_prb_ + 1; }
  int prbs_of(int index) const { return index * chunk_prb_; }
  int index_of(int prbs) const { return prbs / chunk_prb_; }
  bool contains(int prbs) const {
    return prbs >= 0 && prbs <= capacity_prb_ && prbs % chunk_prb_ == 0;
  }

 private:
  int capacity_prb_;
  int chunk_prb_;
};

// Outcome of serving one slice for one interval.
struct ServeResult {
  double latency_s = 0.0;
  double served_bits = 0.0;
  double dropped_bits = 0.0;
  double drop_rate_bps = 0.0;
};

struct SliceStepMetrics {
  int allocated_prb = 0;    // what the agent asked for
  int granted_prb = 0;      // after capacity clipping
  double snr_db = 0.0;
  double demand_bits = 0.0;
  double capacity_bits = 0.0;  // granted capacity times interval length
  double latency_s = 0.0;
  double served_bits = 0.0;
  double dropped_bits = 0.0;
  double drop_fraction = 0.0;
  double env_reward = 0.0;
};

struct StepMetrics {
  long t = 0;
  std::vector<SliceStepMetrics> slices;
};

// PRB allocation -> transmission capacity in bits/s at the given channel quality.
double gamma_capacity(int prbs, double snr_db, double prb_bandwidth_hz);

// Poisson offered traffic, in multiples of the configured demand unit.
double sample_demand(const GnbConfig& gnb, const SliceSpec& spec, Rng& rng);

// Rayleigh-amplitude channel: linear SNR is exponential with the configured
// mean; returns dB, with the linear value floored at 1e-6 to keep logs finite.
double sample_snr(const SliceSpec& spec, Rng& rng);

// Serve one interval's demand at the capacity implied by (prbs, snr). Demand
// that cannot be transmitted within the SLA deadline is dropped; the reported
// latency never exceeds the deadline.
ServeResult serve_interval(double demand_bits, int prbs, double snr_db,
                           double sla_latency_s, double prb_bandwidth_hz);

// Piecewise allocation-gap reward. The gap alpha is granted capacity minus
// demand rate (bits/s); the branch bounds scale with one chunk's capacity at
// the current SNR. The function is intentionally discontinuous at the lower
// bound.
double env_reward(double alpha_gap_bps, double snr_db, int chunk_prb,
                  double prb_bandwidth_hz);

struct StepResult {
  std::vector<SliceObservation> next_observations;
  std::vector<double> rewards;
  StepMetrics metrics;
};

// Discrete-time fluid simulator of one gNB shared by |I| slices. Slices are
// processed in fixed index order; over-requests are clipped to what is left.
// No backlog carries across intervals.
class SlicingEnv {
 public:
  SlicingEnv(GnbConfig gnb, std::vector<SliceSpec> slices);

  // Full reset: reseeds the traffic/channel streams and samples initial
  // observations with the whole capacity visible to every slice.
  std::vector<SliceObservation> reset(std::uint64_t traffic_seed,
                                      std::uint64_t channel_seed);

  // Episode-boundary reset: fresh observations, streams keep advancing.
  std::vector<SliceObservation> episode_reset();

  StepResult step(const std::vector<PrbAction>& actions);

  const GnbConfig& gnb() const { return gnb_; }
  const std::vector<SliceSpec>& slices() const { return slices_; }
  const ActionSpace& action_space() const { return action_space_; }
  const std::vector<SliceObservation>& observations() const { return obs_; }
  long interval_index() const { return t_; }

  double gamma_capacity(int prbs, double snr_db) const {
    return ranxrl::gamma_capacity(prbs, snr_db, gnb_.prb_bandwidth_hz);
  }
  double env_reward(double alpha_gap_bps, double snr_db) const {
    return ranxrl::env_reward(alpha_gap_bps, snr_db, gnb_.chunk_prb,
                              gnb_.prb_bandwidth_hz);
  }

 private:
  std::vector<SliceObservation> sample_initial_observations();

  GnbConfig gnb_;
  std::vector<SliceSpec> slices_;
  ActionSpace action_space_;
  Rng traffic_rng_;
  Rng channel_rng_;
  std::vector<SliceObservation> obs_;
  long t_ = 0;
  bool ready_ = false;
};

}  // namespace ranxrl
