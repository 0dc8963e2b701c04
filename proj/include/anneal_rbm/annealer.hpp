#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "anneal_rbm/chimera.hpp"
#include "anneal_rbm/ising.hpp"

namespace anneal_rbm {

enum class ScheduleMode { forward, reverse };

/// Piecewise-linear s(t), t in microseconds.
struct AnnealSchedule {
  ScheduleMode mode = ScheduleMode::forward;
  std::vector<std::pair<double, double>> points;

  double duration() const { return points.empty() ? 0.0 : points.back().first; }
  double s_at(double t) const;
  /// Throws ContractViolation unless times increase strictly from 0, every s
  /// lies in [0, 1], forward runs 0 -> 1, and reverse starts and ends at 1.
  void validate() const;
};

AnnealSchedule make_forward_schedule(double anneal_us);
/// [(0,1), (down, s_pause), (down+pause, s_pause), (down+pause+up, 1)];
/// s_pause must lie strictly inside (0, 1).
AnnealSchedule make_reverse_schedule(double down_us, double pause_us, double up_us, double s_pause);

/// Classical stand-in for the annealer.
///
/// Each sweep visits every qubit once with the heat-bath rule
///   P(flip) = mu(s) / (1 + exp(beta(s) dE)),
/// beta(s) = min(1, s / s_target) / t_eff and mu(s) = 1 up to s_target,
/// falling linearly to 0 at s = 1. Since mu is the same for a flip and its
/// reverse, the rule keeps Boltzmann at beta(s) stationary; mu only sets how
/// fast the state can still move, so the dynamics freeze at s = 1.
/// With chain_moves on, every sweep ends with one heat-bath proposal per
/// chain to flip the whole chain at once; single-qubit moves alone would
/// need a chain break for every logical flip.
struct EmulatorConfig {
  double t_eff = 1.0;
  double sweeps_per_us = 25.0;
  double s_target = 0.25;
  double field_noise_sd = 0.0;
  double coupling_noise_sd = 0.0;
  bool chain_moves = true;
  ChainPolicy chain_policy = ChainPolicy::majority_vote;

  void validate() const;
  double beta(double s) const;
  double mobility(double s) const;
  std::size_t sweeps(const AnnealSchedule& sched) const;
};

struct SampleBatch {
  int n_visible = 0;
  std::vector<BinaryConfig> samples;
  std::vector<int> copy_ids;
  std::vector<int> breaks;
  /// Logical Hamming distance of each sample from its starting configuration
  /// (for forward runs: the majority-vote reading of the random initial spins).
  std::vector<int> start_distance;
  AnnealSchedule schedule;
  std::size_t chains_read = 0;
  std::size_t chains_broken = 0;
  std::size_t rejected = 0;

  std::size_t size() const noexcept { return samples.size(); }
  double break_rate() const noexcept {
    return chains_read == 0 ? 0.0 : static_cast<double>(chains_broken) / chains_read;
  }
  double mean_start_distance() const;
};

/// One sample per cycle and copy. Each (cycle, copy) pair draws from its own
/// stream derived from `seed`, so results do not depend on thread count.
SampleBatch forward_sample(const PhysicalProblem& p, const AnnealSchedule& sched, int cycles,
                           const EmulatorConfig& cfg, std::uint64_t seed);

/// Cycle c starts every copy from starts[c % starts.size()], chains unanimous.
SampleBatch reverse_sample(const PhysicalProblem& p, std::span<const SpinConfig> starts,
                           const AnnealSchedule& sched, int cycles, const EmulatorConfig& cfg,
                           std::uint64_t seed);

/// Rows "copy,breaks,v,h" with v and h written as bit strings.
void write_batch_csv(std::ostream& out, const SampleBatch& batch);

}  // namespace anneal_rbm
