#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anneal_rbm/annealer.hpp"
#include "anneal_rbm/chimera.hpp"
#include "anneal_rbm/rbm.hpp"

namespace anneal_rbm {

enum class Method { classical, forward, reverse };

const char* to_string(Method m) noexcept;
Method parse_method(const std::string& name);

/// Truncated Gaussian for the initial parameters.
struct InitSpec {
  double mu = 0.0;
  double sigma = 2.0;
  double lo = -3.0;
  double hi = 3.0;
};

/// Everything the annealing methods need besides the RBM itself.
struct QuantumBackend {
  HardwareGraph graph;
  Embedding embedding;
  EmulatorConfig emulator;
  AnnealSchedule forward_schedule;
  AnnealSchedule reverse_schedule;
};

struct TrainConfig {
  int n_hidden = 16;
  int epochs = 1000;
  double eta = 0.15;
  double alpha = 0.32;
  Method method = Method::classical;
  int n_g = 200;
  int cycles = 150;
  InitSpec init;
  std::uint64_t seed = 1;
  int ll_every = 10;
  int reconstruction_every = 100;
  int reconstruction_n_g = 500;
  int reconstruction_trials = 100;
  std::vector<int> clamped;  // pixels held fixed when scoring reconstruction

  void validate() const;
};

/// Weights then visible then hidden biases, each drawn by rejection from
/// N(mu, sigma^2) restricted to [lo, hi]. Masked weights are stored as zero.
RbmParams init_rbm(int n_visible, int n_hidden, const InitSpec& init, std::uint64_t seed);
RbmParams init_rbm(const ConnectivityMask& mask, const InitSpec& init, std::uint64_t seed);

/// Empirical v, h and v h' means of a sample set.
PairStatistics sample_statistics(const std::vector<BinaryConfig>& samples, int n_v, int n_h);

struct NegativeResult {
  PairStatistics stats;
  std::vector<BinaryConfig> samples;
  double break_rate = 0.0;  // zero for the classical method
  double min_energy = 0.0;
};

/// Model-side statistics by the chosen method.
///
/// classical: one CD-n_g chain from every data vector.
/// forward: map with alpha, lower onto every copy, `cycles` forward anneals.
/// reverse: cycle c starts from data vector floor(c N_D / cycles) with hidden
///   units from one exact conditional draw, then a reverse anneal.
/// Annealing methods throw ContractViolation without a backend.
NegativeResult negative_statistics(const RbmParams& rbm, const std::vector<BitVector>& data,
                                   const TrainConfig& cfg, const QuantumBackend* backend,
                                   std::uint64_t seed);

/// w += eta (pos.vh - neg.vh) on present connections; a, b likewise.
RbmParams update_step(const RbmParams& rbm, const PairStatistics& pos, const PairStatistics& neg,
                      double eta);

struct EpochRecord {
  int epoch = 0;
  std::uint64_t checksum = 0;
  std::optional<double> ll;
  std::optional<double> reconstruction;
  std::optional<double> delta_prob;
  std::optional<double> bottom_half;
  std::optional<double> break_rate;
  std::optional<double> min_sample_energy;
  std::vector<double> per_image;  // filled together with delta_prob
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  const EpochRecord* at_epoch(int epoch) const;
};

struct TrainResult {
  RbmParams rbm;
  TrainHistory history;
};

/// Called with the parameters after every epoch, epoch 0 being the initial state.
using EpochCallback = std::function<void(int epoch, const RbmParams& rbm)>;

/// Full-batch training. Records epoch 0, every ll_every-th epoch, every
/// reconstruction_every-th epoch and the last one. `mask` restricts the
/// weights (sparse runs); the backend's embedding must cover it.
TrainResult train(const TrainConfig& cfg, const std::vector<BitVector>& data,
                  const QuantumBackend* backend, const ConnectivityMask* mask = nullptr,
                  const EpochCallback& on_epoch = {});

/// epoch,LL_av,reconstruction,delta_prob,break_rate,min_sample_energy
/// Missing values are left empty.
void write_history_csv(std::ostream& out, const TrainHistory& h);

/// epoch then one probability column per dataset image, for the recorded
/// epochs that carry them.
void write_band_csv(std::ostream& out, const TrainHistory& h);

}  // namespace anneal_rbm
