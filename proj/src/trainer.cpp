#include "anneal_rbm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include "anneal_rbm/errors.hpp"
#include "anneal_rbm/ising.hpp"
#include "anneal_rbm/metrics.hpp"
#include "anneal_rbm/parallel.hpp"

namespace anneal_rbm {

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::classical: return "classical";
    case Method::forward: return "forward";
    case Method::reverse: return "reverse";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "classical") return Method::classical;
  if (name == "forward") return Method::forward;
  if (name == "reverse") return Method::reverse;
  throw ContractViolation("unknown training method '" + name + "'");
}

void TrainConfig::validate() const {
  if (n_hidden < 1) throw ContractViolation("n_hidden must be positive");
  if (epochs < 0) throw ContractViolation("epochs must be non-negative");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ContractViolation("eta must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ContractViolation("alpha must be positive");
  if (n_g < 1) throw ContractViolation("n_g must be at least 1");
  if (cycles < 1) throw ContractViolation("cycles must be at least 1");
  if (!(init.sigma > 0.0)) throw ContractViolation("init sigma must be positive");
  if (!(init.lo < init.hi)) throw ContractViolation("empty truncation interval");
  if (ll_every < 1 || reconstruction_every < 1)
    throw ContractViolation("metric cadences must be positive");
  if (reconstruction_n_g < 1 || reconstruction_trials < 1)
    throw ContractViolation("reconstruction budget must be positive");
}

namespace {

double truncated_gauss(std::normal_distribution<double>& gauss, Rng& rng, const InitSpec& init) {
  // Rejection is cheap unless the interval sits far in a tail.
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const double x = init.mu + init.sigma * gauss(rng);
    if (x >= init.lo && x <= init.hi) return x;
  }
  throw ContractViolation("truncation interval has negligible probability mass");
}

}  // namespace

RbmParams init_rbm(int n_visible, int n_hidden, const InitSpec& init, std::uint64_t seed) {
  if (n_visible < 1 || n_hidden < 1) throw ContractViolation("layer sizes must be positive");
  return init_rbm(ConnectivityMask::Ones(n_visible, n_hidden), init, seed);
}

RbmParams init_rbm(const ConnectivityMask& mask, const InitSpec& init, std::uint64_t seed) {
  if (!(init.lo < init.hi)) throw ContractViolation("empty truncation interval");
  if (!(init.sigma > 0.0) || !std::isfinite(init.sigma) || !std::isfinite(init.mu))
    throw ContractViolation("init sigma must be positive and finite");
  const auto n_v = mask.rows();
  const auto n_h = mask.cols();
  Rng rng = make_stream(seed, Stream::init);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd w(n_v, n_h);
  Eigen::VectorXd a(n_v), b(n_h);
  for (Eigen::Index i = 0; i < n_v; ++i)
    for (Eigen::Index j = 0; j < n_h; ++j) {
      const double x = truncated_gauss(gauss, rng, init);
      w(i, j) = mask(i, j) ? x : 0.0;
    }
  for (Eigen::Index i = 0; i < n_v; ++i) a[i] = truncated_gauss(gauss, rng, init);
  for (Eigen::Index j = 0; j < n_h; ++j) b[j] = truncated_gauss(gauss, rng, init);
  return RbmParams(std::move(w), std::move(a), std::move(b), mask);
}

PairStatistics sample_statistics(const std::vector<BinaryConfig>& samples, int n_v, int n_h) {
  if (samples.empty()) throw ContractViolation("no samples to average");
  PairStatistics s = PairStatistics::zeros(n_v, n_h);
  for (const BinaryConfig& cfg : samples) {
    for (int j = 0; j < n_h; ++j) {
      if (!cfg.h[j]) continue;
      s.h_mean[j] += 1.0;
      for (int i = 0; i < n_v; ++i)
        if (cfg.v[i]) s.vh(i, j) += 1.0;
    }
    for (int i = 0; i < n_v; ++i)
      if (cfg.v[i]) s.v_mean[i] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  s.vh /= n;
  s.v_mean /= n;
  s.h_mean /= n;
  return s;
}

NegativeResult negative_statistics(const RbmParams& rbm, const std::vector<BitVector>& data,
                                   const TrainConfig& cfg, const QuantumBackend* backend,
                                   std::uint64_t seed) {
  if (data.empty()) throw ContractViolation("negative statistics need a nonempty dataset");
  const int n_v = rbm.n_visible();
  const int n_h = rbm.n_hidden();
  NegativeResult out;

  if (cfg.method == Method::classical) {
    out.samples.resize(data.size());
    parallel_for(data.size(), [&](std::size_t k) {
      Rng rng = make_stream(seed, Stream::negative, {k});
      out.samples[k] = gibbs_chain(rbm, data[k], cfg.n_g, rng);
    });
  } else {
    if (backend == nullptr) throw ContractViolation("annealing methods need an embedding backend");
    const IsingProblem logical = to_ising(rbm, cfg.alpha);
    const PhysicalProblem physical = lower_problem(logical, backend->embedding, backend->graph);
    SampleBatch batch;
    if (cfg.method == Method::forward) {
      batch = forward_sample(physical, backend->forward_schedule, cfg.cycles, backend->emulator, seed);
    } else {
      std::vector<SpinConfig> starts(cfg.cycles);
      const std::size_t n_data = data.size();
      for (int c = 0; c < cfg.cycles; ++c) {
        const std::size_t group = static_cast<std::size_t>(c) * n_data / cfg.cycles;
        Rng rng = make_stream(seed, Stream::negative, {static_cast<std::uint64_t>(c)});
        BinaryConfig start{data[group], sample_layer(rbm, Layer::hidden, data[group], rng)};
        starts[c] = to_spins(start);
      }
      batch = reverse_sample(physical, starts, backend->reverse_schedule, cfg.cycles, backend->emulator, seed);
    }
    if (batch.samples.empty()) throw ContractViolation("every annealing sample was discarded");
    out.break_rate = batch.break_rate();
    out.samples = std::move(batch.samples);
  }
  out.stats = sample_statistics(out.samples, n_v, n_h);
  out.min_energy = std::numeric_limits<double>::infinity();
  for (const BinaryConfig& s : out.samples) out.min_energy = std::min(out.min_energy, energy(rbm, s));
  return out;
}

RbmParams update_step(const RbmParams& rbm, const PairStatistics& pos, const PairStatistics& neg,
                      double eta) {
  RbmParams next = rbm;
  next.add_to_weights(eta * (pos.vh - neg.vh));
  next.add_to_visible_bias(eta * (pos.v_mean - neg.v_mean));
  next.add_to_hidden_bias(eta * (pos.h_mean - neg.h_mean));
  return next;
}

const EpochRecord* TrainHistory::at_epoch(int epoch) const {
  for (const EpochRecord& r : records)
    if (r.epoch == epoch) return &r;
  return nullptr;
}

TrainResult train(const TrainConfig& cfg, const std::vector<BitVector>& data,
                  const QuantumBackend* backend, const ConnectivityMask* mask,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.empty()) throw ContractViolation("training needs a nonempty dataset");
  const int n_v = static_cast<int>(data.front().size());
  const int n_h = cfg.n_hidden;
  if (mask != nullptr && (mask->rows() != n_v || mask->cols() != n_h))
    throw ContractViolation("mask shape differs from the layer sizes");
  if (backend != nullptr && cfg.method != Method::classical &&
      (backend->embedding.n_visible != n_v || backend->embedding.n_hidden != n_h))
    throw ContractViolation("embedding layer sizes differ from the model");
  for (const BitVector& v : data)
    if (static_cast<int>(v.size()) != n_v) throw ContractViolation("dataset vectors differ in length");
  if (cfg.method != Method::classical && backend == nullptr)
    throw ContractViolation("annealing methods need an embedding backend");

  RbmParams rbm = mask ? init_rbm(*mask, cfg.init, cfg.seed) : init_rbm(n_v, n_h, cfg.init, cfg.seed);

  TrainResult result{rbm, {}};
  auto evaluate = [&](int epoch, const NegativeResult* neg) {
    const bool last = epoch == cfg.epochs;
    const bool ll_due = epoch % cfg.ll_every == 0 || last;
    const bool rec_due = epoch % cfg.reconstruction_every == 0 || last;
    if (!ll_due && !rec_due) return;
    EpochRecord r;
    r.epoch = epoch;
    r.checksum = rbm.checksum();
    if (ll_due) {
      const double log_z = exact_log_partition(rbm);
      r.ll = log_likelihood_av(rbm, data, log_z);
      DeltaProbability d = delta_probability(rbm, data, log_z);
      r.delta_prob = d.total;
      r.bottom_half = d.bottom_half;
      r.per_image = std::move(d.per_image);
    }
    if (rec_due && !cfg.clamped.empty())
      r.reconstruction = reconstruction_score(rbm, data, cfg.clamped, cfg.reconstruction_n_g,
                                              cfg.reconstruction_trials,
                                              derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch)}));
    if (neg != nullptr) {
      if (cfg.method != Method::classical) r.break_rate = neg->break_rate;
      r.min_sample_energy = neg->min_energy;
    }
    result.history.records.push_back(std::move(r));
  };

  evaluate(0, nullptr);
  if (on_epoch) on_epoch(0, rbm);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const PairStatistics pos = positive_statistics(rbm, data);
    const std::uint64_t epoch_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::negative), static_cast<std::uint64_t>(epoch)});
    NegativeResult neg = negative_statistics(rbm, data, cfg, backend, epoch_seed);
    rbm = update_step(rbm, pos, neg.stats, cfg.eta);
    evaluate(epoch, &neg);
    if (on_epoch) on_epoch(epoch, rbm);
  }
  result.rbm = rbm;
  return result;
}

namespace {

void put(std::ostream& out, const std::optional<double>& x) {
  if (x) out << *x;
}

}  // namespace

void write_history_csv(std::ostream& out, const TrainHistory& h) {
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "epoch,LL_av,reconstruction,delta_prob,break_rate,min_sample_energy\n";
  for (const EpochRecord& r : h.records) {
    out << r.epoch << ',';
    put(out, r.ll);
    out << ',';
    put(out, r.reconstruction);
    out << ',';
    put(out, r.delta_prob);
    out << ',';
    put(out, r.break_rate);
    out << ',';
    put(out, r.min_sample_energy);
    out << '\n';
  }
  out.precision(precision);
}

void write_band_csv(std::ostream& out, const TrainHistory& h) {
  std::size_t width = 0;
  for (const EpochRecord& r : h.records) width = std::max(width, r.per_image.size());
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "epoch";
  for (std::size_t k = 0; k < width; ++k) out << ",p" << k;
  out << '\n';
  for (const EpochRecord& r : h.records) {
    if (r.per_image.empty()) continue;
    out << r.epoch;
    for (double p : r.per_image) out << ',' << p;
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace anneal_rbm
