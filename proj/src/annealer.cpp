#include "anneal_rbm/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <random>
#include <string>

#include "anneal_rbm/errors.hpp"
#include "anneal_rbm/parallel.hpp"

namespace anneal_rbm {

double AnnealSchedule::s_at(double t) const {
  if (points.empty()) throw ContractViolation("empty schedule");
  if (t <= points.front().first) return points.front().second;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const auto [t1, s1] = points[k];
    if (t <= t1) {
      const auto [t0, s0] = points[k - 1];
      return s0 + (s1 - s0) * (t - t0) / (t1 - t0);
    }
  }
  return points.back().second;
}

void AnnealSchedule::validate() const {
  if (points.size() < 2) throw ContractViolation("schedule needs at least two breakpoints");
  if (points.front().first != 0.0) throw ContractViolation("schedule must start at t = 0");
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto [t, s] = points[k];
    if (!std::isfinite(t) || !(s >= 0.0 && s <= 1.0))
      throw ContractViolation("schedule breakpoint outside the unit interval");
    if (k > 0 && !(t > points[k - 1].first))
      throw ContractViolation("schedule times must increase strictly");
  }
  if (mode == ScheduleMode::forward) {
    if (points.front().second != 0.0 || points.back().second != 1.0)
      throw ContractViolation("forward schedule must run from s = 0 to s = 1");
  } else {
    if (points.front().second != 1.0 || points.back().second != 1.0)
      throw ContractViolation("reverse schedule must start and end at s = 1");
    for (std::size_t k = 1; k + 1 < points.size(); ++k)
      if (!(points[k].second > 0.0))
        throw ContractViolation("reverse schedule must stay above s = 0");
  }
}

AnnealSchedule make_forward_schedule(double anneal_us) {
  if (!(anneal_us > 0.0) || !std::isfinite(anneal_us))
    throw ContractViolation("anneal time must be positive");
  return {ScheduleMode::forward, {{0.0, 0.0}, {anneal_us, 1.0}}};
}

AnnealSchedule make_reverse_schedule(double down_us, double pause_us, double up_us, double s_pause) {
  if (!(down_us > 0.0) || !(pause_us > 0.0) || !(up_us > 0.0) || !std::isfinite(down_us + pause_us + up_us))
    throw ContractViolation("reverse schedule durations must be positive");
  if (!(s_pause > 0.0 && s_pause < 1.0)) throw ContractViolation("pause point must lie in (0, 1)");
  return {ScheduleMode::reverse,
          {{0.0, 1.0},
           {down_us, s_pause},
           {down_us + pause_us, s_pause},
           {down_us + pause_us + up_us, 1.0}}};
}

void EmulatorConfig::validate() const {
  if (!(t_eff > 0.0) || !std::isfinite(t_eff)) throw ContractViolation("t_eff must be positive");
  if (!(sweeps_per_us >= 1.0) || !std::isfinite(sweeps_per_us))
    throw ContractViolation("sweep rate must be at least 1 per microsecond");
  if (!(s_target > 0.0 && s_target < 1.0)) throw ContractViolation("s_target must lie in (0, 1)");
  if (!(field_noise_sd >= 0.0) || !(coupling_noise_sd >= 0.0))
    throw ContractViolation("noise standard deviations must be non-negative");
}

double EmulatorConfig::beta(double s) const { return std::min(1.0, s / s_target) / t_eff; }

double EmulatorConfig::mobility(double s) const {
  if (s <= s_target) return 1.0;
  return std::max(0.0, (1.0 - s) / (1.0 - s_target));
}

std::size_t EmulatorConfig::sweeps(const AnnealSchedule& sched) const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sched.duration() * sweeps_per_us)));
}

double SampleBatch::mean_start_distance() const {
  if (start_distance.empty()) return 0.0;
  double total = 0.0;
  for (int d : start_distance) total += d;
  return total / static_cast<double>(start_distance.size());
}

namespace {

/// Adjacency of one copy in compressed rows, both directions stored.
struct Sparse {
  std::vector<std::size_t> row;
  std::vector<int> col;
  std::vector<double> value;
  std::vector<std::size_t> edge_slot_a;  // slot of edge e seen from u
  std::vector<std::size_t> edge_slot_b;  // slot of edge e seen from v

  explicit Sparse(const CopyProblem& copy) {
    const int n = copy.size();
    std::vector<std::size_t> degree(n, 0);
    for (const PhysicalEdge& e : copy.edges) {
      ++degree[e.u];
      ++degree[e.v];
    }
    row.assign(n + 1, 0);
    for (int q = 0; q < n; ++q) row[q + 1] = row[q] + degree[q];
    col.resize(row[n]);
    value.resize(row[n]);
    std::vector<std::size_t> fill(row.begin(), row.end() - 1);
    for (const PhysicalEdge& e : copy.edges) {
      edge_slot_a.push_back(fill[e.u]);
      col[fill[e.u]] = e.v;
      value[fill[e.u]++] = e.value;
      edge_slot_b.push_back(fill[e.v]);
      col[fill[e.v]] = e.u;
      value[fill[e.v]++] = e.value;
    }
  }
};

struct Step {
  double beta;
  double mobility;
};

struct Slot {
  std::optional<BinaryConfig> sample;
  int breaks = 0;
  int distance = 0;
  std::size_t chains = 0;
};

std::vector<Step> ladder(const AnnealSchedule& sched, const EmulatorConfig& cfg) {
  const std::size_t n = cfg.sweeps(sched);
  std::vector<Step> steps(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * sched.duration() / static_cast<double>(n);
    const double s = sched.s_at(t);
    steps[k] = {cfg.beta(s), cfg.mobility(s)};
  }
  return steps;
}

/// Heat-bath acceptance of a flip with energy change `delta` against the
/// uniform draw u. The bounds 1 + |x| <= e^|x| settle most draws without
/// calling exp; exp is skipped entirely where the probability is far below the
/// 2^-53 resolution of uniform01.
inline bool accept_flip(const Step& step, double delta, double u) {
  const double x = step.beta * delta;
  const double mu = step.mobility;
  if (x >= 0.0) {
    if (u * (2.0 + x) >= mu) return false;
    return x <= 40.0 && u < mu / (1.0 + std::exp(x));
  }
  if (u * (2.0 - x) < mu * (1.0 - x)) return true;
  return u < mu / (1.0 + std::exp(x));
}

/// Per chain, the adjacency slots that leave the chain, grouped by member.
struct ChainBoundary {
  std::vector<int> member;             // qubit per group
  std::vector<std::size_t> group_end;  // end offset into slot per group
  std::vector<std::size_t> slot;
  std::vector<std::size_t> chain_end;  // end offset into member per chain
};

ChainBoundary chain_boundary(const std::vector<Chain>& chains, const Sparse& adj, std::size_t n) {
  std::vector<int> owner(n, -1);
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (int q : chains[c]) owner[q] = static_cast<int>(c);
  ChainBoundary out;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    if (chains[c].size() >= 2) {
      for (int q : chains[c]) {
        out.member.push_back(q);
        for (std::size_t k = adj.row[q]; k < adj.row[q + 1]; ++k)
          if (owner[adj.col[k]] != static_cast<int>(c)) out.slot.push_back(k);
        out.group_end.push_back(out.slot.size());
      }
    }
    out.chain_end.push_back(out.member.size());
  }
  return out;
}

void anneal(std::vector<std::int8_t>& spins, const std::vector<double>& fields, const Sparse& adj,
            const std::vector<double>& couplings, const ChainBoundary* chains,
            const std::vector<Step>& steps, Rng& rng) {
  const std::size_t n = spins.size();
  for (const Step& step : steps) {
    if (step.mobility <= 0.0) continue;
    for (std::size_t q = 0; q < n; ++q) {
      double local = fields[q];
      for (std::size_t k = adj.row[q]; k < adj.row[q + 1]; ++k) local += couplings[k] * spins[adj.col[k]];
      if (accept_flip(step, -2.0 * spins[q] * local, uniform01(rng))) spins[q] = static_cast<std::int8_t>(-spins[q]);
    }
    if (!chains) continue;
    std::size_t m = 0, k = 0;
    for (std::size_t c = 0; c < chains->chain_end.size(); ++c) {
      const std::size_t m_begin = m;
      const std::size_t m_end = chains->chain_end[c];
      if (m_begin == m_end) continue;
      // Edges inside the chain keep their energy when every member flips.
      double delta = 0.0;
      for (; m < m_end; ++m) {
        const int q = chains->member[m];
        double local = fields[q];
        for (; k < chains->group_end[m]; ++k) {
          const std::size_t s = chains->slot[k];
          local += couplings[s] * spins[adj.col[s]];
        }
        delta += -2.0 * spins[q] * local;
      }
      if (accept_flip(step, delta, uniform01(rng)))
        for (std::size_t j = m_begin; j < m_end; ++j) {
          const int q = chains->member[j];
          spins[q] = static_cast<std::int8_t>(-spins[q]);
        }
    }
  }
}

int hamming(const SpinConfig& a, const SpinConfig& b) {
  int d = 0;
  for (std::size_t k = 0; k < a.s.size(); ++k) d += a.s[k] != b.s[k];
  return d;
}

template <class Init>
SampleBatch run_batch(const PhysicalProblem& p, const AnnealSchedule& sched, int cycles,
                      const EmulatorConfig& cfg, std::uint64_t seed, Init init) {
  cfg.validate();
  if (cycles < 0) throw ContractViolation("cycle count must be non-negative");
  if (p.copies.empty()) throw ContractViolation("physical problem has no copies");
  const std::vector<Step> steps = ladder(sched, cfg);
  std::vector<Sparse> adjacency;
  std::vector<ChainBoundary> boundaries;
  adjacency.reserve(p.copies.size());
  for (const CopyProblem& copy : p.copies) {
    adjacency.emplace_back(copy);
    boundaries.push_back(chain_boundary(copy.chains, adjacency.back(), copy.qubits.size()));
  }

  const std::size_t n_copies = p.copies.size();
  std::vector<Slot> slots(static_cast<std::size_t>(cycles) * n_copies);
  parallel_for(slots.size(), [&](std::size_t task) {
    const std::size_t cycle = task / n_copies;
    const std::size_t c = task % n_copies;
    const CopyProblem& copy = p.copies[c];
    const Sparse& adj = adjacency[c];
    Rng rng = make_stream(seed, Stream::sampling, {cycle, c});

    std::vector<double> fields = copy.fields;
    std::vector<double> couplings = adj.value;
    if (cfg.field_noise_sd > 0.0 || cfg.coupling_noise_sd > 0.0) {
      Rng noise = make_stream(seed, Stream::noise, {cycle, c});
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (double& h : fields) h += cfg.field_noise_sd * gauss(noise);
      for (std::size_t e = 0; e < copy.edges.size(); ++e) {
        const double shift = cfg.coupling_noise_sd * gauss(noise);
        couplings[adj.edge_slot_a[e]] += shift;
        couplings[adj.edge_slot_b[e]] += shift;
      }
    }

    std::vector<std::int8_t> spins;
    const SpinConfig start = init(cycle, copy, spins, rng);
    anneal(spins, fields, adj, couplings, cfg.chain_moves ? &boundaries[c] : nullptr, steps, rng);

    const PhysicalSample sample = make_physical_sample(copy, static_cast<int>(c), std::move(spins));
    const ChainResolution res = resolve_chains(sample, copy, cfg.chain_policy, rng);
    Slot& slot = slots[task];
    slot.breaks = res.breaks;
    slot.chains = copy.chains.size();
    if (res.spins) {
      slot.distance = hamming(*res.spins, start);
      slot.sample = to_binary(*res.spins, p.n_visible);
    }
  });

  SampleBatch batch;
  batch.n_visible = p.n_visible;
  batch.schedule = sched;
  for (std::size_t task = 0; task < slots.size(); ++task) {
    Slot& slot = slots[task];
    batch.chains_read += slot.chains;
    batch.chains_broken += static_cast<std::size_t>(slot.breaks);
    if (!slot.sample) {
      ++batch.rejected;
      continue;
    }
    batch.samples.push_back(std::move(*slot.sample));
    batch.copy_ids.push_back(static_cast<int>(task % n_copies));
    batch.breaks.push_back(slot.breaks);
    batch.start_distance.push_back(slot.distance);
  }
  return batch;
}

}  // namespace

SampleBatch forward_sample(const PhysicalProblem& p, const AnnealSchedule& sched, int cycles,
                           const EmulatorConfig& cfg, std::uint64_t seed) {
  sched.validate();
  if (sched.mode != ScheduleMode::forward) throw ContractViolation("forward_sample needs a forward schedule");
  return run_batch(p, sched, cycles, cfg, seed,
                   [](std::size_t, const CopyProblem& copy, std::vector<std::int8_t>& spins, Rng& rng) {
                     spins.resize(copy.size());
                     for (auto& s : spins) s = (rng() >> 63) ? 1 : -1;
                     // The logical reading of the random start, ties by coin.
                     const PhysicalSample initial = make_physical_sample(copy, 0, spins);
                     return *resolve_chains(initial, copy, ChainPolicy::majority_vote, rng).spins;
                   });
}

SampleBatch reverse_sample(const PhysicalProblem& p, std::span<const SpinConfig> starts,
                           const AnnealSchedule& sched, int cycles, const EmulatorConfig& cfg,
                           std::uint64_t seed) {
  sched.validate();
  if (sched.mode != ScheduleMode::reverse) throw ContractViolation("reverse_sample needs a reverse schedule");
  if (starts.empty()) throw ContractViolation("reverse_sample needs at least one start");
  for (const SpinConfig& s : starts) {
    if (static_cast<int>(s.s.size()) != p.n_logical())
      throw ContractViolation("start configuration has " + std::to_string(s.s.size()) +
                              " spins, problem has " + std::to_string(p.n_logical()));
    for (std::int8_t x : s.s)
      if (x != 1 && x != -1) throw ContractViolation("start spin outside {-1,+1}");
  }
  return run_batch(p, sched, cycles, cfg, seed,
                   [starts](std::size_t cycle, const CopyProblem& copy, std::vector<std::int8_t>& spins, Rng&) {
                     const SpinConfig& start = starts[cycle % starts.size()];
                     spins = spread_to_chains(copy, start);
                     return start;
                   });
}

void write_batch_csv(std::ostream& out, const SampleBatch& batch) {
  out << "copy,breaks,v,h\n";
  for (std::size_t k = 0; k < batch.samples.size(); ++k) {
    const BinaryConfig& cfg = batch.samples[k];
    std::string v(cfg.v.size(), '0');
    std::string h(cfg.h.size(), '0');
    for (std::size_t i = 0; i < cfg.v.size(); ++i)
      if (cfg.v[i]) v[i] = '1';
    for (std::size_t j = 0; j < cfg.h.size(); ++j)
      if (cfg.h[j]) h[j] = '1';
    out << batch.copy_ids[k] << ',' << batch.breaks[k] << ',' << v << ',' << h << '\n';
  }
}

}  // namespace anneal_rbm
