#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <sstream>

#include "anneal_rbm/annealer.hpp"
#include "anneal_rbm/errors.hpp"
#include "oracles.hpp"

using namespace anneal_rbm;

namespace {

IsingProblem random_problem(int n_v, int n_h, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  IsingProblem p;
  p.n_visible = n_v;
  p.n_hidden = n_h;
  for (int k = 0; k < n_v + n_h; ++k) p.fields.push_back(u(rng));
  for (int i = 0; i < n_v; ++i)
    for (int j = 0; j < n_h; ++j) p.couplings.push_back({i, n_v + j, u(rng)});
  return p;
}

std::vector<double> empirical_law(const SampleBatch& b, int n) {
  std::vector<double> law(std::size_t{1} << n, 0.0);
  for (const BinaryConfig& c : b.samples) {
    std::size_t idx = oracle::index_of(c.v) | (oracle::index_of(c.h) << c.v.size());
    law[idx] += 1.0 / static_cast<double>(b.size());
  }
  return law;
}

IsingProblem zero_problem(int n_v, int n_h) {
  IsingProblem p;
  p.n_visible = n_v;
  p.n_hidden = n_h;
  p.fields.assign(n_v + n_h, 0.0);
  return p;
}

class ScopedThreads {
 public:
  explicit ScopedThreads(const char* n) { setenv("ANNEAL_RBM_THREADS", n, 1); }
  ~ScopedThreads() { unsetenv("ANNEAL_RBM_THREADS"); }
};

}  // namespace

TEST(Schedule, Forward) {
  const AnnealSchedule s = make_forward_schedule(2.0);
  EXPECT_EQ(s.mode, ScheduleMode::forward);
  EXPECT_DOUBLE_EQ(s.duration(), 2.0);
  EXPECT_DOUBLE_EQ(s.s_at(0.0), 0.0);
  EXPECT_DOUBLE_EQ(s.s_at(0.5), 0.25);
  EXPECT_DOUBLE_EQ(s.s_at(2.0), 1.0);
  EXPECT_THROW(make_forward_schedule(0.0), ContractViolation);
}

TEST(Schedule, Reverse) {
  const AnnealSchedule s = make_reverse_schedule(1.0, 18.0, 1.0, 0.2);
  EXPECT_EQ(s.mode, ScheduleMode::reverse);
  EXPECT_DOUBLE_EQ(s.duration(), 20.0);
  EXPECT_DOUBLE_EQ(s.s_at(0.0), 1.0);
  EXPECT_DOUBLE_EQ(s.s_at(0.5), 0.6);
  EXPECT_DOUBLE_EQ(s.s_at(10.0), 0.2);
  EXPECT_DOUBLE_EQ(s.s_at(20.0), 1.0);
  EXPECT_THROW(make_reverse_schedule(1.0, 18.0, 1.0, 0.0), ContractViolation);
  EXPECT_THROW(make_reverse_schedule(1.0, 18.0, 1.0, 1.0), ContractViolation);
  EXPECT_THROW(make_reverse_schedule(1.0, 18.0, 1.0, -0.1), ContractViolation);
}

TEST(Schedule, Validation) {
  AnnealSchedule s{ScheduleMode::forward, {{0.0, 0.0}, {1.0, 0.5}}};
  EXPECT_THROW(s.validate(), ContractViolation);  // does not reach 1
  s.points = {{0.0, 0.0}, {1.0, 0.5}, {1.0, 1.0}};
  EXPECT_THROW(s.validate(), ContractViolation);  // time not increasing
  s.points = {{0.0, 0.0}, {1.0, 1.2}};
  EXPECT_THROW(s.validate(), ContractViolation);
  s = {ScheduleMode::reverse, {{0.0, 1.0}, {1.0, 0.0}, {2.0, 1.0}}};
  EXPECT_THROW(s.validate(), ContractViolation);  // dips to s = 0
  s.points = {{0.0, 0.5}, {1.0, 1.0}};
  EXPECT_THROW(s.validate(), ContractViolation);
}

TEST(Emulator, BetaAndMobility) {
  EmulatorConfig cfg;
  cfg.t_eff = 0.5;
  cfg.s_target = 0.25;
  EXPECT_DOUBLE_EQ(cfg.beta(0.0), 0.0);
  EXPECT_DOUBLE_EQ(cfg.beta(0.125), 1.0);
  EXPECT_DOUBLE_EQ(cfg.beta(0.25), 2.0);
  EXPECT_DOUBLE_EQ(cfg.beta(0.9), 2.0);
  EXPECT_DOUBLE_EQ(cfg.mobility(0.1), 1.0);
  EXPECT_DOUBLE_EQ(cfg.mobility(1.0), 0.0);
  EXPECT_NEAR(cfg.mobility(0.625), 0.5, 1e-15);
  EXPECT_EQ(cfg.sweeps(make_forward_schedule(2.0)), 50u);
  cfg.t_eff = 0.0;
  EXPECT_THROW(cfg.validate(), ContractViolation);
}

TEST(Forward, ZeroProblemGivesFairBits) {
  const PhysicalProblem p = direct_problem(zero_problem(3, 3));
  const SampleBatch b = forward_sample(p, make_forward_schedule(2.0), 8000, EmulatorConfig{}, 11);
  ASSERT_EQ(b.size(), 8000u);
  const std::vector<double> law = empirical_law(b, 6);
  const std::vector<double> uniform(64, 1.0 / 64);
  EXPECT_LT(oracle::total_variation(law, uniform), 0.06);
}

TEST(Forward, StrongFerromagneticPairAligns) {
  IsingProblem p = zero_problem(1, 1);
  p.couplings = {{0, 1, 2.0}};
  const SampleBatch b = forward_sample(direct_problem(p), make_forward_schedule(2.0), 2000, EmulatorConfig{}, 13);
  int aligned = 0;
  for (const BinaryConfig& c : b.samples) aligned += c.v[0] == c.h[0];
  EXPECT_GT(aligned, 1900);
}

TEST(Forward, MatchesBoltzmannOnDirectProblem) {
  const IsingProblem p = random_problem(3, 3, 0.8, 17);
  EmulatorConfig cfg;
  cfg.t_eff = 0.7;
  const SampleBatch b = forward_sample(direct_problem(p), make_forward_schedule(20.0), 20000, cfg, 19);
  EXPECT_LT(oracle::total_variation(empirical_law(b, 6), oracle::ising_law(p, 0.7)), 0.05);
}

TEST(Forward, MatchesBoltzmannThroughChains) {
  // 4+4 on 2x2 cells with shore 2: every unit is a two-qubit chain.
  const HardwareGraph g = HardwareGraph::chimera(2, 2, 2);
  const Embedding e = embed_rbm(g, 4, 4, -3.0);
  ASSERT_EQ(e.num_copies(), 1);
  const IsingProblem p = random_problem(4, 4, 0.5, 23);
  const SampleBatch b = forward_sample(lower_problem(p, e, g), make_forward_schedule(20.0), 20000,
                                       EmulatorConfig{}, 29);
  EXPECT_LT(b.break_rate(), 0.01);
  EXPECT_LT(oracle::total_variation(empirical_law(b, 8), oracle::ising_law(p, 1.0)), 0.06);
}

TEST(Forward, OneSamplePerCycleAndCopy) {
  const HardwareGraph g = HardwareGraph::chimera(8, 8);
  const Embedding e = embed_rbm(g, 16, 16, -1.0);
  ASSERT_EQ(e.num_copies(), 4);
  const SampleBatch b = forward_sample(lower_problem(random_problem(16, 16, 0.2, 31), e, g),
                                       make_forward_schedule(0.4), 5, EmulatorConfig{}, 37);
  EXPECT_EQ(b.size(), 20u);
  EXPECT_EQ(b.chains_read, 20u * 32);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(b.copy_ids[k], k % 4);
}

TEST(Forward, DeterministicAcrossThreadCounts) {
  const PhysicalProblem p = direct_problem(random_problem(4, 4, 1.0, 41));
  SampleBatch one, many;
  {
    ScopedThreads t("1");
    one = forward_sample(p, make_forward_schedule(1.0), 64, EmulatorConfig{}, 43);
  }
  {
    ScopedThreads t("4");
    many = forward_sample(p, make_forward_schedule(1.0), 64, EmulatorConfig{}, 43);
  }
  EXPECT_EQ(one.samples, many.samples);
  const SampleBatch other = forward_sample(p, make_forward_schedule(1.0), 64, EmulatorConfig{}, 44);
  EXPECT_NE(one.samples, other.samples);
}

TEST(Forward, NoiseIsSeededAndChangesResults) {
  const PhysicalProblem p = direct_problem(random_problem(4, 4, 1.0, 47));
  EmulatorConfig noisy;
  noisy.field_noise_sd = 0.3;
  noisy.coupling_noise_sd = 0.3;
  const SampleBatch a = forward_sample(p, make_forward_schedule(1.0), 64, noisy, 53);
  const SampleBatch b = forward_sample(p, make_forward_schedule(1.0), 64, noisy, 53);
  const SampleBatch clean = forward_sample(p, make_forward_schedule(1.0), 64, EmulatorConfig{}, 53);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, clean.samples);
}

TEST(Forward, WeakChainsBreakMore) {
  const IsingProblem p = random_problem(16, 16, 0.3, 59);
  const HardwareGraph g = HardwareGraph::chimera(4, 4);
  const SampleBatch strong = forward_sample(lower_problem(p, embed_rbm(g, 16, 16, -2.0), g),
                                            make_forward_schedule(2.0), 200, EmulatorConfig{}, 61);
  const SampleBatch weak = forward_sample(lower_problem(p, embed_rbm(g, 16, 16, -0.1), g),
                                          make_forward_schedule(2.0), 200, EmulatorConfig{}, 61);
  EXPECT_LT(strong.break_rate(), weak.break_rate());
}

TEST(Forward, DiscardPolicyDropsBrokenSamples) {
  const IsingProblem p = random_problem(16, 16, 0.3, 67);
  const HardwareGraph g = HardwareGraph::chimera(4, 4);
  EmulatorConfig cfg;
  cfg.chain_policy = ChainPolicy::discard;
  const SampleBatch b = forward_sample(lower_problem(p, embed_rbm(g, 16, 16, -0.1), g),
                                       make_forward_schedule(1.0), 50, cfg, 71);
  EXPECT_GT(b.rejected, 0u);
  EXPECT_EQ(b.size() + b.rejected, 50u);
  for (int br : b.breaks) EXPECT_EQ(br, 0);
}

TEST(Forward, RejectsReverseSchedule) {
  const PhysicalProblem p = direct_problem(zero_problem(2, 2));
  EXPECT_THROW(forward_sample(p, make_reverse_schedule(1, 1, 1, 0.5), 1, EmulatorConfig{}, 1), ContractViolation);
  EXPECT_THROW(forward_sample(p, make_forward_schedule(1), -1, EmulatorConfig{}, 1), ContractViolation);
  EXPECT_EQ(forward_sample(p, make_forward_schedule(1), 0, EmulatorConfig{}, 1).size(), 0u);
}

TEST(Reverse, FrozenScheduleReturnsStart) {
  const PhysicalProblem p = direct_problem(random_problem(3, 3, 2.0, 73));
  const AnnealSchedule frozen{ScheduleMode::reverse, {{0.0, 1.0}, {5.0, 1.0}}};
  const std::vector<SpinConfig> starts{{{1, -1, 1, -1, -1, 1}}, {{-1, -1, -1, 1, 1, 1}}};
  const SampleBatch b = reverse_sample(p, starts, frozen, 10, EmulatorConfig{}, 79);
  ASSERT_EQ(b.size(), 10u);
  for (std::size_t k = 0; k < b.size(); ++k) {
    EXPECT_EQ(to_spins(b.samples[k]), starts[k % 2]);
    EXPECT_EQ(b.start_distance[k], 0);
  }
}

TEST(Reverse, ShallowerDipStaysCloser) {
  const HardwareGraph g = HardwareGraph::chimera(4, 4);
  const IsingProblem p = random_problem(16, 16, 0.3, 83);
  const PhysicalProblem phys = lower_problem(p, embed_rbm(g, 16, 16, -1.0), g);
  std::vector<SpinConfig> starts(1);
  for (int k = 0; k < 32; ++k) starts[0].s.push_back(k % 3 == 0 ? 1 : -1);
  double last = -1.0;
  for (double s_pause : {0.95, 0.6, 0.2}) {
    const SampleBatch b =
        reverse_sample(phys, starts, make_reverse_schedule(1, 18, 1, s_pause), 100, EmulatorConfig{}, 89);
    EXPECT_GT(b.mean_start_distance(), last) << "s_pause " << s_pause;
    last = b.mean_start_distance();
  }
}

TEST(Reverse, ValidatesStarts) {
  const PhysicalProblem p = direct_problem(zero_problem(2, 2));
  const AnnealSchedule sched = make_reverse_schedule(1, 1, 1, 0.5);
  const std::vector<SpinConfig> none;
  const std::vector<SpinConfig> short_start{{{1, 1, 1}}};
  const std::vector<SpinConfig> bad_value{{{1, 0, 1, 1}}};
  EXPECT_THROW(reverse_sample(p, none, sched, 1, EmulatorConfig{}, 1), ContractViolation);
  EXPECT_THROW(reverse_sample(p, short_start, sched, 1, EmulatorConfig{}, 1), ContractViolation);
  EXPECT_THROW(reverse_sample(p, bad_value, sched, 1, EmulatorConfig{}, 1), ContractViolation);
  const std::vector<SpinConfig> ok{{{1, 1, 1, 1}}};
  EXPECT_THROW(reverse_sample(p, ok, make_forward_schedule(1), 1, EmulatorConfig{}, 1), ContractViolation);
}

TEST(Batch, CsvExport) {
  const SampleBatch b = forward_sample(direct_problem(zero_problem(2, 1)), make_forward_schedule(1), 3,
                                       EmulatorConfig{}, 97);
  std::ostringstream out;
  write_batch_csv(out, b);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "copy,breaks,v,h");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(line.size(), std::string("0,0,01,1").size());
  }
  EXPECT_EQ(rows, 3);
}
