#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anneal_rbm/bas.hpp"
#include "anneal_rbm/chimera.hpp"
#include "anneal_rbm/errors.hpp"
#include "anneal_rbm/metrics.hpp"
#include "anneal_rbm/trainer.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace anneal_rbm;
using testing_support::random_rbm;

namespace {

QuantumBackend fixture_backend() {
  HardwareGraph g = HardwareGraph::chimera(16, 16);
  const std::vector<int> faulty = default_faulty_qubits();
  g.mark_faulty(faulty);
  QuantumBackend b{g, embed_rbm(g, 16, 16, -1.0), EmulatorConfig{}, make_forward_schedule(2.0),
                   make_reverse_schedule(1.0, 18.0, 1.0, 0.2)};
  b.emulator.t_eff = 0.32;
  return b;
}

TrainConfig small_config(Method m, int epochs) {
  TrainConfig cfg;
  cfg.method = m;
  cfg.epochs = epochs;
  cfg.ll_every = 1;
  cfg.reconstruction_every = 1000;
  cfg.n_g = 20;
  return cfg;
}

}  // namespace

TEST(Method, Names) {
  for (Method m : {Method::classical, Method::forward, Method::reverse}) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("simulated"), ContractViolation);
}

TEST(Init, TruncatedGaussianMoments) {
  // 10^5 weights from N(0, 2^2) restricted to [-3, 3].
  const RbmParams rbm = init_rbm(400, 250, InitSpec{}, 3);
  double sum = 0.0, sq = 0.0, top = 0.0;
  const Eigen::MatrixXd& w = rbm.w();
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double x = w.data()[k];
    top = std::max(top, std::abs(x));
    sum += x;
    sq += x * x;
  }
  const double n = static_cast<double>(w.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  // Closed form for a symmetric cut at +-c sigma:
  // var = sigma^2 (1 - 2 c phi(c) / (2 Phi(c) - 1)).
  const double c = 1.5;
  const double phi = std::exp(-0.5 * c * c) / std::sqrt(2.0 * M_PI);
  const double mass = std::erf(c / std::sqrt(2.0));
  const double exact_sd = 2.0 * std::sqrt(1.0 - 2.0 * c * phi / mass);
  EXPECT_NEAR(exact_sd, 1.4853, 1e-4);
  EXPECT_NEAR(sd, exact_sd, 0.015);
  EXPECT_LT(sd, 2.0);
  EXPECT_LE(top, 3.0);
  EXPECT_NEAR(mean, 0.0, 0.02);
  for (int i = 0; i < 400; ++i) EXPECT_LE(std::abs(rbm.a()[i]), 3.0);
  for (int j = 0; j < 250; ++j) EXPECT_LE(std::abs(rbm.b()[j]), 3.0);
}

TEST(Init, SeededAndRejectsEmptyInterval) {
  EXPECT_EQ(init_rbm(4, 4, InitSpec{}, 9).checksum(), init_rbm(4, 4, InitSpec{}, 9).checksum());
  EXPECT_NE(init_rbm(4, 4, InitSpec{}, 9).checksum(), init_rbm(4, 4, InitSpec{}, 10).checksum());
  TrainConfig cfg;
  cfg.init.lo = 1.0;
  cfg.init.hi = 1.0;
  EXPECT_THROW(cfg.validate(), ContractViolation);
}

TEST(Init, MaskedWeightsAreZero) {
  const ConnectivityMask mask = chimera_native_mask();
  const RbmParams rbm = init_rbm(mask, InitSpec{}, 5);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (!mask(i, j)) {
        EXPECT_EQ(rbm.raw_w()(i, j), 0.0);
      }
}

TEST(Update, HandExample) {
  const RbmParams rbm(1, 1);
  PairStatistics pos = PairStatistics::zeros(1, 1), neg = PairStatistics::zeros(1, 1);
  pos.vh(0, 0) = 0.5;
  neg.vh(0, 0) = 0.25;
  pos.v_mean[0] = 0.5;
  neg.h_mean[0] = 1.0;
  const RbmParams next = update_step(rbm, pos, neg, 0.15);
  EXPECT_NEAR(next.w()(0, 0), 0.0375, 1e-15);
  EXPECT_NEAR(next.a()[0], 0.075, 1e-15);
  EXPECT_NEAR(next.b()[0], -0.15, 1e-15);
}

TEST(Update, EqualStatisticsAreAFixedPoint) {
  const RbmParams rbm = random_rbm(3, 2, 1.0, 1);
  const PairStatistics s = exact_model_statistics(rbm);
  EXPECT_EQ(update_step(rbm, s, s, 0.5).checksum(), rbm.checksum());
}

TEST(Gradient, MatchesFiniteDifferences) {
  const BasDataset d = generate_bas(2);
  const RbmParams rbm = random_rbm(4, 3, 1.0, 21);
  const PairStatistics pos = positive_statistics(rbm, d.images);
  const PairStatistics model = exact_model_statistics(rbm);
  const double h = 1e-5;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) {
      Eigen::MatrixXd up = rbm.w(), down = rbm.w();
      up(i, j) += h;
      down(i, j) -= h;
      const double fd = (oracle::log_likelihood({up, rbm.a(), rbm.b()}, d.images) -
                         oracle::log_likelihood({down, rbm.a(), rbm.b()}, d.images)) /
                        (2 * h);
      EXPECT_NEAR(pos.vh(i, j) - model.vh(i, j), fd, 1e-5);
    }
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd up = rbm.a(), down = rbm.a();
    up[i] += h;
    down[i] -= h;
    const double fd = (oracle::log_likelihood({rbm.w(), up, rbm.b()}, d.images) -
                       oracle::log_likelihood({rbm.w(), down, rbm.b()}, d.images)) /
                      (2 * h);
    EXPECT_NEAR(pos.v_mean[i] - model.v_mean[i], fd, 1e-5);
  }
}

TEST(Gradient, ExactAscentIncreasesLikelihood) {
  const BasDataset d = generate_bas(2);
  RbmParams rbm = random_rbm(4, 3, 1.0, 23);
  double ll = log_likelihood_av(rbm, d.images);
  for (int step = 0; step < 20; ++step) {
    rbm = update_step(rbm, positive_statistics(rbm, d.images), exact_model_statistics(rbm), 0.05);
    const double next = log_likelihood_av(rbm, d.images);
    EXPECT_GT(next, ll);
    ll = next;
  }
}

TEST(Negative, ClassicalZeroModelIsQuarter) {
  const BasDataset d = generate_bas(4);
  const NegativeResult r = negative_statistics(RbmParams(16, 16), d.images, small_config(Method::classical, 1),
                                               nullptr, 31);
  EXPECT_EQ(r.samples.size(), 30u);
  EXPECT_NEAR(r.stats.vh.mean(), 0.25, 0.03);
  EXPECT_EQ(r.break_rate, 0.0);
}

TEST(Negative, ForwardDrawsCyclesTimesCopies) {
  const BasDataset d = generate_bas(4);
  const QuantumBackend backend = fixture_backend();
  const RbmParams rbm = init_rbm(16, 16, InitSpec{}, 37);
  const NegativeResult r = negative_statistics(rbm, d.images, small_config(Method::forward, 1), &backend, 41);
  EXPECT_EQ(r.samples.size(), 1200u);
  EXPECT_GE(r.break_rate, 0.0);
  EXPECT_LT(r.break_rate, 1.0);
}

TEST(Negative, ReverseDrawsCyclesTimesCopies) {
  const BasDataset d = generate_bas(4);
  QuantumBackend backend = fixture_backend();
  backend.reverse_schedule = make_reverse_schedule(0.2, 0.4, 0.2, 0.5);
  TrainConfig cfg = small_config(Method::reverse, 1);
  cfg.cycles = 15;
  const NegativeResult r = negative_statistics(init_rbm(16, 16, InitSpec{}, 43), d.images, cfg, &backend, 47);
  EXPECT_EQ(r.samples.size(), 120u);
}

TEST(Negative, AnnealingNeedsBackend) {
  const BasDataset d = generate_bas(4);
  EXPECT_THROW(negative_statistics(RbmParams(16, 16), d.images, small_config(Method::forward, 1), nullptr, 1),
               ContractViolation);
  EXPECT_THROW(train(small_config(Method::reverse, 1), d.images, nullptr), ContractViolation);
}

TEST(Train, DeterministicForSeed) {
  const BasDataset d = generate_bas(3);
  TrainConfig cfg = small_config(Method::classical, 5);
  cfg.n_hidden = 6;
  const TrainResult a = train(cfg, d.images, nullptr);
  const TrainResult b = train(cfg, d.images, nullptr);
  ASSERT_EQ(a.history.records.size(), 6u);
  for (std::size_t k = 0; k < a.history.records.size(); ++k)
    EXPECT_EQ(a.history.records[k].checksum, b.history.records[k].checksum);
  cfg.seed = 2;
  EXPECT_NE(train(cfg, d.images, nullptr).rbm.checksum(), a.rbm.checksum());
}

TEST(Train, RecordCadence) {
  const BasDataset d = generate_bas(3);
  TrainConfig cfg = small_config(Method::classical, 25);
  cfg.n_hidden = 4;
  cfg.ll_every = 10;
  cfg.reconstruction_every = 20;
  cfg.reconstruction_n_g = 2;
  cfg.reconstruction_trials = 2;
  cfg.clamped = clamp_mask(3, OuterBorder{});
  int calls = 0;
  const TrainResult r = train(cfg, d.images, nullptr, nullptr, [&](int epoch, const RbmParams&) {
    EXPECT_EQ(epoch, calls);
    ++calls;
  });
  EXPECT_EQ(calls, 26);
  std::vector<int> epochs;
  for (const EpochRecord& e : r.history.records) epochs.push_back(e.epoch);
  EXPECT_EQ(epochs, (std::vector<int>{0, 10, 20, 25}));
  EXPECT_TRUE(r.history.at_epoch(20)->reconstruction);
  EXPECT_FALSE(r.history.at_epoch(10)->reconstruction);
  EXPECT_TRUE(r.history.at_epoch(25)->ll);
  EXPECT_EQ(r.history.at_epoch(5), nullptr);
}

TEST(Train, ClassicalLearnsSmallBars) {
  const BasDataset d = generate_bas(3);
  TrainConfig cfg = small_config(Method::classical, 500);
  cfg.n_hidden = 8;
  cfg.ll_every = 100;
  cfg.n_g = 50;
  const TrainResult r = train(cfg, d.images, nullptr);
  const auto& rec = r.history.records;
  ASSERT_EQ(rec.size(), 6u);
  for (std::size_t k = 2; k < rec.size(); ++k) EXPECT_GT(*rec[k].ll, *rec[k - 1].ll);
  // Uniform model: ln(1/512) = -6.24 and 14/512 = 0.027 of the mass on the data.
  EXPECT_GT(*rec.back().ll, -5.5);
  EXPECT_GT(*rec.back().delta_prob, 0.1);
}

TEST(Train, SparseMaskIsNeverWritten) {
  const BasDataset d = generate_bas(4);
  const ConnectivityMask mask = chimera_native_mask();
  TrainConfig cfg = small_config(Method::classical, 5);
  const TrainResult r = train(cfg, d.images, nullptr, &mask, [&](int, const RbmParams& rbm) {
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        if (!mask(i, j)) {
          EXPECT_EQ(rbm.raw_w()(i, j), 0.0);
        }
  });
  EXPECT_EQ(r.rbm.mask(), mask);
}

TEST(Train, HistoryCsv) {
  TrainHistory h;
  EpochRecord a;
  a.epoch = 0;
  a.ll = -11.5;
  a.delta_prob = 0.25;
  h.records.push_back(a);
  EpochRecord b;
  b.epoch = 10;
  b.break_rate = 0.01;
  h.records.push_back(b);
  std::ostringstream out;
  write_history_csv(out, h);
  EXPECT_EQ(out.str(),
            "epoch,LL_av,reconstruction,delta_prob,break_rate,min_sample_energy\n"
            "0,-11.5,,0.25,,\n"
            "10,,,,0.01,\n");
}
