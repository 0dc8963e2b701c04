#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "anneal_rbm/bas.hpp"
#include "anneal_rbm/errors.hpp"
#include "anneal_rbm/metrics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace anneal_rbm;
using testing_support::random_rbm;

TEST(LogLikelihood, ZeroModel) {
  const BasDataset d = generate_bas(4);
  EXPECT_NEAR(log_likelihood_av(RbmParams(16, 16), d.images), -16.0 * std::log(2.0), 1e-10);
  EXPECT_NEAR(log_likelihood_av(RbmParams(16, 3), d.images), -16.0 * std::log(2.0), 1e-10);
}

TEST(LogLikelihood, MatchesEnumeration) {
  const BasDataset d = generate_bas(2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RbmParams rbm = random_rbm(4, 4, 1.5, seed);
    EXPECT_NEAR(log_likelihood_av(rbm, d.images), oracle::log_likelihood(rbm, d.images), 1e-10);
  }
}

TEST(LogLikelihood, PrecomputedPartition) {
  const BasDataset d = generate_bas(2);
  const RbmParams rbm = random_rbm(4, 6, 1.0, 7);
  EXPECT_DOUBLE_EQ(log_likelihood_av(rbm, d.images, exact_log_partition(rbm)), log_likelihood_av(rbm, d.images));
}

TEST(LogLikelihood, AtMostZeroAndFinite) {
  const BasDataset d = generate_bas(3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double ll = log_likelihood_av(random_rbm(9, 5, 4.0, seed), d.images);
    EXPECT_TRUE(std::isfinite(ll));
    EXPECT_LE(ll, 0.0);
  }
}

TEST(DeltaProb, ZeroModel) {
  const BasDataset d = generate_bas(4);
  const DeltaProbability dp = delta_probability(RbmParams(16, 16), d.images);
  EXPECT_NEAR(dp.total, 30.0 / 65536.0, 1e-15);
  EXPECT_NEAR(dp.bottom_half, 15.0 / 65536.0, 1e-15);
  ASSERT_EQ(dp.per_image.size(), 30u);
  for (double p : dp.per_image) EXPECT_NEAR(p, 1.0 / 65536.0, 1e-17);
}

TEST(DeltaProb, MatchesEnumerationAndIsBounded) {
  const BasDataset d = generate_bas(2);
  const RbmParams rbm = random_rbm(4, 3, 2.0, 11);
  const std::vector<double> law = oracle::visible_law(rbm);
  const DeltaProbability dp = delta_probability(rbm, d.images);
  double total = 0.0;
  std::vector<double> each;
  for (const BitVector& v : d.images) {
    each.push_back(law[oracle::index_of(v)]);
    total += each.back();
  }
  EXPECT_NEAR(dp.total, total, 1e-12);
  std::sort(each.begin(), each.end());
  EXPECT_NEAR(dp.bottom_half, each[0] + each[1] + each[2], 1e-12);
  EXPECT_GE(dp.total, 0.0);
  EXPECT_LE(dp.total, 1.0);
}

TEST(DeltaProb, DatasetPermutationInvariance) {
  BasDataset d = generate_bas(3);
  const RbmParams rbm = random_rbm(9, 4, 1.0, 13);
  const DeltaProbability a = delta_probability(rbm, d.images);
  const double ll_a = log_likelihood_av(rbm, d.images);
  std::mt19937_64 rng(1);
  std::shuffle(d.images.begin(), d.images.end(), rng);
  const DeltaProbability b = delta_probability(rbm, d.images);
  EXPECT_NEAR(a.total, b.total, 1e-14);
  EXPECT_NEAR(a.bottom_half, b.bottom_half, 1e-14);
  EXPECT_NEAR(ll_a, log_likelihood_av(rbm, d.images), 1e-12);
}

TEST(Reconstruction, ZeroModelIsCoinFlip) {
  const BasDataset d = generate_bas(4);
  const std::vector<int> border = clamp_mask(4, OuterBorder{});
  EXPECT_NEAR(reconstruction_score(RbmParams(16, 16), d.images, border, 10, 50, 3), 0.5, 0.02);
  EXPECT_NEAR(exact_reconstruction_score(RbmParams(16, 16), d.images, border), 0.5, 1e-12);
}

TEST(Reconstruction, ExactMatchesOracle) {
  const BasDataset d = generate_bas(3);
  const std::vector<int> border = clamp_mask(3, OuterBorder{});
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const RbmParams rbm = random_rbm(9, 4, 1.5, seed);
    EXPECT_NEAR(exact_reconstruction_score(rbm, d.images, border),
                oracle::clamped_posterior_score(rbm, d.images, border), 1e-10);
  }
}

TEST(Reconstruction, MonteCarloConvergesToExact) {
  const BasDataset d = generate_bas(3);
  const std::vector<int> clamped{0, 4};
  const RbmParams rbm = random_rbm(9, 4, 1.5, 17);
  const double mc = reconstruction_score(rbm, d.images, clamped, 50, 200, 19);
  EXPECT_NEAR(mc, exact_reconstruction_score(rbm, d.images, clamped), 0.015);
}

TEST(Reconstruction, SeededAndBounded) {
  const BasDataset d = generate_bas(3);
  const std::vector<int> border = clamp_mask(3, OuterBorder{});
  const RbmParams rbm = random_rbm(9, 4, 1.0, 23);
  const double a = reconstruction_score(rbm, d.images, border, 5, 4, 29);
  EXPECT_EQ(a, reconstruction_score(rbm, d.images, border, 5, 4, 29));
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
}

TEST(Reconstruction, RejectsFullClamp) {
  const BasDataset d = generate_bas(2);
  const std::vector<int> all{0, 1, 2, 3};
  EXPECT_THROW(reconstruction_score(RbmParams(4, 2), d.images, all, 1, 1, 1), ContractViolation);
  EXPECT_THROW(exact_reconstruction_score(RbmParams(4, 2), d.images, all), ContractViolation);
}

TEST(Histogram, SingleEnergyGetsUnitRange) {
  const RbmParams rbm(2, 2);
  const std::vector<BinaryConfig> samples(5, BinaryConfig{{0, 1}, {1, 0}});
  const EnergyHistogram h = energy_histogram(rbm, samples, 10, false);
  EXPECT_DOUBLE_EQ(h.lo, -0.5);
  EXPECT_DOUBLE_EQ(h.hi, 0.5);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), 5u);
  EXPECT_EQ(h.counts[h.bin_of(0.0)], 5u);
}

TEST(Histogram, CountsAreOrderFreeAndOverlayIsNormalised) {
  const RbmParams rbm = random_rbm(4, 3, 1.0, 31);
  std::mt19937_64 rng(37);
  std::vector<BinaryConfig> samples;
  for (int k = 0; k < 200; ++k)
    samples.push_back({testing_support::random_bits(4, rng), testing_support::random_bits(3, rng)});
  const EnergyHistogram a = energy_histogram(rbm, samples, 12, true);
  std::reverse(samples.begin(), samples.end());
  const EnergyHistogram b = energy_histogram(rbm, samples, 12, true);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(std::accumulate(a.counts.begin(), a.counts.end(), std::size_t{0}), 200u);
  const double mass =
      std::accumulate(a.overlay.begin(), a.overlay.end(), 0.0) + a.overlay_below + a.overlay_above;
  EXPECT_NEAR(mass, 1.0, 1e-12);

  double min_e = 1e300;
  for (const BinaryConfig& s : samples) min_e = std::min(min_e, energy(rbm, s));
  EXPECT_DOUBLE_EQ(a.min_energy, min_e);
}

TEST(Histogram, OverlayMatchesBoltzmannBins) {
  const RbmParams rbm = random_rbm(3, 3, 1.0, 41);
  std::vector<BinaryConfig> samples{{{0, 0, 0}, {0, 0, 0}}, {{1, 1, 1}, {1, 1, 1}}};
  const EnergyHistogram h = energy_histogram(rbm, samples, 4, true);
  std::vector<double> expect(4, 0.0);
  double below = 0.0, above = 0.0;
  const double lz = oracle::log_partition(rbm);
  oracle::for_each_state(rbm, [&](const BitVector&, const BitVector&, double e) {
    const double p = std::exp(-e - lz);
    if (e < h.lo) below += p;
    else if (e > h.hi) above += p;
    else expect[h.bin_of(e)] += p;
  });
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(h.overlay[k], expect[k], 1e-12);
  EXPECT_NEAR(h.overlay_below, below, 1e-12);
  EXPECT_NEAR(h.overlay_above, above, 1e-12);
}
