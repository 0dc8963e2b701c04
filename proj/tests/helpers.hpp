#pragma once

#include <cstdint>
#include <random>

#include "anneal_rbm/rbm.hpp"

namespace testing_support {

/// Parameters i.i.d. uniform in [-scale, scale].
inline anneal_rbm::RbmParams random_rbm(int n_v, int n_h, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd w(n_v, n_h);
  Eigen::VectorXd a(n_v), b(n_h);
  for (int i = 0; i < n_v; ++i)
    for (int j = 0; j < n_h; ++j) w(i, j) = u(rng);
  for (int i = 0; i < n_v; ++i) a[i] = u(rng);
  for (int j = 0; j < n_h; ++j) b[j] = u(rng);
  return {w, a, b};
}

inline anneal_rbm::BitVector random_bits(int n, std::mt19937_64& rng) {
  anneal_rbm::BitVector v(n);
  for (auto& x : v) x = static_cast<std::uint8_t>(rng() & 1u);
  return v;
}

}  // namespace testing_support
