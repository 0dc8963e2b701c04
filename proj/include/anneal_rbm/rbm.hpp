#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "anneal_rbm/rng.hpp"

namespace anneal_rbm {

using BitVector = std::vector<std::uint8_t>;
using ConnectivityMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Joint state of the two layers. Values are 0 or 1.
struct BinaryConfig {
  BitVector v;
  BitVector h;

  bool operator==(const BinaryConfig&) const = default;
};

/// Second-order statistics entering the weight and bias updates.
struct PairStatistics {
  Eigen::MatrixXd vh;      // n_v x n_h
  Eigen::VectorXd v_mean;  // n_v
  Eigen::VectorXd h_mean;  // n_h

  static PairStatistics zeros(int n_v, int n_h);
};

enum class Layer { hidden, visible };

/// Bipartite energy model E(v,h) = -v'Wh - a'v - b'h at unit temperature.
///
/// The connectivity mask selects which weights exist. Masked entries of the
/// stored weight matrix are kept bit-for-bit but act as zero everywhere, and
/// the add_* mutators never write them.
class RbmParams {
 public:
  RbmParams(int n_visible, int n_hidden);
  RbmParams(Eigen::MatrixXd w, Eigen::VectorXd a, Eigen::VectorXd b);
  RbmParams(Eigen::MatrixXd w, Eigen::VectorXd a, Eigen::VectorXd b, ConnectivityMask mask);

  int n_visible() const noexcept { return static_cast<int>(a_.size()); }
  int n_hidden() const noexcept { return static_cast<int>(b_.size()); }

  /// Effective weights (masked entries read as zero).
  const Eigen::MatrixXd& w() const noexcept { return w_eff_; }
  /// Stored weights including whatever sits under the mask.
  const Eigen::MatrixXd& raw_w() const noexcept { return w_; }
  const Eigen::VectorXd& a() const noexcept { return a_; }
  const Eigen::VectorXd& b() const noexcept { return b_; }
  const ConnectivityMask& mask() const noexcept { return mask_; }
  bool connected(int i, int j) const { return mask_(i, j) != 0; }
  bool fully_connected() const noexcept;
  int connection_count() const noexcept;

  void add_to_weights(const Eigen::MatrixXd& delta);
  void add_to_visible_bias(const Eigen::VectorXd& delta);
  void add_to_hidden_bias(const Eigen::VectorXd& delta);

  /// FNV-1a over the bit patterns of w, a, b. Stable across runs.
  std::uint64_t checksum() const noexcept;

 private:
  void validate() const;
  void refresh_effective();

  Eigen::MatrixXd w_;
  Eigen::MatrixXd w_eff_;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  ConnectivityMask mask_;
};

inline double logistic(double x) noexcept {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// ln(1 + e^x) without overflow.
inline double softplus(double x) noexcept {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double energy(const RbmParams& rbm, const BinaryConfig& cfg);

/// P(unit = 1 | other layer) for every unit of `layer`.
Eigen::VectorXd conditional(const RbmParams& rbm, Layer layer,
                            std::span<const std::uint8_t> given);

BitVector sample_layer(const RbmParams& rbm, Layer layer,
                       std::span<const std::uint8_t> given, Rng& rng);

/// Alternating block Gibbs: n_g rounds of (hidden | visible, visible | hidden),
/// then one last hidden update.
BinaryConfig gibbs_chain(const RbmParams& rbm, std::span<const std::uint8_t> v0, int n_g,
                         Rng& rng);

/// Data-clamped statistics using exact hidden conditionals.
PairStatistics positive_statistics(const RbmParams& rbm, const std::vector<BitVector>& dataset);

/// F(v) = -a'v - sum_j softplus(b_j + (W'v)_j), so P(v) = exp(-F(v)) / Z.
double free_energy(const RbmParams& rbm, std::span<const std::uint8_t> v);

/// Largest layer size (in units) the exact routines will enumerate.
inline constexpr int kMaxEnumeratedUnits = 20;

double exact_log_partition(const RbmParams& rbm);
PairStatistics exact_model_statistics(const RbmParams& rbm);

/// Plain-text checkpoint:
///   RBM n_v n_h
///   n_v lines of n_h weights (row-major)
///   one line of n_v visible biases
///   one line of n_h hidden biases
///   [MASK, then n_v lines of n_h 0/1 flags; only when some connection is absent]
/// Numbers carry 17 significant digits so reading back is exact.
void write_rbm(std::ostream& out, const RbmParams& rbm);
RbmParams read_rbm(std::istream& in);

}  // namespace anneal_rbm
