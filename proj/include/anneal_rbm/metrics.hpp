#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anneal_rbm/rbm.hpp"

namespace anneal_rbm {

/// Mean over the dataset of ln P(v) = -F(v) - ln Z, exact.
double log_likelihood_av(const RbmParams& rbm, const std::vector<BitVector>& dataset);

/// Same, reusing a precomputed ln Z.
double log_likelihood_av(const RbmParams& rbm, const std::vector<BitVector>& dataset, double log_z);

/// Monte-Carlo reconstruction score.
///
/// Per image and trial: clamped pixels keep their true values, free pixels
/// start uniformly random, then n_g rounds of (hidden | visible, free visible |
/// hidden). Returns the fraction of free pixels equal to the truth, averaged
/// over free pixels, trials and images. Trial t of image k draws from its own
/// stream derived from `seed`.
double reconstruction_score(const RbmParams& rbm, const std::vector<BitVector>& dataset,
                            std::span<const int> clamped, int n_g, int trials, std::uint64_t seed);

/// Large-n_g limit of reconstruction_score: mean over images and free pixels
/// of P(pixel = truth | clamped pixels), by enumerating the free pixels.
/// At most kMaxEnumeratedUnits free pixels.
double exact_reconstruction_score(const RbmParams& rbm, const std::vector<BitVector>& dataset,
                                  std::span<const int> clamped);

struct DeltaProbability {
  double total = 0.0;
  std::vector<double> per_image;  // dataset order
  double bottom_half = 0.0;       // sum of the floor(N/2) smallest entries
};

/// Model probability of each dataset image, exact.
DeltaProbability delta_probability(const RbmParams& rbm, const std::vector<BitVector>& dataset);
DeltaProbability delta_probability(const RbmParams& rbm, const std::vector<BitVector>& dataset,
                                   double log_z);

/// Equal-width histogram of RBM energies over [lo, hi] with an optional exact
/// Boltzmann (T = 1) energy law in the same bins. When every sample has the
/// same energy E the range is [E - 0.5, E + 0.5].
struct EnergyHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
  std::vector<double> overlay;  // empty unless requested
  double overlay_below = 0.0;   // exact mass under lo
  double overlay_above = 0.0;   // exact mass over hi
  double min_energy = 0.0;

  double bin_width() const noexcept { return (hi - lo) / static_cast<double>(counts.size()); }
  std::size_t bin_of(double e) const noexcept;
};

/// Overlay requires n_visible + n_hidden <= 32; it visits every joint state.
EnergyHistogram energy_histogram(const RbmParams& rbm, const std::vector<BinaryConfig>& samples,
                                 int bins, bool with_overlay);

}  // namespace anneal_rbm
