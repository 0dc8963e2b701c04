#include "anneal_rbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "anneal_rbm/errors.hpp"
#include "anneal_rbm/parallel.hpp"

namespace anneal_rbm {

namespace {

void check_dataset(const RbmParams& rbm, const std::vector<BitVector>& dataset) {
  if (dataset.empty()) throw ContractViolation("dataset is empty");
  for (const BitVector& v : dataset)
    if (static_cast<int>(v.size()) != rbm.n_visible())
      throw ContractViolation("dataset vector length differs from the visible layer");
}

std::vector<bool> clamp_flags(int n_v, std::span<const int> clamped) {
  std::vector<bool> flags(n_v, false);
  for (int idx : clamped) {
    if (idx < 0 || idx >= n_v) throw ContractViolation("clamp index " + std::to_string(idx) + " out of range");
    flags[idx] = true;
  }
  if (std::all_of(flags.begin(), flags.end(), [](bool f) { return f; }))
    throw ContractViolation("clamp mask covers every pixel; nothing to reconstruct");
  return flags;
}

}  // namespace

double log_likelihood_av(const RbmParams& rbm, const std::vector<BitVector>& dataset) {
  return log_likelihood_av(rbm, dataset, exact_log_partition(rbm));
}

double log_likelihood_av(const RbmParams& rbm, const std::vector<BitVector>& dataset, double log_z) {
  check_dataset(rbm, dataset);
  double total = 0.0;
  for (const BitVector& v : dataset) total += -free_energy(rbm, v) - log_z;
  return total / static_cast<double>(dataset.size());
}

double reconstruction_score(const RbmParams& rbm, const std::vector<BitVector>& dataset,
                            std::span<const int> clamped, int n_g, int trials, std::uint64_t seed) {
  check_dataset(rbm, dataset);
  if (n_g < 1) throw ContractViolation("reconstruction needs n_g >= 1");
  if (trials < 1) throw ContractViolation("reconstruction needs at least one trial");
  const int n_v = rbm.n_visible();
  const std::vector<bool> fixed = clamp_flags(n_v, clamped);
  const int n_free = static_cast<int>(std::count(fixed.begin(), fixed.end(), false));

  std::vector<double> hits(dataset.size() * trials, 0.0);
  parallel_for(hits.size(), [&](std::size_t task) {
    const std::size_t image = task / trials;
    const std::size_t trial = task % trials;
    const BitVector& truth = dataset[image];
    Rng rng = make_stream(seed, Stream::reconstruction, {image, trial});
    BitVector v = truth;
    for (int i = 0; i < n_v; ++i)
      if (!fixed[i]) v[i] = uniform01(rng) < 0.5 ? 1 : 0;
    for (int step = 0; step < n_g; ++step) {
      const BitVector h = sample_layer(rbm, Layer::hidden, v, rng);
      const Eigen::VectorXd p = conditional(rbm, Layer::visible, h);
      for (int i = 0; i < n_v; ++i)
        if (!fixed[i]) v[i] = uniform01(rng) < p[i] ? 1 : 0;
    }
    int correct = 0;
    for (int i = 0; i < n_v; ++i)
      if (!fixed[i] && v[i] == truth[i]) ++correct;
    hits[task] = static_cast<double>(correct) / n_free;
  });
  double total = 0.0;
  for (double h : hits) total += h;
  return total / static_cast<double>(hits.size());
}

double exact_reconstruction_score(const RbmParams& rbm, const std::vector<BitVector>& dataset,
                                  std::span<const int> clamped) {
  check_dataset(rbm, dataset);
  const int n_v = rbm.n_visible();
  const std::vector<bool> fixed = clamp_flags(n_v, clamped);
  std::vector<int> free;
  for (int i = 0; i < n_v; ++i)
    if (!fixed[i]) free.push_back(i);
  const int f = static_cast<int>(free.size());
  if (f > kMaxEnumeratedUnits) throw IntractableError("too many free pixels to enumerate");

  double total = 0.0;
  for (const BitVector& truth : dataset) {
    std::vector<double> log_w(std::size_t{1} << f);
    BitVector v = truth;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < log_w.size(); ++u) {
      for (int k = 0; k < f; ++k) v[free[k]] = static_cast<std::uint8_t>((u >> k) & 1u);
      log_w[u] = -free_energy(rbm, v);
      top = std::max(top, log_w[u]);
    }
    double norm = 0.0;
    std::vector<double> agree(f, 0.0);
    for (std::size_t u = 0; u < log_w.size(); ++u) {
      const double p = std::exp(log_w[u] - top);
      norm += p;
      for (int k = 0; k < f; ++k)
        if (((u >> k) & 1u) == truth[free[k]]) agree[k] += p;
    }
    for (int k = 0; k < f; ++k) total += agree[k] / norm / f;
  }
  return total / static_cast<double>(dataset.size());
}

DeltaProbability delta_probability(const RbmParams& rbm, const std::vector<BitVector>& dataset) {
  return delta_probability(rbm, dataset, exact_log_partition(rbm));
}

DeltaProbability delta_probability(const RbmParams& rbm, const std::vector<BitVector>& dataset,
                                   double log_z) {
  check_dataset(rbm, dataset);
  DeltaProbability out;
  for (const BitVector& v : dataset) out.per_image.push_back(std::exp(-free_energy(rbm, v) - log_z));
  for (double p : out.per_image) out.total += p;
  std::vector<double> sorted = out.per_image;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size() / 2; ++k) out.bottom_half += sorted[k];
  return out;
}

std::size_t EnergyHistogram::bin_of(double e) const noexcept {
  const double x = (e - lo) / bin_width();
  if (!(x > 0.0)) return 0;
  return std::min(counts.size() - 1, static_cast<std::size_t>(x));
}

EnergyHistogram energy_histogram(const RbmParams& rbm, const std::vector<BinaryConfig>& samples,
                                 int bins, bool with_overlay) {
  if (samples.empty()) throw ContractViolation("energy histogram of an empty batch");
  if (bins < 1) throw ContractViolation("histogram needs at least one bin");
  std::vector<double> energies;
  energies.reserve(samples.size());
  for (const BinaryConfig& cfg : samples) energies.push_back(energy(rbm, cfg));
  const auto [lo_it, hi_it] = std::minmax_element(energies.begin(), energies.end());
  EnergyHistogram hist;
  hist.min_energy = *lo_it;
  hist.lo = *lo_it;
  hist.hi = *hi_it;
  if (hist.hi - hist.lo < 1e-12) {
    hist.lo -= 0.5;
    hist.hi += 0.5;
  }
  hist.counts.assign(bins, 0);
  for (double e : energies) ++hist.counts[hist.bin_of(e)];
  if (!with_overlay) return hist;

  const int n_v = rbm.n_visible();
  const int n_h = rbm.n_hidden();
  if (n_v + n_h > 32) throw IntractableError("exact energy law limited to 32 units");
  const double log_z = exact_log_partition(rbm);
  hist.overlay.assign(bins, 0.0);
  // Split the visible layer in two halves so each joint state costs one
  // product of table entries.
  const int n_low = n_v / 2;
  const int n_high = n_v - n_low;
  const std::size_t n_low_states = std::size_t{1} << n_low;
  const std::size_t n_high_states = std::size_t{1} << n_high;
  std::vector<double> e_low(n_low_states), e_high(n_high_states);
  std::vector<double> p_low(n_low_states), p_high(n_high_states);
  std::vector<double> field(n_v);
  const Eigen::MatrixXd& w = rbm.w();
  for (std::uint64_t hbits = 0; hbits < (std::uint64_t{1} << n_h); ++hbits) {
    double e_h = 0.0;
    for (int i = 0; i < n_v; ++i) field[i] = rbm.a()[i];
    for (int j = 0; j < n_h; ++j)
      if ((hbits >> j) & 1u) {
        e_h -= rbm.b()[j];
        for (int i = 0; i < n_v; ++i) field[i] += w(i, j);
      }
    for (std::size_t u = 0; u < n_low_states; ++u) {
      double e = 0.0;
      for (int k = 0; k < n_low; ++k)
        if ((u >> k) & 1u) e -= field[k];
      e_low[u] = e;
    }
    // Both factors stay <= 1 because no joint energy lies below -ln Z.
    const double low_min = *std::min_element(e_low.begin(), e_low.end());
    for (std::size_t u = 0; u < n_low_states; ++u) p_low[u] = std::exp(-(e_low[u] - low_min));
    for (std::size_t u = 0; u < n_high_states; ++u) {
      double e = e_h;
      for (int k = 0; k < n_high; ++k)
        if ((u >> k) & 1u) e -= field[n_low + k];
      e_high[u] = e;
      p_high[u] = std::exp(-(e + low_min) - log_z);
    }
    for (std::size_t hi_state = 0; hi_state < n_high_states; ++hi_state)
      for (std::size_t lo_state = 0; lo_state < n_low_states; ++lo_state) {
        const double e = e_high[hi_state] + e_low[lo_state];
        const double p = p_high[hi_state] * p_low[lo_state];
        if (e < hist.lo) hist.overlay_below += p;
        else if (e > hist.hi) hist.overlay_above += p;
        else hist.overlay[hist.bin_of(e)] += p;
      }
  }
  return hist;
}

}  // namespace anneal_rbm
