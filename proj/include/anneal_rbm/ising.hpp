#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "anneal_rbm/rbm.hpp"

namespace anneal_rbm {

/// Visible-hidden coupling between logical spins i (< n_visible) and j (>= n_visible).
struct Coupling {
  int i;
  int j;
  double value;
};

/// Logical Ising problem over n_visible + n_hidden spins (visible first).
///
/// Sign convention: the classical energy is
///   H(s) = -( sum_{(i,j)} J_ij s_i s_j + sum_k h_k s_k ),
/// i.e. the bracket of the annealing Hamiltonian together with its leading
/// minus sign. Lower H means a more probable configuration, and positive J
/// favours aligned spins.
struct IsingProblem {
  int n_visible = 0;
  int n_hidden = 0;
  std::vector<Coupling> couplings;
  std::vector<double> fields;
  double alpha = 1.0;

  int n_spins() const noexcept { return n_visible + n_hidden; }
};

/// Spins in {-1, +1}, visible block first.
struct SpinConfig {
  std::vector<std::int8_t> s;

  bool operator==(const SpinConfig&) const = default;
};

/// J_ij = alpha w_ij / 4,
/// h_i  = alpha (a_i / 2 + sum_j w_ij / 4),
/// h_j  = alpha (b_j / 2 + sum_i w_ij / 4).
/// Gaps of ising_energy are exactly alpha times the RBM energy gaps; the
/// additive constant is dropped. Couplings exist only where the mask does.
IsingProblem to_ising(const RbmParams& rbm, double alpha);

/// s = 2u - 1, visible block first.
SpinConfig to_spins(const BinaryConfig& cfg);
/// u = (s + 1) / 2, split after n_visible spins.
BinaryConfig to_binary(const SpinConfig& spins, int n_visible);

double ising_energy(const IsingProblem& p, const SpinConfig& s);

/// Line-oriented text: "i j J" per coupling, then "i h" per field, after a
/// "# ising n_visible n_hidden alpha" header.
void write_ising(std::ostream& out, const IsingProblem& p);
IsingProblem read_ising(std::istream& in);

}  // namespace anneal_rbm
