#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "anneal_rbm/ising.hpp"
#include "anneal_rbm/rng.hpp"

namespace anneal_rbm {

/// Chimera-style hardware graph: a rows x cols grid of unit cells, each a
/// complete bipartite K_{L,L} between a vertical shore (u = 0) and a
/// horizontal shore (u = 1). Vertical qubits couple to the same index in the
/// cells above and below; horizontal qubits to the same index left and right.
/// Qubit id = ((row * cols + col) * 2 + u) * L + k.
class HardwareGraph {
 public:
  static HardwareGraph chimera(int rows, int cols, int shore = 4);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int shore() const noexcept { return shore_; }
  int num_qubits() const noexcept { return static_cast<int>(adjacency_.size()); }

  int qubit_id(int row, int col, int u, int k) const;
  const std::vector<int>& neighbors(int q) const { return adjacency_.at(q); }
  bool has_edge(int p, int q) const;
  std::size_t num_edges() const noexcept;

  void mark_faulty(std::span<const int> qubits);
  bool is_faulty(int q) const { return faulty_.at(q); }
  std::vector<int> faulty_qubits() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int shore_ = 0;
  std::vector<std::vector<int>> adjacency_;
  std::vector<bool> faulty_;
};

/// Faulty-qubit list of the shipped 16x16 (2048-qubit) fixture. With it the
/// 16+16 layout fits in 8 positions instead of 16.
std::vector<int> default_faulty_qubits();
std::vector<int> read_faulty_fixture(std::istream& in);
void write_faulty_fixture(std::ostream& out, std::span<const int> qubits);

using Chain = std::vector<int>;

/// Chains for every logical unit (visible first) in each disjoint copy.
struct Embedding {
  int n_visible = 0;
  int n_hidden = 0;
  double chain_coupling = -1.0;
  std::vector<std::vector<Chain>> copies;

  int num_copies() const noexcept { return static_cast<int>(copies.size()); }
  int n_logical() const noexcept { return n_visible + n_hidden; }
  std::size_t qubits_per_copy() const;
};

/// Places complete n_v x n_h bipartite layouts: visible unit i becomes a
/// horizontal line of qubits along one cell row, hidden unit j a vertical
/// line along one cell column, so every visible/hidden pair meets in exactly
/// one cell. n_v and n_h must be multiples of the shore size; a 16+16 layout
/// uses 4x4 cells and 4-qubit chains. Copies are taken greedily, scanning
/// cell offsets row-major and skipping windows that touch a faulty qubit or
/// an earlier copy.
Embedding embed_rbm(const HardwareGraph& g, int n_visible, int n_hidden, double chain_coupling);

/// Native 16+16 layout on a 2x2 block of cells, one qubit per unit.
/// Visible units take the vertical shore of cells (0,0) and (1,1) and the
/// horizontal shore of (0,1) and (1,0); hidden units take the rest. Only
/// couplings present in the hardware survive: 64 inside cells plus 16
/// between them, 80 in total.
struct NativeLayout {
  std::vector<int> visible;  // qubit ids in block-local coordinates (block at 0,0)
  std::vector<int> hidden;
};
NativeLayout native_layout(const HardwareGraph& g);
ConnectivityMask chimera_native_mask();

/// Disjoint copies of the native layout, greedy as in embed_rbm, chains of
/// one qubit. Logical couplings outside the 80-connection mask are not
/// embeddable.
Embedding embed_native(const HardwareGraph& g, double chain_coupling);

/// Throws ContractViolation describing the first broken embedding invariant.
/// Pairs flagged in `required` must share a physical edge; the two-argument
/// form requires every visible/hidden pair.
void validate_embedding(const HardwareGraph& g, const Embedding& e);
void validate_embedding(const HardwareGraph& g, const Embedding& e, const ConnectivityMask& required);

/// Export lines "logical_id: q1 q2 q3 q4 copy k".
void write_embedding(std::ostream& out, const Embedding& e);

struct PhysicalEdge {
  int u;
  int v;
  double value;
  bool intra_chain;
};

/// One copy of a lowered problem in local qubit indices.
///
/// Uses the annealer-native sign convention E(s) = sum h_q s_q + sum J_uv s_u s_v,
/// so a negative chain coupling is ferromagnetic. For unanimous chains
/// E equals the logical ising_energy plus chain_offset().
struct CopyProblem {
  std::vector<int> qubits;  // hardware ids; position = local index
  std::vector<double> fields;
  std::vector<PhysicalEdge> edges;
  std::vector<Chain> chains;  // local indices, one chain per logical unit

  int size() const noexcept { return static_cast<int>(qubits.size()); }
  double energy(std::span<const std::int8_t> spins) const;
  double chain_offset() const;
};

struct PhysicalProblem {
  int n_visible = 0;
  int n_hidden = 0;
  std::vector<CopyProblem> copies;

  int n_logical() const noexcept { return n_visible + n_hidden; }
};

/// Splits each logical coupling equally over the physical edges joining the
/// two chains and each logical field equally over the chain's qubits; chain
/// edges get the embedding's chain coupling. Replicated into every copy.
PhysicalProblem lower_problem(const IsingProblem& p, const Embedding& e, const HardwareGraph& g);

/// One single-qubit chain per logical spin, one copy.
PhysicalProblem direct_problem(const IsingProblem& p);

/// Physical spins whose chains all agree with `logical`.
std::vector<std::int8_t> spread_to_chains(const CopyProblem& copy, const SpinConfig& logical);

/// "u v J" per edge and "u h" per qubit, hardware ids, all copies.
void write_physical_problem(std::ostream& out, const PhysicalProblem& p);

struct PhysicalSample {
  int copy = 0;
  std::vector<std::int8_t> spins;
  std::vector<bool> broken;  // one flag per chain
};

PhysicalSample make_physical_sample(const CopyProblem& copy, int copy_index,
                                    std::vector<std::int8_t> spins);

enum class ChainPolicy { majority_vote, discard };

struct ChainResolution {
  std::optional<SpinConfig> spins;  // empty when the sample was discarded
  int breaks = 0;
};

/// Unanimous chains map directly. Majority vote settles 3-1 splits by count
/// and exact ties with one fair coin from `rng`; discard rejects any break.
ChainResolution resolve_chains(const PhysicalSample& sample, const CopyProblem& copy,
                               ChainPolicy policy, Rng& rng);

}  // namespace anneal_rbm
