#include "anneal_rbm/chimera.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "anneal_rbm/errors.hpp"

namespace anneal_rbm {

HardwareGraph HardwareGraph::chimera(int rows, int cols, int shore) {
  if (rows < 1 || cols < 1 || shore < 1)
    throw ContractViolation("chimera dimensions must be positive");
  HardwareGraph g;
  g.rows_ = rows;
  g.cols_ = cols;
  g.shore_ = shore;
  const int n = rows * cols * 2 * shore;
  g.adjacency_.assign(n, {});
  g.faulty_.assign(n, false);
  auto link = [&g](int p, int q) {
    g.adjacency_[p].push_back(q);
    g.adjacency_[q].push_back(p);
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int k = 0; k < shore; ++k) {
        for (int k2 = 0; k2 < shore; ++k2) link(g.qubit_id(r, c, 0, k), g.qubit_id(r, c, 1, k2));
        if (r + 1 < rows) link(g.qubit_id(r, c, 0, k), g.qubit_id(r + 1, c, 0, k));
        if (c + 1 < cols) link(g.qubit_id(r, c, 1, k), g.qubit_id(r, c + 1, 1, k));
      }
  for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());
  return g;
}

int HardwareGraph::qubit_id(int row, int col, int u, int k) const {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_ || u < 0 || u > 1 || k < 0 || k >= shore_)
    throw ContractViolation("chimera coordinate out of range");
  return ((row * cols_ + col) * 2 + u) * shore_ + k;
}

bool HardwareGraph::has_edge(int p, int q) const {
  const auto& nb = adjacency_.at(p);
  return std::binary_search(nb.begin(), nb.end(), q);
}

std::size_t HardwareGraph::num_edges() const noexcept {
  std::size_t twice = 0;
  for (const auto& nb : adjacency_) twice += nb.size();
  return twice / 2;
}

void HardwareGraph::mark_faulty(std::span<const int> qubits) {
  for (int q : qubits) {
    if (q < 0 || q >= num_qubits())
      throw ContractViolation("faulty qubit id " + std::to_string(q) + " not in graph");
    faulty_[q] = true;
  }
}

std::vector<int> HardwareGraph::faulty_qubits() const {
  std::vector<int> out;
  for (int q = 0; q < num_qubits(); ++q)
    if (faulty_[q]) out.push_back(q);
  return out;
}

std::vector<int> default_faulty_qubits() {
  return {146, 347, 375, 648, 692, 869, 1030, 1262, 1478, 1523, 1611, 1764};
}

std::vector<int> read_faulty_fixture(std::istream& in) {
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    int q = 0;
    if (!(ls >> q) || q < 0) throw ContractViolation("bad faulty-qubit line: " + line);
    out.push_back(q);
  }
  return out;
}

void write_faulty_fixture(std::ostream& out, std::span<const int> qubits) {
  for (int q : qubits) out << q << '\n';
}

std::size_t Embedding::qubits_per_copy() const {
  if (copies.empty()) return 0;
  std::size_t n = 0;
  for (const Chain& c : copies.front()) n += c.size();
  return n;
}

namespace {

std::vector<Chain> layout_at(const HardwareGraph& g, int n_v, int n_h, int row0, int col0) {
  const int L = g.shore();
  const int block_rows = n_v / L;
  const int block_cols = n_h / L;
  std::vector<Chain> chains;
  chains.reserve(n_v + n_h);
  for (int i = 0; i < n_v; ++i) {
    Chain chain;
    for (int c = 0; c < block_cols; ++c) chain.push_back(g.qubit_id(row0 + i / L, col0 + c, 1, i % L));
    chains.push_back(std::move(chain));
  }
  for (int j = 0; j < n_h; ++j) {
    Chain chain;
    for (int r = 0; r < block_rows; ++r) chain.push_back(g.qubit_id(row0 + r, col0 + j / L, 0, j % L));
    chains.push_back(std::move(chain));
  }
  return chains;
}

}  // namespace

Embedding embed_rbm(const HardwareGraph& g, int n_visible, int n_hidden, double chain_coupling) {
  if (!(chain_coupling <= 0.0) || !std::isfinite(chain_coupling))
    throw ContractViolation("chain coupling must be finite and <= 0");
  if (n_visible < 1 || n_hidden < 1) throw ContractViolation("layer sizes must be positive");
  const int L = g.shore();
  if (n_visible % L != 0 || n_hidden % L != 0)
    throw PlacementError("layout needs layer sizes that are multiples of the shore size " +
                         std::to_string(L));
  const int block_rows = n_visible / L;
  const int block_cols = n_hidden / L;
  if (block_rows > g.rows() || block_cols > g.cols())
    throw PlacementError("graph of " + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                         " cells cannot host a " + std::to_string(block_rows) + "x" +
                         std::to_string(block_cols) + " cell layout");

  Embedding e{n_visible, n_hidden, chain_coupling, {}};
  std::vector<bool> used(g.num_qubits(), false);
  for (int r = 0; r + block_rows <= g.rows(); ++r)
    for (int c = 0; c + block_cols <= g.cols(); ++c) {
      std::vector<Chain> chains = layout_at(g, n_visible, n_hidden, r, c);
      const bool ok = std::all_of(chains.begin(), chains.end(), [&](const Chain& ch) {
        return std::none_of(ch.begin(), ch.end(), [&](int q) { return used[q] || g.is_faulty(q); });
      });
      if (!ok) continue;
      for (const Chain& ch : chains)
        for (int q : ch) used[q] = true;
      e.copies.push_back(std::move(chains));
    }
  if (e.copies.empty()) {
    std::ostringstream msg;
    msg << "no fault-free position for a " << n_visible << "+" << n_hidden
        << " layout; blocking faulty qubits:";
    for (int q : g.faulty_qubits()) msg << ' ' << q;
    throw PlacementError(msg.str());
  }
  return e;
}

NativeLayout native_layout(const HardwareGraph& g) {
  if (g.shore() != 4 || g.rows() < 2 || g.cols() < 2)
    throw PlacementError("native layout needs 2x2 cells of shore 4");
  NativeLayout out;
  // (row, col, visible shore) per cell; the hidden units take the other shore.
  const int cells[4][3] = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  for (const auto& cell : cells)
    for (int k = 0; k < 4; ++k) {
      out.visible.push_back(g.qubit_id(cell[0], cell[1], cell[2], k));
      out.hidden.push_back(g.qubit_id(cell[0], cell[1], 1 - cell[2], k));
    }
  return out;
}

ConnectivityMask chimera_native_mask() {
  const HardwareGraph g = HardwareGraph::chimera(2, 2);
  const NativeLayout layout = native_layout(g);
  ConnectivityMask mask = ConnectivityMask::Zero(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) mask(i, j) = g.has_edge(layout.visible[i], layout.hidden[j]) ? 1 : 0;
  return mask;
}

Embedding embed_native(const HardwareGraph& g, double chain_coupling) {
  if (!(chain_coupling <= 0.0) || !std::isfinite(chain_coupling))
    throw ContractViolation("chain coupling must be finite and <= 0");
  const HardwareGraph block = HardwareGraph::chimera(2, 2);
  const NativeLayout layout = native_layout(block);
  // Block-local id -> (row, col, u, k), re-based at each offset.
  auto shift = [&](int q, int row0, int col0) {
    const int k = q % 4;
    const int u = (q / 4) % 2;
    const int cell = q / 8;
    return g.qubit_id(row0 + cell / 2, col0 + cell % 2, u, k);
  };
  Embedding e{16, 16, chain_coupling, {}};
  std::vector<bool> used(g.num_qubits(), false);
  for (int r = 0; r + 2 <= g.rows(); ++r)
    for (int c = 0; c + 2 <= g.cols(); ++c) {
      std::vector<Chain> chains;
      for (int q : layout.visible) chains.push_back({shift(q, r, c)});
      for (int q : layout.hidden) chains.push_back({shift(q, r, c)});
      const bool ok = std::none_of(chains.begin(), chains.end(), [&](const Chain& ch) {
        return used[ch[0]] || g.is_faulty(ch[0]);
      });
      if (!ok) continue;
      for (const Chain& ch : chains) used[ch[0]] = true;
      e.copies.push_back(std::move(chains));
    }
  if (e.copies.empty()) throw PlacementError("no fault-free 2x2 cell block for the native layout");
  return e;
}

void validate_embedding(const HardwareGraph& g, const Embedding& e) {
  validate_embedding(g, e, ConnectivityMask::Ones(e.n_visible, e.n_hidden));
}

void validate_embedding(const HardwareGraph& g, const Embedding& e, const ConnectivityMask& required) {
  if (required.rows() != e.n_visible || required.cols() != e.n_hidden)
    throw ContractViolation("required-coupling mask has the wrong shape");
  std::vector<int> owner(g.num_qubits(), -1);
  for (int k = 0; k < e.num_copies(); ++k) {
    const auto& chains = e.copies[k];
    if (static_cast<int>(chains.size()) != e.n_logical())
      throw ContractViolation("copy " + std::to_string(k) + " has the wrong number of chains");
    for (int unit = 0; unit < e.n_logical(); ++unit) {
      const Chain& ch = chains[unit];
      if (ch.empty()) throw ContractViolation("empty chain");
      for (int q : ch) {
        if (q < 0 || q >= g.num_qubits()) throw ContractViolation("chain qubit outside graph");
        if (g.is_faulty(q)) throw ContractViolation("chain uses faulty qubit " + std::to_string(q));
        if (owner[q] != -1) throw ContractViolation("qubit " + std::to_string(q) + " used twice");
        owner[q] = k * e.n_logical() + unit;
      }
      // Connectivity by flood fill inside the chain.
      std::vector<int> seen{ch.front()};
      for (std::size_t head = 0; head < seen.size(); ++head)
        for (int q : ch)
          if (std::find(seen.begin(), seen.end(), q) == seen.end() && g.has_edge(seen[head], q))
            seen.push_back(q);
      if (seen.size() != ch.size()) throw ContractViolation("chain is not connected");
    }
    for (int i = 0; i < e.n_visible; ++i)
      for (int j = e.n_visible; j < e.n_logical(); ++j) {
        if (!required(i, j - e.n_visible)) continue;
        bool linked = false;
        for (int p : chains[i])
          for (int q : chains[j]) linked = linked || g.has_edge(p, q);
        if (!linked)
          throw ContractViolation("no physical edge between chains " + std::to_string(i) + " and " +
                                  std::to_string(j));
      }
  }
}

void write_embedding(std::ostream& out, const Embedding& e) {
  for (int k = 0; k < e.num_copies(); ++k)
    for (int unit = 0; unit < e.n_logical(); ++unit) {
      out << unit << ':';
      for (int q : e.copies[k][unit]) out << ' ' << q;
      out << " copy " << k << '\n';
    }
}

double CopyProblem::energy(std::span<const std::int8_t> spins) const {
  if (static_cast<int>(spins.size()) != size())
    throw ContractViolation("spin vector does not match the copy size");
  double e = 0.0;
  for (int q = 0; q < size(); ++q) e += fields[q] * spins[q];
  for (const PhysicalEdge& edge : edges) e += edge.value * spins[edge.u] * spins[edge.v];
  return e;
}

double CopyProblem::chain_offset() const {
  double offset = 0.0;
  for (const PhysicalEdge& edge : edges)
    if (edge.intra_chain) offset += edge.value;
  return offset;
}

PhysicalProblem lower_problem(const IsingProblem& p, const Embedding& e, const HardwareGraph& g) {
  if (p.n_visible != e.n_visible || p.n_hidden != e.n_hidden)
    throw ContractViolation("logical problem size does not match the embedding");
  PhysicalProblem out{p.n_visible, p.n_hidden, {}};
  for (const auto& chains : e.copies) {
    CopyProblem copy;
    std::unordered_map<int, int> local;
    for (const Chain& ch : chains)
      for (int q : ch) {
        local.emplace(q, static_cast<int>(copy.qubits.size()));
        copy.qubits.push_back(q);
      }
    copy.fields.assign(copy.qubits.size(), 0.0);
    for (const Chain& ch : chains) {
      Chain local_chain;
      for (int q : ch) local_chain.push_back(local.at(q));
      copy.chains.push_back(std::move(local_chain));
    }
    for (int unit = 0; unit < p.n_spins(); ++unit) {
      const Chain& ch = chains[unit];
      const double share = -p.fields[unit] / static_cast<double>(ch.size());
      for (int q : ch) copy.fields[local.at(q)] = share;
      for (std::size_t x = 0; x < ch.size(); ++x)
        for (std::size_t y = x + 1; y < ch.size(); ++y)
          if (g.has_edge(ch[x], ch[y]))
            copy.edges.push_back({local.at(ch[x]), local.at(ch[y]), e.chain_coupling, true});
    }
    for (const Coupling& c : p.couplings) {
      std::vector<std::pair<int, int>> links;
      for (int a : chains[c.i])
        for (int b : chains[c.j])
          if (g.has_edge(a, b)) links.emplace_back(a, b);
      if (links.empty())
        throw ContractViolation("embedding has no physical edge for logical coupling (" +
                                std::to_string(c.i) + ", " + std::to_string(c.j) + ")");
      const double share = -c.value / static_cast<double>(links.size());
      for (auto [a, b] : links) copy.edges.push_back({local.at(a), local.at(b), share, false});
    }
    out.copies.push_back(std::move(copy));
  }
  return out;
}

PhysicalProblem direct_problem(const IsingProblem& p) {
  CopyProblem copy;
  for (int k = 0; k < p.n_spins(); ++k) {
    copy.qubits.push_back(k);
    copy.fields.push_back(-p.fields[k]);
    copy.chains.push_back({k});
  }
  for (const Coupling& c : p.couplings) copy.edges.push_back({c.i, c.j, -c.value, false});
  return {p.n_visible, p.n_hidden, {std::move(copy)}};
}

std::vector<std::int8_t> spread_to_chains(const CopyProblem& copy, const SpinConfig& logical) {
  if (logical.s.size() != copy.chains.size())
    throw ContractViolation("logical configuration does not match the number of chains");
  std::vector<std::int8_t> spins(copy.size(), 1);
  for (std::size_t unit = 0; unit < copy.chains.size(); ++unit)
    for (int q : copy.chains[unit]) spins[q] = logical.s[unit];
  return spins;
}

void write_physical_problem(std::ostream& out, const PhysicalProblem& p) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const CopyProblem& copy : p.copies) {
    for (const PhysicalEdge& edge : copy.edges)
      out << copy.qubits[edge.u] << ' ' << copy.qubits[edge.v] << ' ' << edge.value << '\n';
    for (int q = 0; q < copy.size(); ++q) out << copy.qubits[q] << ' ' << copy.fields[q] << '\n';
  }
  out.precision(precision);
}

PhysicalSample make_physical_sample(const CopyProblem& copy, int copy_index,
                                    std::vector<std::int8_t> spins) {
  if (static_cast<int>(spins.size()) != copy.size())
    throw ContractViolation("physical sample does not cover the copy");
  PhysicalSample s{copy_index, std::move(spins), {}};
  s.broken.reserve(copy.chains.size());
  for (const Chain& ch : copy.chains) {
    const std::int8_t first = s.spins[ch.front()];
    s.broken.push_back(std::any_of(ch.begin(), ch.end(), [&](int q) { return s.spins[q] != first; }));
  }
  return s;
}

ChainResolution resolve_chains(const PhysicalSample& sample, const CopyProblem& copy,
                               ChainPolicy policy, Rng& rng) {
  if (sample.spins.size() != copy.qubits.size() || sample.broken.size() != copy.chains.size())
    throw ContractViolation("physical sample does not match the copy");
  ChainResolution out;
  SpinConfig logical;
  logical.s.reserve(copy.chains.size());
  for (std::size_t unit = 0; unit < copy.chains.size(); ++unit) {
    const Chain& ch = copy.chains[unit];
    if (!sample.broken[unit]) {
      logical.s.push_back(sample.spins[ch.front()]);
      continue;
    }
    ++out.breaks;
    int vote = 0;
    for (int q : ch) vote += sample.spins[q];
    if (vote > 0) logical.s.push_back(1);
    else if (vote < 0) logical.s.push_back(-1);
    else logical.s.push_back(uniform01(rng) < 0.5 ? 1 : -1);
  }
  if (policy == ChainPolicy::discard && out.breaks > 0) return out;
  out.spins = std::move(logical);
  return out;
}

}  // namespace anneal_rbm
