#include "anneal_rbm/ising.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "anneal_rbm/errors.hpp"

namespace anneal_rbm {

IsingProblem to_ising(const RbmParams& rbm, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ContractViolation("rescaling alpha must be positive and finite");
  const int n_v = rbm.n_visible();
  const int n_h = rbm.n_hidden();
  const Eigen::MatrixXd& w = rbm.w();
  IsingProblem p;
  p.n_visible = n_v;
  p.n_hidden = n_h;
  p.alpha = alpha;
  p.fields.assign(n_v + n_h, 0.0);
  for (int i = 0; i < n_v; ++i) p.fields[i] = alpha * (rbm.a()[i] / 2.0 + w.row(i).sum() / 4.0);
  for (int j = 0; j < n_h; ++j)
    p.fields[n_v + j] = alpha * (rbm.b()[j] / 2.0 + w.col(j).sum() / 4.0);
  for (int i = 0; i < n_v; ++i)
    for (int j = 0; j < n_h; ++j)
      if (rbm.connected(i, j)) p.couplings.push_back({i, n_v + j, alpha * w(i, j) / 4.0});
  return p;
}

SpinConfig to_spins(const BinaryConfig& cfg) {
  SpinConfig out;
  out.s.reserve(cfg.v.size() + cfg.h.size());
  auto push = [&out](std::uint8_t u) {
    if (u > 1) throw ContractViolation("binary unit outside {0,1}");
    out.s.push_back(static_cast<std::int8_t>(2 * u - 1));
  };
  for (std::uint8_t u : cfg.v) push(u);
  for (std::uint8_t u : cfg.h) push(u);
  return out;
}

BinaryConfig to_binary(const SpinConfig& spins, int n_visible) {
  if (n_visible < 0 || n_visible > static_cast<int>(spins.s.size()))
    throw ContractViolation("visible count exceeds spin vector length");
  BinaryConfig cfg;
  cfg.v.reserve(n_visible);
  cfg.h.reserve(spins.s.size() - n_visible);
  for (std::size_t k = 0; k < spins.s.size(); ++k) {
    const std::int8_t s = spins.s[k];
    if (s != 1 && s != -1) throw ContractViolation("spin outside {-1,+1}");
    const auto u = static_cast<std::uint8_t>((s + 1) / 2);
    (static_cast<int>(k) < n_visible ? cfg.v : cfg.h).push_back(u);
  }
  return cfg;
}

double ising_energy(const IsingProblem& p, const SpinConfig& s) {
  if (static_cast<int>(s.s.size()) != p.n_spins())
    throw ContractViolation("spin configuration length does not match the problem");
  double bracket = 0.0;
  for (const Coupling& c : p.couplings) bracket += c.value * s.s[c.i] * s.s[c.j];
  for (int k = 0; k < p.n_spins(); ++k) bracket += p.fields[k] * s.s[k];
  return -bracket;
}

void write_ising(std::ostream& out, const IsingProblem& p) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "# ising " << p.n_visible << ' ' << p.n_hidden << ' ' << p.alpha << '\n';
  for (const Coupling& c : p.couplings) out << c.i << ' ' << c.j << ' ' << c.value << '\n';
  for (int k = 0; k < p.n_spins(); ++k) out << k << ' ' << p.fields[k] << '\n';
  out.precision(precision);
}

IsingProblem read_ising(std::istream& in) {
  IsingProblem p;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, tag;
      ls >> hash >> tag;
      if (tag == "ising") {
        if (!(ls >> p.n_visible >> p.n_hidden >> p.alpha))
          throw ContractViolation("malformed ising header");
        p.fields.assign(p.n_spins(), 0.0);
        have_header = true;
      }
      continue;
    }
    if (!have_header) throw ContractViolation("ising file lacks its '# ising' header");
    std::vector<double> tok;
    for (double x; ls >> x;) tok.push_back(x);
    if (tok.size() == 3) {
      const int i = static_cast<int>(tok[0]);
      const int j = static_cast<int>(tok[1]);
      if (i < 0 || i >= p.n_visible || j < p.n_visible || j >= p.n_spins())
        throw ContractViolation("coupling index out of range: " + line);
      p.couplings.push_back({i, j, tok[2]});
    } else if (tok.size() == 2) {
      const int k = static_cast<int>(tok[0]);
      if (k < 0 || k >= p.n_spins()) throw ContractViolation("field index out of range: " + line);
      p.fields[k] = tok[1];
    } else {
      throw ContractViolation("unrecognised ising line: " + line);
    }
  }
  if (!have_header) throw ContractViolation("empty ising file");
  return p;
}

}  // namespace anneal_rbm
