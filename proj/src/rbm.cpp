#include "anneal_rbm/rbm.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "anneal_rbm/errors.hpp"

namespace anneal_rbm {

PairStatistics PairStatistics::zeros(int n_v, int n_h) {
  return {Eigen::MatrixXd::Zero(n_v, n_h), Eigen::VectorXd::Zero(n_v), Eigen::VectorXd::Zero(n_h)};
}

RbmParams::RbmParams(int n_visible, int n_hidden)
    : RbmParams(Eigen::MatrixXd::Zero(std::max(n_visible, 0), std::max(n_hidden, 0)),
                Eigen::VectorXd::Zero(std::max(n_visible, 0)),
                Eigen::VectorXd::Zero(std::max(n_hidden, 0))) {}

RbmParams::RbmParams(Eigen::MatrixXd w, Eigen::VectorXd a, Eigen::VectorXd b)
    : w_(std::move(w)), a_(std::move(a)), b_(std::move(b)) {
  mask_ = ConnectivityMask::Ones(w_.rows(), w_.cols());
  validate();
  refresh_effective();
}

RbmParams::RbmParams(Eigen::MatrixXd w, Eigen::VectorXd a, Eigen::VectorXd b,
                     ConnectivityMask mask)
    : w_(std::move(w)), a_(std::move(a)), b_(std::move(b)), mask_(std::move(mask)) {
  validate();
  refresh_effective();
}

void RbmParams::validate() const {
  if (a_.size() < 1 || b_.size() < 1)
    throw ContractViolation("RBM needs at least one visible and one hidden unit");
  if (w_.rows() != a_.size() || w_.cols() != b_.size())
    throw ContractViolation("weight matrix shape does not match bias lengths");
  if (mask_.rows() != w_.rows() || mask_.cols() != w_.cols())
    throw ContractViolation("mask shape does not match weight matrix");
  if (!w_.allFinite() || !a_.allFinite() || !b_.allFinite())
    throw ContractViolation("RBM parameters must be finite");
  for (Eigen::Index k = 0; k < mask_.size(); ++k)
    if (mask_.data()[k] > 1) throw ContractViolation("mask entries must be 0 or 1");
}

void RbmParams::refresh_effective() {
  w_eff_ = w_;
  for (Eigen::Index k = 0; k < w_eff_.size(); ++k)
    if (mask_.data()[k] == 0) w_eff_.data()[k] = 0.0;
}

bool RbmParams::fully_connected() const noexcept {
  return connection_count() == static_cast<int>(mask_.size());
}

int RbmParams::connection_count() const noexcept {
  int n = 0;
  for (Eigen::Index k = 0; k < mask_.size(); ++k) n += mask_.data()[k];
  return n;
}

void RbmParams::add_to_weights(const Eigen::MatrixXd& delta) {
  if (delta.rows() != w_.rows() || delta.cols() != w_.cols())
    throw ContractViolation("weight update has the wrong shape");
  for (Eigen::Index k = 0; k < w_.size(); ++k)
    if (mask_.data()[k] != 0) w_.data()[k] += delta.data()[k];
  refresh_effective();
}

void RbmParams::add_to_visible_bias(const Eigen::VectorXd& delta) {
  if (delta.size() != a_.size()) throw ContractViolation("visible bias update has the wrong length");
  a_ += delta;
}

void RbmParams::add_to_hidden_bias(const Eigen::VectorXd& delta) {
  if (delta.size() != b_.size()) throw ContractViolation("hidden bias update has the wrong length");
  b_ += delta;
}

std::uint64_t RbmParams::checksum() const noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const double* data, Eigen::Index n) {
    for (Eigen::Index k = 0; k < n; ++k) {
      std::uint64_t bits;
      std::memcpy(&bits, data + k, sizeof bits);
      for (int byte = 0; byte < 8; ++byte) {
        hash ^= (bits >> (8 * byte)) & 0xFFu;
        hash *= 0x100000001b3ULL;
      }
    }
  };
  mix(w_.data(), w_.size());
  mix(a_.data(), a_.size());
  mix(b_.data(), b_.size());
  return hash;
}

namespace {

void require_bits(std::span<const std::uint8_t> bits, int expected, const char* what) {
  if (static_cast<int>(bits.size()) != expected)
    throw ContractViolation(std::string(what) + " has length " + std::to_string(bits.size()) +
                            ", expected " + std::to_string(expected));
  for (std::uint8_t b : bits)
    if (b > 1) throw ContractViolation(std::string(what) + " contains a value other than 0 or 1");
}

// Hidden pre-activations b + W'v.
void hidden_field(const RbmParams& rbm, std::span<const std::uint8_t> v, double* out) {
  const Eigen::MatrixXd& w = rbm.w();
  const int n_v = rbm.n_visible();
  for (int j = 0; j < rbm.n_hidden(); ++j) {
    const double* col = w.data() + static_cast<Eigen::Index>(j) * n_v;
    double x = rbm.b()[j];
    for (int i = 0; i < n_v; ++i)
      if (v[i]) x += col[i];
    out[j] = x;
  }
}

// Visible pre-activations a + W h.
void visible_field(const RbmParams& rbm, std::span<const std::uint8_t> h, double* out) {
  const Eigen::MatrixXd& w = rbm.w();
  const int n_v = rbm.n_visible();
  for (int i = 0; i < n_v; ++i) out[i] = rbm.a()[i];
  for (int j = 0; j < rbm.n_hidden(); ++j) {
    if (!h[j]) continue;
    const double* col = w.data() + static_cast<Eigen::Index>(j) * n_v;
    for (int i = 0; i < n_v; ++i) out[i] += col[i];
  }
}

void sample_into(const double* field, int n, Rng& rng, std::uint8_t* out) {
  for (int k = 0; k < n; ++k) out[k] = uniform01(rng) < logistic(field[k]) ? 1 : 0;
}

}  // namespace

double energy(const RbmParams& rbm, const BinaryConfig& cfg) {
  require_bits(cfg.v, rbm.n_visible(), "visible configuration");
  require_bits(cfg.h, rbm.n_hidden(), "hidden configuration");
  std::vector<double> x(rbm.n_hidden());
  hidden_field(rbm, cfg.v, x.data());
  double e = 0.0;
  for (int i = 0; i < rbm.n_visible(); ++i)
    if (cfg.v[i]) e -= rbm.a()[i];
  // x already contains b_j + sum_i w_ij v_i.
  for (int j = 0; j < rbm.n_hidden(); ++j)
    if (cfg.h[j]) e -= x[j];
  return e;
}

Eigen::VectorXd conditional(const RbmParams& rbm, Layer layer,
                            std::span<const std::uint8_t> given) {
  if (layer == Layer::hidden) {
    require_bits(given, rbm.n_visible(), "visible layer");
    Eigen::VectorXd x(rbm.n_hidden());
    hidden_field(rbm, given, x.data());
    return x.unaryExpr([](double z) { return logistic(z); });
  }
  require_bits(given, rbm.n_hidden(), "hidden layer");
  Eigen::VectorXd x(rbm.n_visible());
  visible_field(rbm, given, x.data());
  return x.unaryExpr([](double z) { return logistic(z); });
}

BitVector sample_layer(const RbmParams& rbm, Layer layer, std::span<const std::uint8_t> given,
                       Rng& rng) {
  Eigen::VectorXd p = conditional(rbm, layer, given);
  BitVector out(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) out[k] = uniform01(rng) < p[k] ? 1 : 0;
  return out;
}

BinaryConfig gibbs_chain(const RbmParams& rbm, std::span<const std::uint8_t> v0, int n_g,
                         Rng& rng) {
  require_bits(v0, rbm.n_visible(), "initial visible vector");
  if (n_g < 0) throw ContractViolation("n_g must be non-negative");
  const int n_v = rbm.n_visible();
  const int n_h = rbm.n_hidden();
  BinaryConfig cfg{BitVector(v0.begin(), v0.end()), BitVector(n_h)};
  std::vector<double> xh(n_h), xv(n_v);
  for (int step = 0; step < n_g; ++step) {
    hidden_field(rbm, cfg.v, xh.data());
    sample_into(xh.data(), n_h, rng, cfg.h.data());
    visible_field(rbm, cfg.h, xv.data());
    sample_into(xv.data(), n_v, rng, cfg.v.data());
  }
  hidden_field(rbm, cfg.v, xh.data());
  sample_into(xh.data(), n_h, rng, cfg.h.data());
  return cfg;
}

PairStatistics positive_statistics(const RbmParams& rbm, const std::vector<BitVector>& dataset) {
  if (dataset.empty()) throw ContractViolation("positive statistics need a nonempty dataset");
  const int n_v = rbm.n_visible();
  const int n_h = rbm.n_hidden();
  PairStatistics stats = PairStatistics::zeros(n_v, n_h);
  Eigen::VectorXd p(n_h);
  for (const BitVector& r : dataset) {
    require_bits(r, n_v, "data vector");
    hidden_field(rbm, r, p.data());
    p = p.unaryExpr([](double z) { return logistic(z); });
    stats.h_mean += p;
    for (int i = 0; i < n_v; ++i) {
      if (!r[i]) continue;
      stats.v_mean[i] += 1.0;
      stats.vh.row(i) += p.transpose();
    }
  }
  const double inv = 1.0 / static_cast<double>(dataset.size());
  stats.vh *= inv;
  stats.v_mean *= inv;
  stats.h_mean *= inv;
  return stats;
}

double free_energy(const RbmParams& rbm, std::span<const std::uint8_t> v) {
  require_bits(v, rbm.n_visible(), "visible vector");
  std::vector<double> x(rbm.n_hidden());
  hidden_field(rbm, v, x.data());
  double f = 0.0;
  for (int i = 0; i < rbm.n_visible(); ++i)
    if (v[i]) f -= rbm.a()[i];
  for (double xj : x) f -= softplus(xj);
  return f;
}

namespace {

// Enumeration over the smaller layer ("enumerated"); the other layer is
// summed out analytically. weights_t is (other x enumerated) so that the
// contribution of one enumerated unit is a contiguous column.
struct Marginalizer {
  bool enumerate_visible;
  int n_enum;
  int n_other;
  Eigen::MatrixXd weights_t;
  Eigen::VectorXd enum_bias;
  Eigen::VectorXd other_bias;

  explicit Marginalizer(const RbmParams& rbm) {
    enumerate_visible = rbm.n_visible() <= rbm.n_hidden();
    n_enum = enumerate_visible ? rbm.n_visible() : rbm.n_hidden();
    n_other = enumerate_visible ? rbm.n_hidden() : rbm.n_visible();
    if (n_enum > kMaxEnumeratedUnits)
      throw IntractableError("exact enumeration over " + std::to_string(n_enum) +
                             " units is intractable (limit " +
                             std::to_string(kMaxEnumeratedUnits) + ")");
    weights_t = enumerate_visible ? Eigen::MatrixXd(rbm.w().transpose()) : rbm.w();
    enum_bias = enumerate_visible ? rbm.a() : rbm.b();
    other_bias = enumerate_visible ? rbm.b() : rbm.a();
  }

  std::uint64_t states() const { return std::uint64_t{1} << n_enum; }

  // Log of the unnormalized marginal weight of enumerated state `bits`;
  // leaves the other layer's pre-activations in `field`.
  double log_weight(std::uint64_t bits, Eigen::VectorXd& field) const {
    field = other_bias;
    double t = 0.0;
    for (std::uint64_t rest = bits; rest != 0; rest &= rest - 1) {
      const int k = std::countr_zero(rest);
      t += enum_bias[k];
      field += weights_t.col(k);
    }
    for (int o = 0; o < n_other; ++o) t += softplus(field[o]);
    return t;
  }
};

}  // namespace

double exact_log_partition(const RbmParams& rbm) {
  const Marginalizer m(rbm);
  Eigen::VectorXd field(m.n_other);
  // Streaming log-sum-exp.
  double max_t = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::uint64_t s = 0; s < m.states(); ++s) {
    const double t = m.log_weight(s, field);
    if (t > max_t) {
      sum = sum * std::exp(max_t - t) + 1.0;
      max_t = t;
    } else {
      sum += std::exp(t - max_t);
    }
  }
  return max_t + std::log(sum);
}

PairStatistics exact_model_statistics(const RbmParams& rbm) {
  const Marginalizer m(rbm);
  const double log_z = exact_log_partition(rbm);
  Eigen::VectorXd field(m.n_other);
  Eigen::VectorXd enum_mean = Eigen::VectorXd::Zero(m.n_enum);
  Eigen::VectorXd other_mean = Eigen::VectorXd::Zero(m.n_other);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(m.n_other, m.n_enum);
  for (std::uint64_t s = 0; s < m.states(); ++s) {
    const double p = std::exp(m.log_weight(s, field) - log_z);
    const Eigen::VectorXd sig = field.unaryExpr([](double z) { return logistic(z); });
    other_mean += p * sig;
    for (std::uint64_t rest = s; rest != 0; rest &= rest - 1) {
      const int k = std::countr_zero(rest);
      enum_mean[k] += p;
      cross.col(k) += p * sig;
    }
  }
  PairStatistics stats;
  if (m.enumerate_visible) {
    stats.vh = cross.transpose();
    stats.v_mean = enum_mean;
    stats.h_mean = other_mean;
  } else {
    stats.vh = cross;
    stats.v_mean = other_mean;
    stats.h_mean = enum_mean;
  }
  return stats;
}

void write_rbm(std::ostream& out, const RbmParams& rbm) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "RBM " << rbm.n_visible() << ' ' << rbm.n_hidden() << '\n';
  for (int i = 0; i < rbm.n_visible(); ++i) {
    for (int j = 0; j < rbm.n_hidden(); ++j) out << (j ? " " : "") << rbm.raw_w()(i, j);
    out << '\n';
  }
  for (int i = 0; i < rbm.n_visible(); ++i) out << (i ? " " : "") << rbm.a()[i];
  out << '\n';
  for (int j = 0; j < rbm.n_hidden(); ++j) out << (j ? " " : "") << rbm.b()[j];
  out << '\n';
  if (!rbm.fully_connected()) {
    out << "MASK\n";
    for (int i = 0; i < rbm.n_visible(); ++i) {
      for (int j = 0; j < rbm.n_hidden(); ++j) out << (j ? " " : "") << int(rbm.mask()(i, j));
      out << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

RbmParams read_rbm(std::istream& in) {
  std::string tag;
  int n_v = 0;
  int n_h = 0;
  if (!(in >> tag >> n_v >> n_h) || tag != "RBM" || n_v < 1 || n_h < 1)
    throw ContractViolation("not an RBM checkpoint (expected header 'RBM n_v n_h')");
  Eigen::MatrixXd w(n_v, n_h);
  Eigen::VectorXd a(n_v);
  Eigen::VectorXd b(n_h);
  auto read_values = [&in](double* dst, Eigen::Index n, const char* what) {
    for (Eigen::Index k = 0; k < n; ++k)
      if (!(in >> dst[k])) throw ContractViolation(std::string("truncated checkpoint in ") + what);
  };
  for (int i = 0; i < n_v; ++i)
    for (int j = 0; j < n_h; ++j)
      if (!(in >> w(i, j))) throw ContractViolation("truncated checkpoint in weights");
  read_values(a.data(), n_v, "visible biases");
  read_values(b.data(), n_h, "hidden biases");
  ConnectivityMask mask = ConnectivityMask::Ones(n_v, n_h);
  if (in >> tag) {
    if (tag != "MASK") throw ContractViolation("unexpected token '" + tag + "' in checkpoint");
    for (int i = 0; i < n_v; ++i)
      for (int j = 0; j < n_h; ++j) {
        int flag = -1;
        if (!(in >> flag) || (flag != 0 && flag != 1))
          throw ContractViolation("bad mask entry in checkpoint");
        mask(i, j) = static_cast<std::uint8_t>(flag);
      }
  }
  return RbmParams(std::move(w), std::move(a), std::move(b), std::move(mask));
}

}  // namespace anneal_rbm
