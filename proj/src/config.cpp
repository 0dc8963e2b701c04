#include "anneal_rbm/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "anneal_rbm/bas.hpp"
#include "anneal_rbm/errors.hpp"

namespace anneal_rbm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

double parse_double(const std::string& key, const std::string& text) {
  double x = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x))
    throw ConfigError(key, "value '" + text + "' for " + key + " is not a finite number");
  return x;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long x = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key, "value '" + text + "' for " + key + " is not an integer");
  return x;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key, "value '" + text + "' for " + key + " is not true/false");
}

struct Entry {
  const char* name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
};

template <class T>
Entry int_entry(const char* name, T ExperimentConfig::*field) {
  return {name, [field](const ExperimentConfig& c) { return std::to_string(c.*field); },
          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*field = static_cast<T>(parse_int(k, v));
          }};
}

Entry real_entry(const char* name, double ExperimentConfig::*field) {
  return {name, [field](const ExperimentConfig& c) { return format_double(c.*field); },
          [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = parse_double(k, v); }};
}

// Same as above for members of nested structs.
template <class Get>
Entry nested_real(const char* name, Get ref) {
  return {name, [ref](const ExperimentConfig& c) { return format_double(ref(const_cast<ExperimentConfig&>(c))); },
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_double(k, v); }};
}

template <class Get>
Entry nested_int(const char* name, Get ref) {
  return {name, [ref](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); },
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) {
            ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(parse_int(k, v));
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      int_entry("data.m", &ExperimentConfig::bas_m),
      int_entry("model.n_hidden", &ExperimentConfig::n_hidden),
      {"model.sparse", [](const ExperimentConfig& c) { return std::string(c.sparse ? "true" : "false"); },
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sparse = parse_bool(k, v); }},
      {"train.method", [](const ExperimentConfig& c) { return std::string(to_string(c.train.method)); },
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         try {
           c.train.method = parse_method(v);
         } catch (const ContractViolation&) {
           throw ConfigError(k, "unknown method '" + v + "' for " + k);
         }
       }},
      nested_int("train.epochs", [](ExperimentConfig& c) -> int& { return c.train.epochs; }),
      nested_real("train.eta", [](ExperimentConfig& c) -> double& { return c.train.eta; }),
      nested_real("train.alpha", [](ExperimentConfig& c) -> double& { return c.train.alpha; }),
      nested_int("train.n_g", [](ExperimentConfig& c) -> int& { return c.train.n_g; }),
      nested_int("train.cycles", [](ExperimentConfig& c) -> int& { return c.train.cycles; }),
      {"train.seed", [](const ExperimentConfig& c) { return std::to_string(c.train.seed); },
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const long long x = parse_int(k, v);
         if (x < 0) throw ConfigError(k, k + " must be non-negative");
         c.train.seed = static_cast<std::uint64_t>(x);
       }},
      nested_real("init.mu", [](ExperimentConfig& c) -> double& { return c.train.init.mu; }),
      nested_real("init.sigma", [](ExperimentConfig& c) -> double& { return c.train.init.sigma; }),
      nested_real("init.lo", [](ExperimentConfig& c) -> double& { return c.train.init.lo; }),
      nested_real("init.hi", [](ExperimentConfig& c) -> double& { return c.train.init.hi; }),
      nested_int("metrics.ll_every", [](ExperimentConfig& c) -> int& { return c.train.ll_every; }),
      nested_int("metrics.reconstruction_every", [](ExperimentConfig& c) -> int& { return c.train.reconstruction_every; }),
      nested_int("metrics.reconstruction_n_g", [](ExperimentConfig& c) -> int& { return c.train.reconstruction_n_g; }),
      nested_int("metrics.reconstruction_trials", [](ExperimentConfig& c) -> int& { return c.train.reconstruction_trials; }),
      int_entry("metrics.checkpoint_every", &ExperimentConfig::checkpoint_every),
      int_entry("chip.rows", &ExperimentConfig::chip_rows),
      int_entry("chip.cols", &ExperimentConfig::chip_cols),
      real_entry("chip.chain_coupling", &ExperimentConfig::chain_coupling),
      {"chip.faulty", [](const ExperimentConfig& c) { return c.faulty; },
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v.empty() || v.find_first_of(" \t") != std::string::npos)
           throw ConfigError(k, k + " must be 'default', 'none' or a path without spaces");
         c.faulty = v;
       }},
      nested_real("annealer.t_eff", [](ExperimentConfig& c) -> double& { return c.emulator.t_eff; }),
      nested_real("annealer.sweeps_per_us", [](ExperimentConfig& c) -> double& { return c.emulator.sweeps_per_us; }),
      nested_real("annealer.s_target", [](ExperimentConfig& c) -> double& { return c.emulator.s_target; }),
      nested_real("annealer.field_noise_sd", [](ExperimentConfig& c) -> double& { return c.emulator.field_noise_sd; }),
      nested_real("annealer.coupling_noise_sd", [](ExperimentConfig& c) -> double& { return c.emulator.coupling_noise_sd; }),
      {"annealer.chain_moves", [](const ExperimentConfig& c) { return std::string(c.emulator.chain_moves ? "true" : "false"); },
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.emulator.chain_moves = parse_bool(k, v); }},
      {"annealer.chain_policy",
       [](const ExperimentConfig& c) {
         return std::string(c.emulator.chain_policy == ChainPolicy::discard ? "discard" : "majority_vote");
       },
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "majority_vote") c.emulator.chain_policy = ChainPolicy::majority_vote;
         else if (v == "discard") c.emulator.chain_policy = ChainPolicy::discard;
         else throw ConfigError(k, k + " must be majority_vote or discard");
       }},
      real_entry("annealer.anneal_us", &ExperimentConfig::anneal_us),
      real_entry("annealer.reverse_down_us", &ExperimentConfig::reverse_down_us),
      real_entry("annealer.reverse_pause_us", &ExperimentConfig::reverse_pause_us),
      real_entry("annealer.reverse_up_us", &ExperimentConfig::reverse_up_us),
      real_entry("annealer.s_pause", &ExperimentConfig::s_pause),
  };
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : entries())
    if (key == e.name) return e;
  throw ConfigError(key, "unknown config key '" + key + "'");
}

const char* const kClassical = R"(# Classical CD training, BAS-4, 16+16.
[train]
method = classical
epochs = 1000
eta = 0.15
n_g = 200
seed = 1
)";

const char* const kForward = R"(# Forward-annealing negative phase on the emulated chip.
[train]
method = forward
epochs = 1000
eta = 0.15
alpha = 0.32
cycles = 150
seed = 1
[chip]
chain_coupling = -1
faulty = default
[annealer]
t_eff = 0.32
)";

const char* const kReverse = R"(# Reverse-annealing negative phase started from the data.
[train]
method = reverse
epochs = 500
eta = 0.15
alpha = 0.32
cycles = 150
seed = 1
[chip]
chain_coupling = -1
faulty = default
[annealer]
t_eff = 0.32
reverse_down_us = 1
reverse_pause_us = 18
reverse_up_us = 1
s_pause = 0.2
)";

const char* const kSparse = R"(# 80-connection native layout, forward annealing.
[model]
sparse = true
[train]
method = forward
epochs = 1000
eta = 0.15
alpha = 0.32
cycles = 150
seed = 1
[annealer]
t_eff = 0.32
)";

}  // namespace

std::vector<std::string> preset_names() {
  return {"paper_classical", "paper_forward", "paper_reverse", "paper_sparse"};
}

bool is_preset(const std::string& name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ExperimentConfig preset(const std::string& name) {
  const char* text = nullptr;
  if (name == "paper_classical") text = kClassical;
  else if (name == "paper_forward") text = kForward;
  else if (name == "paper_reverse") text = kReverse;
  else if (name == "paper_sparse") text = kSparse;
  else throw ConfigError("preset", "unknown preset '" + name + "'");
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(t, "malformed section header on line " + std::to_string(line_no));
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(t, "line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = section.empty() ? trim(t.substr(0, eq)) : section + "." + trim(t.substr(0, eq));
    find_entry(key).set(base, key, trim(t.substr(eq + 1)));
  }
  return base;
}

void apply_setting(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  find_entry(key).set(cfg, key, trim(assignment.substr(eq + 1)));
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const Entry& e : entries()) {
    if (!out.empty()) out += ' ';
    out += e.name;
    out += '=';
    out += e.get(cfg);
  }
  return out;
}

std::string header_line(const ExperimentConfig& cfg) { return "# config: " + serialize_config(cfg); }

std::optional<ExperimentConfig> parse_header_line(const std::string& line) {
  const std::string tag = "# config:";
  if (line.rfind(tag, 0) != 0) return std::nullopt;
  ExperimentConfig cfg;
  std::istringstream words(line.substr(tag.size()));
  for (std::string w; words >> w;) apply_setting(cfg, w);
  return cfg;
}

ExperimentConfig load_config(const std::string& source) {
  if (is_preset(source)) return preset(source);
  std::ifstream in(source);
  if (!in) throw ConfigError("config", "cannot open config '" + source + "'");
  std::string first;
  std::getline(in, first);
  if (auto cfg = parse_header_line(trim(first))) return *cfg;
  in.clear();
  in.seekg(0);
  return parse_config(in);
}

void validate(const ExperimentConfig& cfg) {
  auto check = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, std::string(key) + ": " + what);
  };
  check(cfg.bas_m >= 2 && cfg.bas_m <= 16, "data.m", "must lie in [2, 16]");
  check(cfg.n_hidden >= 1, "model.n_hidden", "must be positive");
  check(!cfg.sparse || (cfg.bas_m == 4 && cfg.n_hidden == 16), "model.sparse", "needs a 16+16 model");
  const TrainConfig& t = cfg.train;
  check(t.epochs >= 0, "train.epochs", "must be non-negative");
  check(t.eta > 0.0, "train.eta", "must be positive");
  check(t.alpha > 0.0, "train.alpha", "must be positive");
  check(t.n_g >= 1, "train.n_g", "must be at least 1");
  check(t.cycles >= 1, "train.cycles", "must be at least 1");
  check(t.init.sigma > 0.0, "init.sigma", "must be positive");
  check(t.init.lo < t.init.hi, "init.lo", "truncation interval is empty");
  check(t.ll_every >= 1, "metrics.ll_every", "must be positive");
  check(t.reconstruction_every >= 1, "metrics.reconstruction_every", "must be positive");
  check(t.reconstruction_n_g >= 1, "metrics.reconstruction_n_g", "must be positive");
  check(t.reconstruction_trials >= 1, "metrics.reconstruction_trials", "must be positive");
  check(cfg.checkpoint_every >= 0, "metrics.checkpoint_every", "must be non-negative");
  check(cfg.chip_rows >= 1 && cfg.chip_cols >= 1, "chip.rows", "grid must be non-empty");
  check(cfg.chain_coupling <= 0.0, "chip.chain_coupling", "must be <= 0");
  const EmulatorConfig& e = cfg.emulator;
  check(e.t_eff > 0.0, "annealer.t_eff", "must be positive");
  check(e.sweeps_per_us >= 1.0, "annealer.sweeps_per_us", "must be at least 1");
  check(e.s_target > 0.0 && e.s_target < 1.0, "annealer.s_target", "must lie in (0, 1)");
  check(e.field_noise_sd >= 0.0, "annealer.field_noise_sd", "must be non-negative");
  check(e.coupling_noise_sd >= 0.0, "annealer.coupling_noise_sd", "must be non-negative");
  check(cfg.anneal_us > 0.0, "annealer.anneal_us", "must be positive");
  check(cfg.reverse_down_us > 0.0, "annealer.reverse_down_us", "must be positive");
  check(cfg.reverse_pause_us > 0.0, "annealer.reverse_pause_us", "must be positive");
  check(cfg.reverse_up_us > 0.0, "annealer.reverse_up_us", "must be positive");
  check(cfg.s_pause > 0.0 && cfg.s_pause < 1.0, "annealer.s_pause", "must lie in (0, 1)");
}

TrainConfig resolved_train_config(const ExperimentConfig& cfg) {
  TrainConfig t = cfg.train;
  t.n_hidden = cfg.n_hidden;
  t.clamped = clamp_mask(cfg.bas_m, OuterBorder{});
  return t;
}

HardwareGraph build_graph(const ExperimentConfig& cfg) {
  HardwareGraph g = HardwareGraph::chimera(cfg.chip_rows, cfg.chip_cols);
  std::vector<int> faulty;
  if (cfg.faulty == "default") {
    faulty = default_faulty_qubits();
  } else if (cfg.faulty != "none") {
    std::ifstream in(cfg.faulty);
    if (!in) throw ConfigError("chip.faulty", "cannot open faulty-qubit file '" + cfg.faulty + "'");
    faulty = read_faulty_fixture(in);
  }
  // The shipped fault list belongs to the full-size chip; drop ids a smaller
  // grid does not have.
  std::erase_if(faulty, [&](int q) { return q >= g.num_qubits(); });
  g.mark_faulty(faulty);
  return g;
}

QuantumBackend build_backend(const ExperimentConfig& cfg) {
  HardwareGraph g = build_graph(cfg);
  const int n_v = cfg.bas_m * cfg.bas_m;
  Embedding e = cfg.sparse ? embed_native(g, cfg.chain_coupling)
                           : embed_rbm(g, n_v, cfg.n_hidden, cfg.chain_coupling);
  return {std::move(g), std::move(e), cfg.emulator, make_forward_schedule(cfg.anneal_us),
          make_reverse_schedule(cfg.reverse_down_us, cfg.reverse_pause_us, cfg.reverse_up_us, cfg.s_pause)};
}

std::optional<ConnectivityMask> build_mask(const ExperimentConfig& cfg) {
  if (!cfg.sparse) return std::nullopt;
  return chimera_native_mask();
}

}  // namespace anneal_rbm
