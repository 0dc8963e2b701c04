// anneal-rbm: dataset export, training, evaluation and sampling from the shell.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "anneal_rbm/annealer.hpp"
#include "anneal_rbm/bas.hpp"
#include "anneal_rbm/config.hpp"
#include "anneal_rbm/errors.hpp"
#include "anneal_rbm/ising.hpp"
#include "anneal_rbm/metrics.hpp"
#include "anneal_rbm/trainer.hpp"

namespace fs = std::filesystem;
using namespace anneal_rbm;

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitPlacement = 3;
constexpr int kExitFailure = 1;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

RbmParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  return read_rbm(in);
}

ExperimentConfig resolve(const std::string& source, const std::vector<std::string>& sets,
                         std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_config(source);
  for (const std::string& s : sets) apply_setting(cfg, s);
  if (seed) cfg.train.seed = *seed;
  validate(cfg);
  return cfg;
}

int cmd_bas(int m, const std::string& out_path) {
  const BasDataset data = generate_bas(m);
  if (out_path.empty()) {
    write_dataset(std::cout, data);
  } else {
    std::ofstream out = open_out(out_path);
    write_dataset(out, data);
  }
  return 0;
}

int cmd_train(const std::string& source, const std::vector<std::string>& sets,
              std::optional<std::uint64_t> seed, const std::string& out_dir, bool quiet) {
  const ExperimentConfig cfg = resolve(source, sets, seed);
  const TrainConfig tc = resolved_train_config(cfg);
  const std::vector<BitVector> data = generate_bas(cfg.bas_m).images;
  std::optional<QuantumBackend> backend;
  if (tc.method != Method::classical) backend = build_backend(cfg);
  const std::optional<ConnectivityMask> mask = build_mask(cfg);

  const fs::path dir(out_dir);
  fs::create_directories(dir / "checkpoints");
  const std::string header = header_line(cfg);
  auto on_epoch = [&](int epoch, const RbmParams& rbm) {
    const bool due = cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0;
    if (due || epoch == tc.epochs) {
      std::ostringstream name;
      name << "epoch_" << std::setw(5) << std::setfill('0') << epoch << ".rbm";
      std::ofstream out = open_out(dir / "checkpoints" / name.str());
      write_rbm(out, rbm);
    }
    if (!quiet && epoch % 50 == 0) std::cerr << "epoch " << epoch << '/' << tc.epochs << '\n';
  };
  const TrainResult result =
      train(tc, data, backend ? &*backend : nullptr, mask ? &*mask : nullptr, on_epoch);

  {
    std::ofstream out = open_out(dir / "history.csv");
    out << header << '\n';
    write_history_csv(out, result.history);
  }
  {
    std::ofstream out = open_out(dir / "bands.csv");
    out << header << '\n';
    write_band_csv(out, result.history);
  }
  {
    std::ofstream out = open_out(dir / "final.rbm");
    write_rbm(out, result.rbm);
  }
  if (!quiet) {
    const EpochRecord& last = result.history.records.back();
    std::cerr << "final epoch " << last.epoch << " LL_av " << last.ll.value_or(0.0) << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, int m, int n_g, int trials, std::uint64_t seed) {
  const RbmParams rbm = load_checkpoint(checkpoint);
  const std::vector<BitVector> data = generate_bas(m).images;
  const std::vector<int> clamped = clamp_mask(m, OuterBorder{});
  const double log_z = exact_log_partition(rbm);
  const DeltaProbability d = delta_probability(rbm, data, log_z);
  std::cout << std::setprecision(10);
  std::cout << "LL_av,delta_prob,bottom_half,reconstruction,reconstruction_exact,log_z\n";
  std::cout << log_likelihood_av(rbm, data, log_z) << ',' << d.total << ',' << d.bottom_half << ','
            << reconstruction_score(rbm, data, clamped, n_g, trials, seed) << ','
            << exact_reconstruction_score(rbm, data, clamped) << ',' << log_z << '\n';
  return 0;
}

int cmd_sample(const std::string& checkpoint, const std::string& source, const std::vector<std::string>& sets,
               const std::string& schedule, int cycles, std::optional<std::uint64_t> seed,
               const std::string& out_path) {
  const ExperimentConfig cfg = resolve(source, sets, seed);
  const RbmParams rbm = load_checkpoint(checkpoint);
  const QuantumBackend backend = build_backend(cfg);
  const PhysicalProblem physical =
      lower_problem(to_ising(rbm, cfg.train.alpha), backend.embedding, backend.graph);
  const std::uint64_t sample_seed = derive_seed(cfg.train.seed, {static_cast<std::uint64_t>(Stream::sampling)});
  SampleBatch batch;
  if (schedule == "forward") {
    batch = forward_sample(physical, backend.forward_schedule, cycles, backend.emulator, sample_seed);
  } else {
    // Reverse starts: dataset images in order, hidden units from one conditional draw.
    const std::vector<BitVector> data = generate_bas(cfg.bas_m).images;
    Rng rng = make_stream(cfg.train.seed, Stream::evaluation);
    std::vector<SpinConfig> starts;
    for (const BitVector& v : data) starts.push_back(to_spins({v, sample_layer(rbm, Layer::hidden, v, rng)}));
    batch = reverse_sample(physical, starts, backend.reverse_schedule, cycles, backend.emulator, sample_seed);
  }
  auto emit = [&](std::ostream& out) {
    out << header_line(cfg) << '\n';
    write_batch_csv(out, batch);
  };
  if (out_path.empty()) {
    emit(std::cout);
  } else {
    std::ofstream out = open_out(out_path);
    emit(out);
  }
  std::cerr << "samples " << batch.size() << " break_rate " << batch.break_rate() << " mean_start_distance "
            << batch.mean_start_distance() << '\n';
  return 0;
}

struct HistorySummary {
  std::string method;
  std::map<std::string, std::string> last;  // last non-empty value per column
  std::string last_epoch;
};

HistorySummary summarize(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open history " + path);
  HistorySummary s;
  std::string line;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto cfg = parse_header_line(line)) s.method = to_string(cfg->train.method);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (line.back() == ',') cells.emplace_back();
    if (columns.empty()) {
      columns = cells;
      continue;
    }
    for (std::size_t k = 0; k < cells.size() && k < columns.size(); ++k)
      if (!cells[k].empty()) s.last[columns[k]] = cells[k];
    if (!cells.empty()) s.last_epoch = cells[0];
  }
  return s;
}

int cmd_compare(const std::vector<std::string>& histories) {
  std::cout << "history,method,epoch,LL_av,reconstruction,delta_prob,break_rate,min_sample_energy\n";
  for (const std::string& path : histories) {
    HistorySummary s = summarize(path);
    std::cout << path << ',' << s.method << ',' << s.last_epoch;
    for (const char* col : {"LL_av", "reconstruction", "delta_prob", "break_rate", "min_sample_energy"})
      std::cout << ',' << s.last[col];
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bars-and-stripes RBM training with classical and emulated-annealer sampling"};
  app.require_subcommand(1);

  int bas_m = 4;
  std::string bas_out;
  auto* bas = app.add_subcommand("bas", "Print the bars-and-stripes dataset");
  bas->add_option("--m", bas_m, "Image side length")->check(CLI::Range(2, 16));
  bas->add_option("--out", bas_out, "Output file (default stdout)");

  std::string config = "paper_classical";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "run";
  bool quiet = false;
  auto* tr = app.add_subcommand("train", "Train an RBM and write history, bands and checkpoints");
  tr->add_option("--config", config, "Preset name, config file, or a CSV carrying a config header");
  tr->add_option("--set", sets, "Override section.key=value (repeatable)");
  tr->add_option("--seed", seed, "Master seed");
  tr->add_option("--out", out_dir, "Output directory");
  tr->add_flag("--quiet", quiet, "No progress on stderr");

  std::string checkpoint;
  int eval_m = 4, eval_n_g = 500, eval_trials = 100;
  std::uint64_t eval_seed = 1;
  auto* ev = app.add_subcommand("eval", "Exact and Monte-Carlo metrics of a checkpoint");
  ev->add_option("--checkpoint", checkpoint, "RBM checkpoint")->required();
  ev->add_option("--m", eval_m, "Image side length");
  ev->add_option("--n-g", eval_n_g, "Gibbs rounds for reconstruction");
  ev->add_option("--trials", eval_trials, "Reconstruction trials per image");
  ev->add_option("--seed", eval_seed, "Seed for reconstruction");

  std::string sample_config = "paper_forward", schedule = "forward", sample_out;
  std::vector<std::string> sample_sets;
  std::optional<std::uint64_t> sample_seed;
  int cycles = 150;
  auto* sa = app.add_subcommand("sample", "Emit an emulated-annealer sample batch for a checkpoint");
  sa->add_option("--checkpoint", checkpoint, "RBM checkpoint")->required();
  sa->add_option("--config", sample_config, "Preset or config file for chip and annealer settings");
  sa->add_option("--set", sample_sets, "Override section.key=value (repeatable)");
  sa->add_option("--schedule", schedule, "forward or reverse")->check(CLI::IsMember({"forward", "reverse"}));
  sa->add_option("--cycles", cycles, "Annealing cycles")->check(CLI::PositiveNumber);
  sa->add_option("--seed", sample_seed, "Master seed");
  sa->add_option("--out", sample_out, "Output CSV (default stdout)");

  std::vector<std::string> histories;
  auto* cmp = app.add_subcommand("compare", "Summary table of training histories");
  cmp->add_option("histories", histories, "history.csv files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*bas) return cmd_bas(bas_m, bas_out);
    if (*tr) return cmd_train(config, sets, seed, out_dir, quiet);
    if (*ev) return cmd_eval(checkpoint, eval_m, eval_n_g, eval_trials, eval_seed);
    if (*sa) return cmd_sample(checkpoint, sample_config, sample_sets, schedule, cycles, sample_seed, sample_out);
    if (*cmp) return cmd_compare(histories);
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.key() << "]: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const PlacementError& e) {
    std::cerr << "embedding error: " << e.what() << '\n';
    return kExitPlacement;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
