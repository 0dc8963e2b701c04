#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anneal_rbm/trainer.hpp"

namespace anneal_rbm {

/// Resolved experiment settings. Every field maps to one "section.key".
struct ExperimentConfig {
  int bas_m = 4;
  int n_hidden = 16;
  bool sparse = false;
  TrainConfig train;
  int checkpoint_every = 100;

  int chip_rows = 16;
  int chip_cols = 16;
  double chain_coupling = -1.0;
  std::string faulty = "default";  // "default", "none", or a path to an id list

  EmulatorConfig emulator;
  double anneal_us = 2.0;
  double reverse_down_us = 1.0;
  double reverse_pause_us = 18.0;
  double reverse_up_us = 1.0;
  double s_pause = 0.2;
};

/// Names accepted by preset().
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
ExperimentConfig preset(const std::string& name);

/// INI-style text: "[section]" headers, "key = value" lines, '#' or ';'
/// comments. Keys not set keep the values already in `base`. Unknown
/// sections or keys and unparsable values throw ConfigError naming the key.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});

/// Applies one "section.key=value" assignment.
void apply_setting(ExperimentConfig& cfg, const std::string& assignment);

/// Every key in a fixed order, "section.key=value" joined by single spaces.
/// Doubles use the shortest text that reads back to the same value.
std::string serialize_config(const ExperimentConfig& cfg);

/// "# config: <serialize_config>"; parse_header_line inverts it.
std::string header_line(const ExperimentConfig& cfg);
std::optional<ExperimentConfig> parse_header_line(const std::string& line);

/// Preset name, INI file, or any output file whose first line is a config
/// header.
ExperimentConfig load_config(const std::string& source);

/// Checks cross-field constraints; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// cfg.train with n_hidden set and the outer border of the m x m image as
/// the reconstruction clamp.
TrainConfig resolved_train_config(const ExperimentConfig& cfg);

/// Hardware graph with the configured faults.
HardwareGraph build_graph(const ExperimentConfig& cfg);
/// Backend for the annealing methods; throws PlacementError when nothing fits.
QuantumBackend build_backend(const ExperimentConfig& cfg);
/// 80-connection mask when sparse, else nullopt.
std::optional<ConnectivityMask> build_mask(const ExperimentConfig& cfg);

}  // namespace anneal_rbm
