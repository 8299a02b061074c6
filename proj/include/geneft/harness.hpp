#pragma once

// Experiment orchestration: config files, runs with manifests, and
// plot-ready figure data.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "geneft/autoencoder.hpp"
#include "geneft/relations.hpp"

namespace geneft {

inline constexpr const char* kToolVersion = "0.1.0";

/// Invalid or unreadable configuration. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

enum class ExperimentKind {
  StaticsCurve,
  StaticsAnalytic,
  ReponPhaseSpace,
  ReponProbability,
  TrainOnce,
  FractionSweep,
  LrPhaseDiagram,
  WdPhaseDiagram,
  Goldilocks,
};

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& text);

/// Relation names: modK (e.g. mod3), greater, bipartite, file:<path>.
RelationSpec parse_relation(const std::string& name, int n, int bipartite_part);

struct StaticsSettings {
  std::vector<double> fractions;  // empty: 0, 0.05, ..., 1
  int trials = 3;
  std::size_t sequences = 1000;
  double alpha = 0.9;
};

struct ReponSettings {
  double eta_A = 1.0;
  double eta_x = 1.0;
  double a2_min = -2.0, a2_max = 2.0;
  double c_min = -2.0, c_max = 2.0;
  std::size_t grid = 81;
  std::vector<double> ratios;   // eta_A / eta_x; empty: 1e-2 .. 1e2
  std::vector<double> sigma_a;  // paired with sigma_c
  std::vector<double> sigma_c;
  std::size_t samples = 100000;
};

struct SweepSettings {
  std::vector<double> fractions;
  int repeats = 3;
  std::vector<double> enc_lrs;
  std::vector<double> dec_lrs;
  std::vector<double> weight_decays;
  std::vector<int> depths;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::TrainOnce;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: one per hardware thread
  std::string out = "results";

  std::vector<std::string> relations{"mod3"};
  int n = 30;
  int bipartite_part = 15;

  ModelConfig model;
  TrainConfig train;
  StaticsSettings statics;
  ReponSettings repon;
  SweepSettings sweep;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  std::vector<RelationSpec> relation_specs() const;
};

/// Sectioned key = value text. Lines starting with '#' or ';' are comments.
/// Lists are comma separated; numeric lists also accept linspace(a, b, k)
/// and logspace(a, b, k) (endpoints, not exponents).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form. parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
  std::string relation;  // empty when not relation-specific
};

struct RunManifest {
  ExperimentKind experiment;
  std::string config_text;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601
  std::vector<ManifestEntry> outputs;
};

std::string sha256_file(const std::filesystem::path& path);

/// Executes the experiment, writes its CSV outputs and manifest.json into
/// config.out, and returns the manifest. Phase diagrams keep per-cell
/// results under a hidden directory while running so an interrupted run
/// resumes; it is removed on completion.
RunManifest run(const ExperimentConfig& config);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

/// Figure ids accepted by emit_figure_data.
const std::vector<std::string>& figure_ids();

/// Turns the outputs listed in a manifest (located in `run_dir`) into one
/// tidy CSV plus one SVG per figure panel in `out_dir`. Returns the written
/// paths. Throws std::invalid_argument for an unknown id or a manifest from
/// a different experiment.
std::vector<std::filesystem::path> emit_figure_data(const std::filesystem::path& run_dir, const std::string& figure_id,
                                                    const std::filesystem::path& out_dir);

}  // namespace geneft
