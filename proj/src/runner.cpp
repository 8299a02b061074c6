#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "geneft/common.hpp"
#include "geneft/harness.hpp"
#include "geneft/inference.hpp"
#include "geneft/repon.hpp"

namespace fs = std::filesystem;

namespace geneft {
namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kCellDir = ".cells";

std::string hex(const unsigned char* data, unsigned size) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned k = 0; k < size; ++k) {
    out += digits[data[k] >> 4];
    out += digits[data[k] & 15];
  }
  return out;
}

std::string sha256_text(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned size = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  return hex(digest, size);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

// Tags for file names; repeated tags get an index suffix.
std::vector<std::string> unique_tags(const std::vector<RelationSpec>& specs) {
  std::map<std::string, int> count;
  for (const auto& s : specs) ++count[relation_tag(s)];
  std::vector<std::string> tags;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const std::string t = relation_tag(specs[k]);
    tags.push_back(count[t] > 1 ? t + "_" + std::to_string(k) : t);
  }
  return tags;
}

std::vector<double> default_fractions() {
  std::vector<double> f;
  for (int k = 0; k <= 20; ++k) f.push_back(k / 20.0);
  return f;
}

PhaseLabel parse_phase(const std::string& text) {
  for (PhaseLabel p : {PhaseLabel::Generalization, PhaseLabel::Grokking, PhaseLabel::Memorization,
                       PhaseLabel::Confusion}) {
    if (text == to_string(p)) return p;
  }
  throw std::runtime_error("unknown phase label '" + text + "'");
}

// One-file-per-cell store for resuming interrupted phase diagrams.
class CellStore {
 public:
  explicit CellStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  CellCache cache() const {
    CellCache c;
    c.lookup = [this](std::size_t k) { return load(k); };
    c.store = [this](std::size_t k, const PhaseCell& cell) { save(k, cell); };
    return c;
  }

 private:
  fs::path file(std::size_t k) const { return dir_ / ("cell_" + std::to_string(k) + ".csv"); }

  std::optional<PhaseCell> load(std::size_t k) const {
    std::ifstream in(file(k));
    std::string line;
    if (!in || !std::getline(in, line)) return std::nullopt;
    const auto f = split_trimmed(line, ',');
    if (f.size() != 7) return std::nullopt;
    try {
      PhaseCell c{std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stoi(f[6]), parse_phase(f[3]), {}, {}};
      if (!f[4].empty()) c.steps_to_train = std::stoi(f[4]);
      if (!f[5].empty()) c.steps_to_test = std::stoi(f[5]);
      return c;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  void save(std::size_t k, const PhaseCell& c) const {
    const fs::path target = file(k);
    const fs::path tmp = target.string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << format_double(c.eta_enc) << ',' << format_double(c.eta_dec) << ',' << format_double(c.weight_decay)
          << ',' << to_string(c.phase) << ',' << (c.steps_to_train ? std::to_string(*c.steps_to_train) : "") << ','
          << (c.steps_to_test ? std::to_string(*c.steps_to_test) : "") << ',' << c.repeat << '\n';
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
  }

  fs::path dir_;
};

// Outputs are buffered and written together once every computation has
// finished, so an interrupted run leaves no partial files behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  template <class Fn>
  void write(const std::string& name, const std::string& relation, Fn&& fn) {
    std::ostringstream out;
    fn(out);
    pending_.push_back({name, out.str()});
    entries_.push_back({name, "", 0, relation});
  }

  std::vector<ManifestEntry> commit() {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      const fs::path path = dir_ / pending_[k].first;
      std::ofstream out(path, std::ios::binary);
      out << pending_[k].second;
      out.flush();
      if (!out) throw std::runtime_error("write failed for " + path.string());
      entries_[k].sha256 = sha256_text(pending_[k].second);
      entries_[k].bytes = pending_[k].second.size();
    }
    return entries_;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> pending_;
  std::vector<ManifestEntry> entries_;
};

void write_analytic_csv(std::ostream& out, const RelationSpec& spec, const std::vector<double>& fractions) {
  const double n2 = static_cast<double>(spec.n) * spec.n;
  const double b = relation_bits(spec);
  const double p_star = guess_probability(spec);
  CsvWriter csv(out);
  csv.header({"relation", "n", "fraction", "m", "b", "p_star", "f", "f_ub"});
  for (double f : fractions) {
    const double m = f * n2;
    const StaticsEstimate e = statics_estimate(m, b, p_star);
    csv.field(relation_tag(spec)).field(spec.n).field(f).field(m).field(b).field(p_star);
    csv.field(e.inferable_fraction).field(e.accuracy_upper_bound);
    csv.end_row();
  }
}

bool is_custom(const RelationSpec& spec) { return std::holds_alternative<CustomRelation>(spec.kind); }

// Cache key: everything that affects results, not where they go.
std::string cell_key(const ExperimentConfig& config, const std::string& tag) {
  ExperimentConfig c = config;
  c.out.clear();
  c.workers = 0;
  return sha256_text(serialize_config(c) + "\n" + tag).substr(0, 16);
}

void check_output_dir(const fs::path& dir) {
  std::set<std::string> known{kManifestName, kCellDir};
  const fs::path manifest = dir / kManifestName;
  if (fs::exists(manifest)) {
    for (const auto& e : read_manifest(manifest).outputs) known.insert(e.path);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!known.count(name)) {
      throw std::runtime_error("output directory " + dir.string() + " contains '" + name +
                               "', which no previous run produced; use an empty directory");
    }
  }
  if (fs::exists(manifest)) {
    for (const auto& e : read_manifest(manifest).outputs) fs::remove(dir / e.path);
    fs::remove(manifest);
  }
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: init failed");
  }
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buffer, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned size = 0;
  EVP_DigestFinal_ex(ctx, digest, &size);
  EVP_MD_CTX_free(ctx);
  return hex(digest, size);
}

RunManifest run(const ExperimentConfig& input) {
  input.validate();
  ExperimentConfig config = input;
  config.model.n = config.n;
  config.train.seed = config.seed;
  const std::size_t workers = config.workers ? config.workers : default_workers();
  const auto specs = config.relation_specs();
  const auto tags = unique_tags(specs);

  const fs::path dir(config.out);
  fs::create_directories(dir);
  check_output_dir(dir);
  OutputSet outputs(dir);

  auto relation_seed = [&](std::size_t r) { return derive_seed(config.seed, {r}); };

  switch (config.experiment) {
    case ExperimentKind::StaticsCurve: {
      const auto fractions = config.statics.fractions.empty() ? default_fractions() : config.statics.fractions;
      for (std::size_t r = 0; r < specs.size(); ++r) {
        const std::uint64_t seed = relation_seed(r);
        const auto curve =
            oracle_curve(specs[r], fractions, config.statics.trials, config.statics.sequences, seed, workers);
        outputs.write("statics_" + tags[r] + ".csv", tags[r],
                      [&](std::ostream& out) { write_oracle_csv(out, specs[r], curve, seed); });
        if (!is_custom(specs[r])) {
          outputs.write("analytic_" + tags[r] + ".csv", tags[r],
                        [&](std::ostream& out) { write_analytic_csv(out, specs[r], fractions); });
        }
      }
      break;
    }
    case ExperimentKind::StaticsAnalytic: {
      const auto fractions = config.statics.fractions.empty() ? default_fractions() : config.statics.fractions;
      for (std::size_t r = 0; r < specs.size(); ++r) {
        if (is_custom(specs[r])) continue;
        outputs.write("analytic_" + tags[r] + ".csv", tags[r],
                      [&](std::ostream& out) { write_analytic_csv(out, specs[r], fractions); });
      }
      outputs.write("critical_fraction.csv", "", [&](std::ostream& out) {
        CsvWriter csv(out);
        csv.header({"relation", "n", "b", "alpha", "p_c"});
        for (std::size_t r = 0; r < specs.size(); ++r) {
          const double b = relation_bits(specs[r]);
          const double n2 = static_cast<double>(specs[r].n) * specs[r].n;
          csv.field(tags[r]).field(specs[r].n).field(b).field(config.statics.alpha);
          csv.field(critical_fraction(config.statics.alpha, b, n2));
          csv.end_row();
        }
      });
      break;
    }
    case ExperimentKind::ReponPhaseSpace: {
      const auto& p = config.repon;
      const auto cells = phase_space_map({p.a2_min, p.a2_max}, {p.c_min, p.c_max}, p.grid, p.eta_A, p.eta_x);
      outputs.write("phase_space.csv", "", [&](std::ostream& out) { write_phase_space_csv(out, cells); });
      break;
    }
    case ExperimentKind::ReponProbability: {
      const auto& p = config.repon;
      std::vector<InitDistribution> inits;
      for (std::size_t k = 0; k < p.sigma_a.size(); ++k) inits.push_back({p.sigma_a[k], p.sigma_c[k]});
      if (inits.empty()) inits.push_back({1.0, 1.0});
      const auto ratios = p.ratios.empty() ? log_grid(1e-2, 1e2, 21) : p.ratios;
      const auto points = probability_sweep(inits, ratios, p.samples, config.seed, workers);
      outputs.write("probability.csv", "", [&](std::ostream& out) { write_probability_csv(out, points); });
      break;
    }
    case ExperimentKind::TrainOnce: {
      std::vector<TrainResult> results;
      for (std::size_t r = 0; r < specs.size(); ++r) {
        TrainConfig t = config.train;
        t.seed = relation_seed(r);
        ModelParams params;
        results.push_back(train(config.model, t, build_relation(specs[r]), &params));
        outputs.write("trajectory_" + tags[r] + ".csv", tags[r],
                      [&](std::ostream& out) { write_trajectory_csv(out, results.back()); });
        outputs.write("checkpoint_" + tags[r] + ".txt", tags[r],
                      [&](std::ostream& out) { save_checkpoint(out, params); });
      }
      outputs.write("train_summary.csv", "", [&](std::ostream& out) {
        CsvWriter csv(out);
        csv.header({"relation", "phase", "steps_to_train", "steps_to_test", "final_full_accuracy", "diverged",
                    "empty_test_set"});
        for (std::size_t r = 0; r < specs.size(); ++r) {
          const auto& res = results[r];
          const ThresholdSteps t = threshold_steps(res.records);
          csv.field(tags[r]).field(to_string(res.phase));
          csv.field(t.train ? std::to_string(*t.train) : std::string());
          csv.field(t.test ? std::to_string(*t.test) : std::string());
          csv.field(res.final_full_accuracy).field(res.diverged ? 1 : 0).field(res.empty_test_set ? 1 : 0);
          csv.end_row();
        }
      });
      break;
    }
    case ExperimentKind::FractionSweep: {
      for (std::size_t r = 0; r < specs.size(); ++r) {
        TrainConfig t = config.train;
        t.seed = relation_seed(r);
        const auto sweep =
            sweep_training_fraction(config.model, t, specs[r], config.sweep.fractions, config.sweep.repeats, workers);
        outputs.write("fraction_" + tags[r] + ".csv", tags[r],
                      [&](std::ostream& out) { write_fraction_csv(out, specs[r], config.model, sweep); });
      }
      break;
    }
    case ExperimentKind::LrPhaseDiagram:
    case ExperimentKind::WdPhaseDiagram: {
      const bool lr = config.experiment == ExperimentKind::LrPhaseDiagram;
      for (std::size_t r = 0; r < specs.size(); ++r) {
        TrainConfig t = config.train;
        t.seed = relation_seed(r);
        const CellStore store(dir / kCellDir / (tags[r] + "_" + cell_key(config, tags[r])));
        const CellCache cache = store.cache();
        const auto cells =
            lr ? phase_diagram_lr(config.model, specs[r], config.sweep.enc_lrs, config.sweep.dec_lrs, t,
                                  config.sweep.repeats, workers, &cache)
               : phase_diagram_wd(config.model, specs[r], config.sweep.weight_decays, config.sweep.dec_lrs, t,
                                  config.sweep.repeats, workers, &cache);
        outputs.write((lr ? "phase_lr_" : "phase_wd_") + tags[r] + ".csv", tags[r],
                      [&](std::ostream& out) { write_phase_grid_csv(out, cells); });
      }
      break;
    }
    case ExperimentKind::Goldilocks: {
      for (std::size_t r = 0; r < specs.size(); ++r) {
        TrainConfig t = config.train;
        t.seed = relation_seed(r);
        const auto points =
            goldilocks_sweep(specs[r], config.model, t, config.sweep.depths, config.sweep.repeats, workers);
        outputs.write("goldilocks_" + tags[r] + ".csv", tags[r],
                      [&](std::ostream& out) { write_goldilocks_csv(out, points); });
      }
      break;
    }
  }

  RunManifest manifest{config.experiment, serialize_config(input), kToolVersion, utc_timestamp(), outputs.commit()};
  write_manifest(dir / kManifestName, manifest);
  fs::remove_all(dir / kCellDir);
  return manifest;
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["format"] = "geneft-manifest";
  j["version"] = 1;
  j["experiment"] = to_string(m.experiment);
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  j["config"] = m.config_text;
  j["outputs"] = nlohmann::json::array();
  for (const auto& e : m.outputs) {
    j["outputs"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}, {"relation", e.relation}});
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "geneft-manifest") throw std::runtime_error(path.string() + " is not a run manifest");
  RunManifest m{parse_experiment(j.at("experiment").get<std::string>()), j.value("config", ""),
                j.value("tool_version", ""), j.value("timestamp", ""), {}};
  for (const auto& e : j.at("outputs")) {
    m.outputs.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>(),
                         e.at("bytes").get<std::uintmax_t>(), e.value("relation", "")});
  }
  return m;
}

}  // namespace geneft
