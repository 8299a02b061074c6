#include <cmath>
#include <ostream>
#include <stdexcept>

#include "geneft/autoencoder.hpp"
#include "geneft/common.hpp"
#include "geneft/inference.hpp"

namespace geneft {
namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double spread_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PhaseCell cell_from(const TrainResult& r, double eta_enc, double eta_dec, double wd, int repeat) {
  const ThresholdSteps t = threshold_steps(r.records);
  return {eta_enc, eta_dec, wd, repeat, classify_phase(r), t.train, t.test};
}

std::vector<PhaseCell> run_grid(const ModelConfig& model_config, const RelationSpec& spec,
                                const std::vector<TrainConfig>& configs, std::size_t workers, const CellCache* cache,
                                const std::vector<int>& repeats_of) {
  const RelationMatrix matrix = build_relation(spec);
  std::vector<PhaseCell> cells(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t k) {
    if (cache && cache->lookup) {
      if (auto hit = cache->lookup(k)) {
        cells[k] = *hit;
        return;
      }
    }
    const TrainConfig& c = configs[k];
    cells[k] = cell_from(train(model_config, c, matrix), c.eta_enc, c.eta_dec, c.weight_decay_dec, repeats_of[k]);
    if (cache && cache->store) cache->store(k, cells[k]);
  });
  return cells;
}

}  // namespace

FractionSweep sweep_training_fraction(const ModelConfig& model_config, const TrainConfig& train_config,
                                      const RelationSpec& spec, const std::vector<double>& fractions, int repeats,
                                      std::size_t workers) {
  if (repeats < 1) throw std::invalid_argument("sweep_training_fraction: repeats must be >= 1");
  for (double f : fractions)
    if (!(f >= 0 && f <= 1)) throw std::invalid_argument("sweep_training_fraction: fractions must lie in [0, 1]");
  const RelationMatrix matrix = build_relation(spec);
  const std::size_t r = static_cast<std::size_t>(repeats);
  std::vector<double> acc(fractions.size() * r);
  parallel_for(acc.size(), workers, [&](std::size_t k) {
    TrainConfig c = train_config;
    c.train_fraction = fractions[k / r];
    c.seed = derive_seed(train_config.seed, {k / r, k % r});
    acc[k] = train(model_config, c, matrix).final_full_accuracy;
  });
  FractionSweep sweep;
  const double n = spec.n;
  sweep.reference_scale = relation_bits(spec) / (n * n);
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    std::vector<double> v(acc.begin() + static_cast<std::ptrdiff_t>(f * r),
                          acc.begin() + static_cast<std::ptrdiff_t>((f + 1) * r));
    sweep.points.push_back({fractions[f], mean_of(v), spread_of(v), v});
  }
  return sweep;
}

void write_fraction_csv(std::ostream& out, const RelationSpec& spec, const ModelConfig& model_config,
                        const FractionSweep& sweep) {
  CsvWriter csv(out);
  csv.header({"relation", "mode", "depth", "width", "fraction", "mean_accuracy", "spread", "repeats",
              "reference_scale"});
  for (const auto& p : sweep.points) {
    csv.field(relation_tag(spec)).field(to_string(model_config.mode)).field(model_config.depth)
        .field(model_config.width).field(p.fraction).field(p.mean_accuracy).field(p.spread)
        .field(p.accuracies.size()).field(sweep.reference_scale);
    csv.end_row();
  }
}

std::vector<PhaseCell> phase_diagram_lr(const ModelConfig& model_config, const RelationSpec& spec,
                                        const std::vector<double>& enc_lrs, const std::vector<double>& dec_lrs,
                                        const TrainConfig& base, int repeats, std::size_t workers,
                                        const CellCache* cache) {
  if (repeats < 1) throw std::invalid_argument("phase_diagram_lr: repeats must be >= 1");
  for (double v : enc_lrs)
    if (!(v > 0)) throw std::invalid_argument("phase_diagram_lr: encoder learning rates must be positive");
  for (double v : dec_lrs)
    if (!(v > 0)) throw std::invalid_argument("phase_diagram_lr: decoder learning rates must be positive");
  std::vector<TrainConfig> configs;
  std::vector<int> rep;
  for (double dec : dec_lrs)
    for (double enc : enc_lrs)
      for (int r = 0; r < repeats; ++r) {
        TrainConfig c = base;
        c.eta_enc = enc;
        c.eta_dec = dec;
        c.seed = derive_seed(base.seed, {configs.size()});
        configs.push_back(c);
        rep.push_back(r);
      }
  return run_grid(model_config, spec, configs, workers, cache, rep);
}

std::vector<PhaseCell> phase_diagram_wd(const ModelConfig& model_config, const RelationSpec& spec,
                                        const std::vector<double>& weight_decays, const std::vector<double>& dec_lrs,
                                        const TrainConfig& base, int repeats, std::size_t workers,
                                        const CellCache* cache) {
  if (repeats < 1) throw std::invalid_argument("phase_diagram_wd: repeats must be >= 1");
  for (double v : weight_decays)
    if (!(v >= 0)) throw std::invalid_argument("phase_diagram_wd: weight decays must be non-negative");
  for (double v : dec_lrs)
    if (!(v > 0)) throw std::invalid_argument("phase_diagram_wd: decoder learning rates must be positive");
  std::vector<TrainConfig> configs;
  std::vector<int> rep;
  for (double dec : dec_lrs)
    for (double wd : weight_decays)
      for (int r = 0; r < repeats; ++r) {
        TrainConfig c = base;
        c.weight_decay_dec = wd;
        c.eta_dec = dec;
        c.seed = derive_seed(base.seed, {configs.size()});
        configs.push_back(c);
        rep.push_back(r);
      }
  return run_grid(model_config, spec, configs, workers, cache, rep);
}

void write_phase_grid_csv(std::ostream& out, const std::vector<PhaseCell>& cells) {
  CsvWriter csv(out);
  csv.header({"eta_enc", "eta_dec", "wd", "phase", "steps_to_train", "steps_to_test", "repeat"});
  for (const auto& c : cells) {
    csv.field(c.eta_enc).field(c.eta_dec).field(c.weight_decay).field(to_string(c.phase));
    csv.field(c.steps_to_train ? std::to_string(*c.steps_to_train) : std::string());
    csv.field(c.steps_to_test ? std::to_string(*c.steps_to_test) : std::string());
    csv.field(c.repeat);
    csv.end_row();
  }
}

std::vector<GoldilocksPoint> goldilocks_sweep(const RelationSpec& spec, const ModelConfig& base_model,
                                              const TrainConfig& base_train, const std::vector<int>& depths,
                                              int repeats, std::size_t workers) {
  if (repeats < 1) throw std::invalid_argument("goldilocks_sweep: repeats must be >= 1");
  for (int d : depths)
    if (d < 0) throw std::invalid_argument("goldilocks_sweep: depths must be non-negative");
  const RelationMatrix matrix = build_relation(spec);
  const std::size_t r = static_cast<std::size_t>(repeats);
  std::vector<TrainResult> runs(depths.size() * r);
  parallel_for(runs.size(), workers, [&](std::size_t k) {
    ModelConfig m = base_model;
    m.depth = depths[k / r];
    TrainConfig c = base_train;
    c.seed = derive_seed(base_train.seed, {k / r, k % r});
    runs[k] = train(m, c, matrix);
  });
  std::vector<GoldilocksPoint> points;
  for (std::size_t d = 0; d < depths.size(); ++d) {
    GoldilocksPoint p{depths[d], 0.0, 0.0, {}, {}};
    std::vector<double> train_acc;
    for (std::size_t k = d * r; k < (d + 1) * r; ++k) {
      const auto& rec = runs[k].records;
      p.test_accuracies.push_back(rec.empty() ? 0.0 : rec.back().test_accuracy);
      train_acc.push_back(rec.empty() ? 0.0 : rec.back().train_accuracy);
      p.phases.push_back(runs[k].phase);
    }
    p.mean_test_accuracy = mean_of(p.test_accuracies);
    p.mean_train_accuracy = mean_of(train_acc);
    points.push_back(std::move(p));
  }
  return points;
}

void write_goldilocks_csv(std::ostream& out, const std::vector<GoldilocksPoint>& points) {
  CsvWriter csv(out);
  csv.header({"depth", "mean_test_acc", "mean_train_acc", "repeats"});
  for (const auto& p : points) {
    csv.field(p.depth).field(p.mean_test_accuracy).field(p.mean_train_accuracy).field(p.test_accuracies.size());
    csv.end_row();
  }
}

}  // namespace geneft
