#pragma once

// Embedding + MLP autoencoder for relation learning, with hand-written
// reverse-mode gradients. The encoder is a lookup table E (one column per
// node); the decoder combines two embeddings, applies tanh hidden layers and
// a sigmoid output giving P(R(i,j) = 1).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geneft/relations.hpp"

namespace geneft {

enum class CombineMode {
  Concat,             // [E_i, E_j]
  Difference,         // E_i - E_j
  SquaredDifference,  // (E_i - E_j)^2 element-wise
};

const char* to_string(CombineMode mode);
CombineMode parse_combine_mode(const std::string& text);

struct ModelConfig {
  int n = 30;
  int embed_dim = 2;
  int depth = 3;  // hidden layers
  int width = 50;
  CombineMode mode = CombineMode::Concat;

  int input_dim() const { return mode == CombineMode::Concat ? 2 * embed_dim : embed_dim; }
  void validate() const;
};

template <class Scalar>
struct DenseLayerT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weight;  // out x in
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
};

/// Model parameters. Also used to hold gradients and optimizer moments.
template <class Scalar>
struct ModelParamsT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  CombineMode mode = CombineMode::Concat;
  Matrix embeddings;  // embed_dim x n, column i is node i
  std::vector<DenseLayerT<Scalar>> layers;

  int n() const { return static_cast<int>(embeddings.cols()); }
  int embed_dim() const { return static_cast<int>(embeddings.rows()); }
  int depth() const { return static_cast<int>(layers.size()) - 1; }
  std::size_t parameter_count() const;
  ModelParamsT zeros_like() const;

  template <class Other>
  ModelParamsT<Other> cast() const {
    ModelParamsT<Other> out;
    out.mode = mode;
    out.embeddings = embeddings.template cast<Other>();
    for (const auto& l : layers) out.layers.push_back({l.weight.template cast<Other>(), l.bias.template cast<Other>()});
    return out;
  }
};

using ModelParams = ModelParamsT<double>;

/// Every parameter drawn i.i.d. from N(0, init_scale^2).
ModelParams init_model(const ModelConfig& config, double init_scale, std::uint64_t seed);

/// Training pairs with 0/1 labels.
struct PairBatch {
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
};

PairBatch make_batch(const RelationMatrix& truth, const std::vector<PairIndex>& pairs);
PairBatch all_pairs(const RelationMatrix& truth);

/// P(R(i,j) = 1) for one pair.
template <class Scalar>
Scalar forward(const ModelParamsT<Scalar>& params, int i, int j);

/// Decoder input for one pair according to params.mode.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> decoder_input(const ModelParamsT<Scalar>& params, int i, int j);

template <class Scalar>
struct LossAndGradients {
  Scalar loss;
  ModelParamsT<Scalar> gradients;
};

/// Mean binary cross-entropy (probabilities clamped to [1e-12, 1 - 1e-12])
/// plus (weight_decay_dec / 2) * sum of squared decoder weights. Biases and
/// embeddings are not decayed.
template <class Scalar>
LossAndGradients<Scalar> loss_and_gradients(const ModelParamsT<Scalar>& params, const PairBatch& batch,
                                            double weight_decay_dec);

/// Fraction of pairs with (p > 0.5) == label. Ties count as wrong.
template <class Scalar>
double accuracy(const ModelParamsT<Scalar>& params, const PairBatch& batch);

// ---------------------------------------------------------------------------
// Training

enum class OptimizerKind { FullBatchGD, Adam };
enum class Precision { Float32, Float64 };

const char* to_string(OptimizerKind kind);
const char* to_string(Precision precision);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double eta_enc = 1e-3;
  double eta_dec = 1e-3;
  double weight_decay_dec = 0.0;
  int max_steps = 100000;
  int eval_interval = 100;
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::FullBatchGD;
  AdamSettings adam;
  double init_scale = 1.0;
  bool early_stop = true;  // stop once train and test accuracy both exceed 0.9
  Precision precision = Precision::Float32;  // gradient checks use the double kernels directly

  void validate() const;
};

enum class PhaseLabel { Generalization, Grokking, Memorization, Confusion };

const char* to_string(PhaseLabel phase);

inline constexpr double kAccuracyThreshold = 0.9;
inline constexpr int kPhaseStepLimit = 100000;
inline constexpr int kGrokkingGap = 1000;

struct EvalRecord {
  int step;
  double train_accuracy;
  double test_accuracy;
  double train_loss;
};

struct TrainResult {
  std::vector<EvalRecord> records;
  PhaseLabel phase = PhaseLabel::Confusion;
  double final_full_accuracy = 0.0;  // over all n^2 pairs at the last step
  bool empty_test_set = false;       // test accuracy reported as 1.0
  bool diverged = false;             // non-finite loss; training aborted
  std::string diagnostic;
};

/// Steps at which the accuracy first exceeds 0.9 within the phase step limit.
struct ThresholdSteps {
  std::optional<int> train;
  std::optional<int> test;
};

ThresholdSteps threshold_steps(const std::vector<EvalRecord>& records);
PhaseLabel classify_phase(const std::vector<EvalRecord>& records);
inline PhaseLabel classify_phase(const TrainResult& result) {
  return result.diverged ? PhaseLabel::Confusion : classify_phase(result.records);
}

/// Samples the split from train_config.seed, initializes the model and runs
/// full-batch optimization with separate encoder/decoder learning rates.
TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config, const RelationMatrix& matrix);

/// Same as train(), also returning the final parameters (cast to double).
TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config, const RelationMatrix& matrix,
                  ModelParams* final_params);

/// Columns: step, train_acc, test_acc, train_loss.
void write_trajectory_csv(std::ostream& out, const TrainResult& result);

/// Checkpoint format: one JSON header line describing shapes, then every
/// tensor's values in declaration order (embeddings column-major, then each
/// layer's weight column-major followed by its bias), one value per line.
void save_checkpoint(std::ostream& out, const ModelParams& params);
ModelParams load_checkpoint(std::istream& in);

// ---------------------------------------------------------------------------
// Sweeps

struct FractionPoint {
  double fraction;
  double mean_accuracy;  // whole-dataset accuracy, averaged over repeats
  double spread;         // sample standard deviation over repeats
  std::vector<double> accuracies;
};

struct FractionSweep {
  std::vector<FractionPoint> points;
  double reference_scale;  // b / n^2
};

FractionSweep sweep_training_fraction(const ModelConfig& model_config, const TrainConfig& train_config,
                                      const RelationSpec& spec, const std::vector<double>& fractions, int repeats,
                                      std::size_t workers);

/// Columns: relation, mode, depth, width, fraction, mean_accuracy, spread, repeats, reference_scale.
void write_fraction_csv(std::ostream& out, const RelationSpec& spec, const ModelConfig& model_config,
                        const FractionSweep& sweep);

struct PhaseCell {
  double eta_enc;
  double eta_dec;
  double weight_decay;
  int repeat;
  PhaseLabel phase;
  std::optional<int> steps_to_train;
  std::optional<int> steps_to_test;
};

/// Optional per-cell cache so an interrupted sweep can resume.
struct CellCache {
  std::function<std::optional<PhaseCell>(std::size_t)> lookup;
  std::function<void(std::size_t, const PhaseCell&)> store;
};

/// Cells are ordered (dec index, enc index, repeat); each cell's seed is
/// derived from (base seed, cell index).
std::vector<PhaseCell> phase_diagram_lr(const ModelConfig& model_config, const RelationSpec& spec,
                                        const std::vector<double>& enc_lrs, const std::vector<double>& dec_lrs,
                                        const TrainConfig& base, int repeats, std::size_t workers,
                                        const CellCache* cache = nullptr);

/// Encoder learning rate is taken from `base` (1e-5 in the reference setup).
std::vector<PhaseCell> phase_diagram_wd(const ModelConfig& model_config, const RelationSpec& spec,
                                        const std::vector<double>& weight_decays, const std::vector<double>& dec_lrs,
                                        const TrainConfig& base, int repeats, std::size_t workers,
                                        const CellCache* cache = nullptr);

/// Columns: eta_enc, eta_dec, wd, phase, steps_to_train, steps_to_test, repeat.
void write_phase_grid_csv(std::ostream& out, const std::vector<PhaseCell>& cells);

struct GoldilocksPoint {
  int depth;
  double mean_test_accuracy;
  double mean_train_accuracy;
  std::vector<double> test_accuracies;
  std::vector<PhaseLabel> phases;
};

std::vector<GoldilocksPoint> goldilocks_sweep(const RelationSpec& spec, const ModelConfig& base_model,
                                              const TrainConfig& base_train, const std::vector<int>& depths,
                                              int repeats, std::size_t workers);

/// Columns: depth, mean_test_acc, mean_train_acc, repeats.
void write_goldilocks_csv(std::ostream& out, const std::vector<GoldilocksPoint>& points);

}  // namespace geneft
