#include <cmath>
#include <ostream>
#include <stdexcept>

#include "geneft/autoencoder.hpp"
#include "geneft/common.hpp"
#include "network.hpp"

namespace geneft {

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "gd"; }

const char* to_string(Precision precision) { return precision == Precision::Float32 ? "float32" : "float64"; }

const char* to_string(PhaseLabel phase) {
  switch (phase) {
    case PhaseLabel::Generalization:
      return "Generalization";
    case PhaseLabel::Grokking:
      return "Grokking";
    case PhaseLabel::Memorization:
      return "Memorization";
    case PhaseLabel::Confusion:
      return "Confusion";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (eta_enc < 0 || eta_dec < 0) throw std::invalid_argument("train: learning rates must be non-negative");
  if (weight_decay_dec < 0) throw std::invalid_argument("train: weight decay must be non-negative");
  if (max_steps < 1) throw std::invalid_argument("train: max_steps must be >= 1");
  if (eval_interval < 1) throw std::invalid_argument("train: eval_interval must be >= 1");
  if (!(train_fraction >= 0 && train_fraction <= 1)) throw std::invalid_argument("train: train_fraction must lie in [0, 1]");
  if (!(init_scale > 0)) throw std::invalid_argument("train: init_scale must be positive");
  if (optimizer == OptimizerKind::Adam && !(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 && adam.eps > 0)) {
    throw std::invalid_argument("train: invalid Adam settings");
  }
}

ThresholdSteps threshold_steps(const std::vector<EvalRecord>& records) {
  ThresholdSteps t;
  for (const auto& r : records) {
    if (r.step > kPhaseStepLimit) break;
    if (!t.train && r.train_accuracy > kAccuracyThreshold) t.train = r.step;
    if (!t.test && r.test_accuracy > kAccuracyThreshold) t.test = r.step;
  }
  return t;
}

PhaseLabel classify_phase(const std::vector<EvalRecord>& records) {
  const ThresholdSteps t = threshold_steps(records);
  if (!t.train) return PhaseLabel::Confusion;
  if (!t.test) return PhaseLabel::Memorization;
  return (*t.test - *t.train) < kGrokkingGap ? PhaseLabel::Generalization : PhaseLabel::Grokking;
}

namespace {

template <class S>
struct AdamState {
  ModelParamsT<S> m, v;
};

template <class T>
void adam_update(T& param, const T& grad, T& m, T& v, double lr, const AdamSettings& a, double bc1, double bc2) {
  using S = typename T::Scalar;
  m = S(a.beta1) * m + S(1 - a.beta1) * grad;
  v = S(a.beta2) * v + S(1 - a.beta2) * grad.cwiseProduct(grad);
  const S step = static_cast<S>(lr / bc1);
  const S root_bc2 = static_cast<S>(std::sqrt(bc2));
  param.array() -= step * m.array() / (v.array().sqrt() / root_bc2 + S(a.eps));
}

template <class S>
TrainResult run(const ModelConfig& model_config, const TrainConfig& cfg, const RelationMatrix& matrix,
                ModelParams* final_params) {
  model_config.validate();
  cfg.validate();
  if (model_config.n != matrix.n()) throw std::invalid_argument("train: model n does not match relation n");

  const auto train_pairs = sample_training_set(matrix, cfg.train_fraction, derive_seed(cfg.seed, {0}));
  std::vector<PairIndex> test_pairs;
  {
    std::vector<bool> in_train(matrix.size(), false);
    for (PairIndex p : train_pairs) in_train[p] = true;
    for (std::size_t k = 0; k < matrix.size(); ++k)
      if (!in_train[k]) test_pairs.push_back(static_cast<PairIndex>(k));
  }
  const PairBatch train_batch = make_batch(matrix, train_pairs);
  const PairBatch test_batch = make_batch(matrix, test_pairs);

  ModelParamsT<S> params = init_model(model_config, cfg.init_scale, derive_seed(cfg.seed, {1})).template cast<S>();
  ModelParamsT<S> grad = params.zeros_like();
  AdamState<S> adam{params.zeros_like(), params.zeros_like()};

  detail::BatchEvaluator<S> train_eval, test_eval;
  train_eval.bind(train_batch);
  test_eval.bind(test_batch);

  TrainResult result;
  result.empty_test_set = test_batch.size() == 0;

  for (int step = 0;; ++step) {
    train_eval.forward(params);
    const S loss = train_eval.loss(params, cfg.weight_decay_dec);
    if (!std::isfinite(static_cast<double>(loss))) {
      result.diverged = true;
      result.diagnostic = "non-finite training loss at step " + std::to_string(step);
      break;
    }
    if (step % cfg.eval_interval == 0 || step == cfg.max_steps) {
      double test_acc = 1.0;
      if (!result.empty_test_set) {
        test_eval.forward(params);
        test_acc = test_eval.accuracy();
      }
      const double train_acc = train_batch.size() ? train_eval.accuracy() : 1.0;
      result.records.push_back({step, train_acc, test_acc, static_cast<double>(loss)});
      if (cfg.early_stop && train_acc > kAccuracyThreshold && test_acc > kAccuracyThreshold) break;
    }
    if (step == cfg.max_steps) break;
    if (train_batch.size() == 0) continue;

    train_eval.backward(params, cfg.weight_decay_dec, grad);
    if (cfg.optimizer == OptimizerKind::FullBatchGD) {
      params.embeddings -= static_cast<S>(cfg.eta_enc) * grad.embeddings;
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        params.layers[l].weight -= static_cast<S>(cfg.eta_dec) * grad.layers[l].weight;
        params.layers[l].bias -= static_cast<S>(cfg.eta_dec) * grad.layers[l].bias;
      }
    } else {
      const double t = step + 1.0;
      const double bc1 = 1.0 - std::pow(cfg.adam.beta1, t);
      const double bc2 = 1.0 - std::pow(cfg.adam.beta2, t);
      adam_update(params.embeddings, grad.embeddings, adam.m.embeddings, adam.v.embeddings, cfg.eta_enc, cfg.adam, bc1,
                  bc2);
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        adam_update(params.layers[l].weight, grad.layers[l].weight, adam.m.layers[l].weight, adam.v.layers[l].weight,
                    cfg.eta_dec, cfg.adam, bc1, bc2);
        adam_update(params.layers[l].bias, grad.layers[l].bias, adam.m.layers[l].bias, adam.v.layers[l].bias,
                    cfg.eta_dec, cfg.adam, bc1, bc2);
      }
    }
  }

  result.phase = classify_phase(result);
  if (!result.diverged) result.final_full_accuracy = accuracy(params, all_pairs(matrix));
  if (final_params) *final_params = params.template cast<double>();
  return result;
}

}  // namespace

TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config, const RelationMatrix& matrix,
                  ModelParams* final_params) {
  if (train_config.precision == Precision::Float32) return run<float>(model_config, train_config, matrix, final_params);
  return run<double>(model_config, train_config, matrix, final_params);
}

TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config, const RelationMatrix& matrix) {
  return train(model_config, train_config, matrix, nullptr);
}

void write_trajectory_csv(std::ostream& out, const TrainResult& result) {
  CsvWriter csv(out);
  csv.header({"step", "train_acc", "test_acc", "train_loss"});
  for (const auto& r : result.records) {
    csv.field(r.step).field(r.train_accuracy).field(r.test_accuracy).field(r.train_loss);
    csv.end_row();
  }
}

}  // namespace geneft
