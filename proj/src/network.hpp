#pragma once

// Batched forward/backward kernel shared by loss_and_gradients and the
// training loop. Buffers are kept between calls so a training run allocates
// once.

#include <algorithm>
#include <cmath>

#include "geneft/autoencoder.hpp"

namespace geneft::detail {

template <class S>
class BatchEvaluator {
 public:
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

  void bind(const PairBatch& batch) {
    batch_ = &batch;
    labels_.resize(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t k = 0; k < batch.size(); ++k) labels_(static_cast<Eigen::Index>(k)) = static_cast<S>(batch.labels[k]);
  }

  // Fills activations_ (input plus one per hidden layer) and probabilities_.
  void forward(const ModelParamsT<S>& p) {
    const PairBatch& b = *batch_;
    const auto count = static_cast<Eigen::Index>(b.size());
    const int d = p.embed_dim();
    activations_.resize(p.layers.size());
    Matrix& x0 = activations_[0];
    x0.resize(p.mode == CombineMode::Concat ? 2 * d : d, count);
    for (Eigen::Index k = 0; k < count; ++k) {
      const auto ei = p.embeddings.col(b.left[k]);
      const auto ej = p.embeddings.col(b.right[k]);
      switch (p.mode) {
        case CombineMode::Concat:
          x0.col(k).head(d) = ei;
          x0.col(k).tail(d) = ej;
          break;
        case CombineMode::Difference:
          x0.col(k) = ei - ej;
          break;
        case CombineMode::SquaredDifference:
          x0.col(k) = (ei - ej).array().square().matrix();
          break;
      }
    }
    const std::size_t hidden = p.layers.size() - 1;
    for (std::size_t l = 0; l < hidden; ++l) {
      Matrix& out = activations_[l + 1];
      out.noalias() = p.layers[l].weight * activations_[l];
      out.colwise() += p.layers[l].bias;
      out = out.array().tanh().matrix();
    }
    const auto& head = p.layers.back();
    logits_.noalias() = head.weight * activations_[hidden];
    logits_.array() += head.bias(0);
    probabilities_ = (S(1) / (S(1) + (-logits_.array()).exp())).matrix();
  }

  // Requires forward() on the same parameters.
  // Accumulated in double: 1 - 1e-12 is not representable in float.
  S loss(const ModelParamsT<S>& p, double weight_decay) const {
    constexpr double lo = 1e-12, hi = 1.0 - 1e-12;
    double total = 0;
    for (Eigen::Index k = 0; k < probabilities_.size(); ++k) {
      const double q = std::clamp(static_cast<double>(probabilities_(k)), lo, hi);
      const double y = static_cast<double>(labels_(k));
      total -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
    }
    double value = probabilities_.size() > 0 ? total / static_cast<double>(probabilities_.size()) : 0.0;
    if (weight_decay != 0.0) {
      double squares = 0;
      for (const auto& l : p.layers) squares += static_cast<double>(l.weight.squaredNorm());
      value += weight_decay / 2.0 * squares;
    }
    return static_cast<S>(value);
  }

  // Requires forward() on the same parameters. Overwrites grad.
  void backward(const ModelParamsT<S>& p, double weight_decay, ModelParamsT<S>& grad) {
    const PairBatch& b = *batch_;
    const auto count = static_cast<Eigen::Index>(b.size());
    const std::size_t hidden = p.layers.size() - 1;
    const S inv = count > 0 ? S(1) / static_cast<S>(count) : S(0);
    const S wd = static_cast<S>(weight_decay);

    delta_ = ((probabilities_ - labels_) * inv).eval();
    auto& head = grad.layers.back();
    head.weight.noalias() = delta_ * activations_[hidden].transpose();
    head.bias(0) = delta_.sum();
    if (wd != S(0)) head.weight += wd * p.layers.back().weight;
    upstream_.noalias() = p.layers.back().weight.transpose() * delta_;

    for (std::size_t l = hidden; l-- > 0;) {
      // upstream_ holds dL/d(activations_[l+1]); convert to pre-activation.
      upstream_.array() *= (S(1) - activations_[l + 1].array().square());
      auto& g = grad.layers[l];
      g.weight.noalias() = upstream_ * activations_[l].transpose();
      g.bias = upstream_.rowwise().sum();
      if (wd != S(0)) g.weight += wd * p.layers[l].weight;
      scratch_.noalias() = p.layers[l].weight.transpose() * upstream_;
      upstream_.swap(scratch_);
    }

    // upstream_ is now dL/d(decoder input).
    grad.embeddings.setZero();
    const int d = p.embed_dim();
    for (Eigen::Index k = 0; k < count; ++k) {
      const int i = b.left[k], j = b.right[k];
      const auto g = upstream_.col(k);
      switch (p.mode) {
        case CombineMode::Concat:
          grad.embeddings.col(i) += g.head(d);
          grad.embeddings.col(j) += g.tail(d);
          break;
        case CombineMode::Difference:
          grad.embeddings.col(i) += g;
          grad.embeddings.col(j) -= g;
          break;
        case CombineMode::SquaredDifference: {
          const auto diff = (p.embeddings.col(i) - p.embeddings.col(j)).eval();
          const auto contrib = (S(2) * diff.array() * g.array()).matrix().eval();
          grad.embeddings.col(i) += contrib;
          grad.embeddings.col(j) -= contrib;
          break;
        }
      }
    }
  }

  double accuracy() const {
    const auto count = probabilities_.size();
    if (count == 0) return 1.0;
    Eigen::Index correct = 0;
    for (Eigen::Index k = 0; k < count; ++k) {
      const S q = probabilities_(k);
      const bool predicted = q > S(0.5);
      const bool tie = q == S(0.5);
      if (!tie && predicted == (labels_(k) > S(0.5))) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(count);
  }

  const RowVector& probabilities() const { return probabilities_; }

 private:
  const PairBatch* batch_ = nullptr;
  RowVector labels_;
  std::vector<Matrix> activations_;
  RowVector logits_;
  RowVector probabilities_;
  RowVector delta_;
  Matrix upstream_;
  Matrix scratch_;
};

}  // namespace geneft::detail
