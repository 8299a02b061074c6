#include "geneft/autoencoder.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "geneft/common.hpp"
#include "network.hpp"

namespace geneft {

const char* to_string(CombineMode mode) {
  switch (mode) {
    case CombineMode::Concat:
      return "concat";
    case CombineMode::Difference:
      return "difference";
    case CombineMode::SquaredDifference:
      return "squared_difference";
  }
  return "?";
}

CombineMode parse_combine_mode(const std::string& text) {
  if (text == "concat" || text == "1") return CombineMode::Concat;
  if (text == "difference" || text == "2") return CombineMode::Difference;
  if (text == "squared_difference" || text == "3") return CombineMode::SquaredDifference;
  throw std::invalid_argument("unknown combine mode '" + text + "' (expected concat, difference, squared_difference)");
}

void ModelConfig::validate() const {
  if (n < 1) throw std::invalid_argument("model: n must be positive");
  if (embed_dim < 1) throw std::invalid_argument("model: embed_dim must be positive");
  if (depth < 0) throw std::invalid_argument("model: depth must be non-negative");
  if (width < 1) throw std::invalid_argument("model: width must be positive");
}

template <class S>
std::size_t ModelParamsT<S>::parameter_count() const {
  std::size_t total = static_cast<std::size_t>(embeddings.size());
  for (const auto& l : layers) total += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return total;
}

template <class S>
ModelParamsT<S> ModelParamsT<S>::zeros_like() const {
  ModelParamsT out;
  out.mode = mode;
  out.embeddings = Matrix::Zero(embeddings.rows(), embeddings.cols());
  for (const auto& l : layers) {
    out.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()),
                          Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(l.bias.size())});
  }
  return out;
}

template struct ModelParamsT<float>;
template struct ModelParamsT<double>;

ModelParams init_model(const ModelConfig& config, double init_scale, std::uint64_t seed) {
  config.validate();
  if (init_scale < 0.0) throw std::invalid_argument("init_model: init_scale must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](auto& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = init_scale * normal(rng);
  };
  ModelParams p;
  p.mode = config.mode;
  p.embeddings.resize(config.embed_dim, config.n);
  fill(p.embeddings);
  int in = config.input_dim();
  for (int l = 0; l <= config.depth; ++l) {
    const int out = l == config.depth ? 1 : config.width;
    DenseLayerT<double> layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    fill(layer.weight);
    fill(layer.bias);
    p.layers.push_back(std::move(layer));
    in = out;
  }
  return p;
}

PairBatch make_batch(const RelationMatrix& truth, const std::vector<PairIndex>& pairs) {
  PairBatch b;
  const auto n = static_cast<PairIndex>(truth.n());
  b.left.reserve(pairs.size());
  b.right.reserve(pairs.size());
  b.labels.reserve(pairs.size());
  for (PairIndex p : pairs) {
    const int i = static_cast<int>(p / n), j = static_cast<int>(p % n);
    b.left.push_back(i);
    b.right.push_back(j);
    b.labels.push_back(truth(i, j) ? 1.0 : 0.0);
  }
  return b;
}

PairBatch all_pairs(const RelationMatrix& truth) {
  std::vector<PairIndex> every(truth.size());
  for (std::size_t k = 0; k < every.size(); ++k) every[k] = static_cast<PairIndex>(k);
  return make_batch(truth, every);
}

template <class S>
Eigen::Matrix<S, Eigen::Dynamic, 1> decoder_input(const ModelParamsT<S>& p, int i, int j) {
  if (i < 0 || j < 0 || i >= p.n() || j >= p.n()) throw std::out_of_range("decoder_input: node index out of range");
  const auto ei = p.embeddings.col(i);
  const auto ej = p.embeddings.col(j);
  switch (p.mode) {
    case CombineMode::Concat: {
      Eigen::Matrix<S, Eigen::Dynamic, 1> x(2 * p.embed_dim());
      x << ei, ej;
      return x;
    }
    case CombineMode::Difference:
      return ei - ej;
    case CombineMode::SquaredDifference:
      return (ei - ej).array().square().matrix();
  }
  throw std::logic_error("decoder_input: bad mode");
}

template <class S>
S forward(const ModelParamsT<S>& p, int i, int j) {
  Eigen::Matrix<S, Eigen::Dynamic, 1> x = decoder_input(p, i, j);
  const std::size_t hidden = p.layers.size() - 1;
  for (std::size_t l = 0; l < hidden; ++l) {
    x = (p.layers[l].weight * x + p.layers[l].bias).array().tanh().matrix();
  }
  const S z = (p.layers.back().weight * x)(0) + p.layers.back().bias(0);
  return S(1) / (S(1) + std::exp(-z));
}

template <class S>
LossAndGradients<S> loss_and_gradients(const ModelParamsT<S>& params, const PairBatch& batch,
                                       double weight_decay_dec) {
  detail::BatchEvaluator<S> eval;
  eval.bind(batch);
  eval.forward(params);
  LossAndGradients<S> out{eval.loss(params, weight_decay_dec), params.zeros_like()};
  eval.backward(params, weight_decay_dec, out.gradients);
  return out;
}

template <class S>
double accuracy(const ModelParamsT<S>& params, const PairBatch& batch) {
  detail::BatchEvaluator<S> eval;
  eval.bind(batch);
  eval.forward(params);
  return eval.accuracy();
}

template Eigen::Matrix<float, Eigen::Dynamic, 1> decoder_input(const ModelParamsT<float>&, int, int);
template Eigen::Matrix<double, Eigen::Dynamic, 1> decoder_input(const ModelParamsT<double>&, int, int);
template float forward(const ModelParamsT<float>&, int, int);
template double forward(const ModelParamsT<double>&, int, int);
template LossAndGradients<float> loss_and_gradients(const ModelParamsT<float>&, const PairBatch&, double);
template LossAndGradients<double> loss_and_gradients(const ModelParamsT<double>&, const PairBatch&, double);
template double accuracy(const ModelParamsT<float>&, const PairBatch&);
template double accuracy(const ModelParamsT<double>&, const PairBatch&);

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr const char* kCheckpointFormat = "geneft-checkpoint";
constexpr int kCheckpointVersion = 1;

template <class M>
void dump_values(std::ostream& out, const M& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) out << format_double(m.data()[k]) << '\n';
}

template <class M>
void read_values(std::istream& in, M& m) {
  std::string line;
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated tensor data");
    double v = 0;
    const std::string t = trim(line);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) throw std::runtime_error("checkpoint: bad value '" + t + "'");
    m.data()[k] = v;
  }
}
}  // namespace

void save_checkpoint(std::ostream& out, const ModelParams& params) {
  nlohmann::json header;
  header["format"] = kCheckpointFormat;
  header["version"] = kCheckpointVersion;
  header["mode"] = to_string(params.mode);
  header["n"] = params.n();
  header["embed_dim"] = params.embed_dim();
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& l : params.layers) shapes.push_back({l.weight.rows(), l.weight.cols()});
  header["layers"] = shapes;
  out << header.dump() << '\n';
  dump_values(out, params.embeddings);
  for (const auto& l : params.layers) {
    dump_values(out, l.weight);
    dump_values(out, l.bias);
  }
}

ModelParams load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing header");
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != kCheckpointFormat) throw std::runtime_error("checkpoint: unknown format");
  if (header.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(header.value("version", 0)));
  }
  ModelParams p;
  p.mode = parse_combine_mode(header.at("mode").get<std::string>());
  p.embeddings.resize(header.at("embed_dim").get<int>(), header.at("n").get<int>());
  read_values(in, p.embeddings);
  for (const auto& shape : header.at("layers")) {
    DenseLayerT<double> layer{Eigen::MatrixXd(shape.at(0).get<int>(), shape.at(1).get<int>()),
                              Eigen::VectorXd(shape.at(0).get<int>())};
    read_values(in, layer.weight);
    read_values(in, layer.bias);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

}  // namespace geneft
