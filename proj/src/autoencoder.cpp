#include <string>

#include "mdn/error.hpp"
#include "mdn/neural.hpp"
#include "mdn/rng.hpp"
#include "training_util.hpp"

namespace mdn {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<std::size_t> widths_of(const AeShape& s) {
  std::vector<std::size_t> w{s.input_dim};
  w.insert(w.end(), s.hidden.begin(), s.hidden.end());
  w.push_back(s.input_dim);
  return w;
}

// Activations of every layer; front() is the input.
std::vector<MatrixXd> forward_all(const AeParams& p, const MatrixXd& x) {
  if (x.rows() != static_cast<Index>(p.shape.input_dim)) {
    throw Error(ErrorKind::ShapeMismatch, "descriptor length " + std::to_string(x.rows()));
  }
  std::vector<MatrixXd> acts{x};
  acts.reserve(p.layers.size() + 1);
  for (const auto& layer : p.layers) acts.push_back(sigmoid(layer.forward(acts.back())));
  if (!acts.back().allFinite()) throw Error(ErrorKind::NonFiniteActivation, "AE output is non-finite");
  return acts;
}

}  // namespace

AeParams zero_ae(const AeShape& shape) {
  AeParams p;
  p.shape = shape;
  const auto w = widths_of(shape);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    p.layers.push_back({MatrixXd::Zero(static_cast<Index>(w[i + 1]), static_cast<Index>(w[i])),
                        VectorXd::Zero(static_cast<Index>(w[i + 1]))});
  }
  return p;
}

AeParams init_ae(const AeShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  AeParams p = zero_ae(shape);
  for (auto& layer : p.layers) layer = init_dense(layer.inputs(), layer.outputs(), rng);
  return p;
}

void validate(const AeParams& params) {
  const AeParams expected = zero_ae(params.shape);
  if (params.layers.size() != expected.layers.size()) {
    throw Error(ErrorKind::ShapeMismatch, "AE layer count disagrees with the configuration");
  }
  for (std::size_t i = 0; i < expected.layers.size(); ++i) {
    const auto& got = params.layers[i];
    const auto& want = expected.layers[i];
    if (got.weight.rows() != want.weight.rows() || got.weight.cols() != want.weight.cols() ||
        got.bias.size() != want.bias.size() || !got.weight.allFinite() || !got.bias.allFinite()) {
      throw Error(ErrorKind::ShapeMismatch, "AE layer " + std::to_string(i) + " is inconsistent");
    }
  }
}

double ae_loss(const AeParams& params, const MatrixXd& input, const MatrixXd& target) {
  if (input.cols() == 0) throw Error(ErrorKind::EmptyInput, "empty batch");
  const auto acts = forward_all(params, input);
  return (acts.back() - target).squaredNorm() / static_cast<double>(target.size());
}

AeGradients ae_gradients(const AeParams& params, const MatrixXd& input, const MatrixXd& target) {
  if (input.cols() == 0) throw Error(ErrorKind::EmptyInput, "empty batch");
  if (target.rows() != input.rows() || target.cols() != input.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "target shape");
  }
  const auto acts = forward_all(params, input);
  AeGradients out;
  out.loss = (acts.back() - target).squaredNorm() / static_cast<double>(target.size());
  out.grads.resize(params.layers.size());

  MatrixXd upstream = 2.0 * (acts.back() - target) / static_cast<double>(target.size());
  for (std::size_t i = params.layers.size(); i-- > 0;) {
    const MatrixXd& a = acts[i + 1];
    const MatrixXd delta = upstream.cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
    out.grads[i].weight.noalias() = delta * acts[i].transpose();
    out.grads[i].bias = delta.rowwise().sum();
    if (i > 0) upstream = params.layers[i].weight.transpose() * delta;
  }
  for (const auto& g : out.grads) {
    if (!g.weight.allFinite() || !g.bias.allFinite()) {
      throw Error(ErrorKind::NonFiniteGradient, "AE gradient has a non-finite entry");
    }
  }
  return out;
}

AeTrainResult train_ae(const TrainingSet& data, const AeShape& shape, const TrainConfig& cfg) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyTrainingSet, "no training pairs");
  if (data.noisy.rows() != static_cast<Index>(shape.input_dim)) {
    throw Error(ErrorKind::ShapeMismatch, "training descriptors have the wrong length");
  }
  if (cfg.batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");

  Rng order_rng(derive_seed(cfg.seed, 1));
  AeTrainResult result;
  result.params = init_ae(shape, derive_seed(cfg.seed, 0));
  const detail::Split split = detail::split_indices(data.size(), cfg.holdout_fraction, order_rng);
  const MatrixXd eval_in = detail::gather(data.noisy, split.eval);
  const MatrixXd eval_target = detail::gather(data.clean, split.eval);
  std::vector<std::size_t> order = split.train;

  auto record = [&](int epoch, double lr, double train_loss) {
    const double mse = ae_loss(result.params, eval_in, eval_target);
    result.history.push_back({epoch, lr, epoch == 0 ? mse : train_loss, mse, mse, mse});
  };
  record(0, cfg.learning_rate, 0.0);

  Adam adam(result.params.layers, cfg.adam);
  double lr = cfg.learning_rate;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> part(order.data() + start,
                                              std::min(cfg.batch_size, order.size() - start));
      const AeGradients g =
          ae_gradients(result.params, detail::gather(data.noisy, part), detail::gather(data.clean, part));
      adam.step(result.params.layers, g.grads, lr);
      loss_sum += g.loss;
      ++batches;
    }
    record(epoch, lr, loss_sum / static_cast<double>(batches));
    lr *= cfg.lr_decay;
  }
  return result;
}

MatrixXd infer_ae(const AeParams& params, const MatrixXd& descriptors) {
  return forward_all(params, descriptors).back();
}

VectorXd infer_ae(const AeParams& params, const VectorXd& descriptor) {
  return infer_ae(params, MatrixXd(descriptor)).col(0);
}

}  // namespace mdn
