#include <cmath>
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

Index idx(std::size_t v) { return static_cast<Index>(v); }

[[noreturn]] void shape_fail(const std::string& what) { throw Error(ErrorKind::ShapeMismatch, what); }

MatrixXd one_hot_columns(std::span<const std::int32_t> labels, std::size_t k) {
  MatrixXd y = MatrixXd::Zero(idx(k), idx(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      shape_fail("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(k) + ")");
    }
    y(labels[i], idx(i)) = 1.0;
  }
  return y;
}

MatrixXd stack(const MatrixXd& top, const MatrixXd& bottom) {
  MatrixXd out(top.rows() + bottom.rows(), bottom.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

void apply_mask(MatrixXd& h, const MatrixXd& mask) {
  if (mask.size() == 0) return;
  if (mask.rows() != h.rows() || mask.cols() != h.cols()) shape_fail("dropout mask shape");
  h.array() *= mask.array();
}

// softplus(a) - t * a, the cross-entropy of sigmoid(a) against t.
double bce_from_logits(const MatrixXd& logits, const MatrixXd& target) {
  return logits
      .binaryExpr(target,
                  [](double a, double t) {
                    return std::max(a, 0.0) - t * a + std::log1p(std::exp(-std::abs(a)));
                  })
      .sum();
}

struct Forward {
  MatrixXd x_in, a1, h1, a2, h2, mu, log_var, z, z_in, a3, h3, a4, h4, logits;
};

Forward run_encoder(const CvaeParams& p, const MatrixXd& x, const MatrixXd& y, const DropoutMasks* masks) {
  const auto& s = p.shape;
  if (x.rows() != idx(s.input_dim)) shape_fail("descriptor length " + std::to_string(x.rows()));
  if (y.rows() != idx(s.label_count) || y.cols() != x.cols()) shape_fail("label block shape");
  Forward f;
  f.x_in = stack(y, x);
  f.a1 = p.layers[CvaeParams::kEnc1].forward(f.x_in);
  f.h1 = activate(f.a1, s.activation);
  if (masks) apply_mask(f.h1, masks->enc1);
  f.a2 = p.layers[CvaeParams::kEnc2].forward(f.h1);
  f.h2 = activate(f.a2, s.activation);
  if (masks) apply_mask(f.h2, masks->enc2);
  const MatrixXd out = p.layers[CvaeParams::kEncOut].forward(f.h2);
  f.mu = out.topRows(idx(s.latent_dim));
  f.log_var = out.bottomRows(idx(s.latent_dim));
  if (!f.mu.allFinite() || !f.log_var.allFinite()) {
    throw Error(ErrorKind::NonFiniteActivation, "encoder produced a non-finite value");
  }
  return f;
}

void run_decoder(const CvaeParams& p, const MatrixXd& y, const DropoutMasks* masks, Forward& f) {
  const auto& s = p.shape;
  if (f.z.rows() != idx(s.latent_dim)) shape_fail("latent length " + std::to_string(f.z.rows()));
  if (y.rows() != idx(s.label_count) || y.cols() != f.z.cols()) shape_fail("label block shape");
  f.z_in = stack(y, f.z);
  f.a3 = p.layers[CvaeParams::kDec1].forward(f.z_in);
  f.h3 = activate(f.a3, s.activation);
  if (masks) apply_mask(f.h3, masks->dec1);
  f.a4 = p.layers[CvaeParams::kDec2].forward(f.h3);
  f.h4 = activate(f.a4, s.activation);
  if (masks) apply_mask(f.h4, masks->dec2);
  f.logits = p.layers[CvaeParams::kDecOut].forward(f.h4);
  if (!f.logits.allFinite()) throw Error(ErrorKind::NonFiniteActivation, "decoder produced a non-finite value");
}

Forward forward_batch(const CvaeParams& p, const CvaeBatch& b) {
  if (b.input.cols() == 0) throw Error(ErrorKind::EmptyInput, "empty batch");
  if (b.target.rows() != b.input.rows() || b.target.cols() != b.input.cols()) shape_fail("target shape");
  if (b.noise.rows() != idx(p.shape.latent_dim) || b.noise.cols() != b.input.cols()) shape_fail("noise shape");
  const MatrixXd y = one_hot_columns(b.labels, p.shape.label_count);
  Forward f = run_encoder(p, b.input, y, &b.masks);
  f.z = f.mu + ((0.5 * f.log_var).array().exp() * b.noise.array()).matrix();
  run_decoder(p, y, &b.masks, f);
  return f;
}

CvaeLoss loss_of(const Forward& f, const MatrixXd& target) {
  const double batch = static_cast<double>(target.cols());
  CvaeLoss loss;
  loss.recon = bce_from_logits(f.logits, target) / batch;
  loss.kl = -0.5 * (1.0 + f.log_var.array() - f.mu.array().square() - f.log_var.array().exp()).sum() / batch;
  loss.total = loss.recon + loss.kl;
  return loss;
}

void accumulate(DenseLayer& grad, const MatrixXd& delta, const MatrixXd& input) {
  grad.weight.noalias() = delta * input.transpose();
  grad.bias = delta.rowwise().sum();
}

MatrixXd backprop_hidden(const MatrixXd& upstream, const MatrixXd& pre, const MatrixXd& mask, Activation act) {
  MatrixXd delta = upstream.cwiseProduct(activation_slope(pre, act));
  if (mask.size() != 0) delta.array() *= mask.array();
  return delta;
}

}  // namespace

CvaeParams zero_cvae(const CvaeShape& s) {
  CvaeParams p;
  p.shape = s;
  auto zero = [](std::size_t in, std::size_t out) {
    return DenseLayer{MatrixXd::Zero(idx(out), idx(in)), VectorXd::Zero(idx(out))};
  };
  p.layers = {
      zero(s.input_dim + s.label_count, s.enc_hidden1), zero(s.enc_hidden1, s.enc_hidden2),
      zero(s.enc_hidden2, 2 * s.latent_dim),           zero(s.latent_dim + s.label_count, s.dec_hidden1),
      zero(s.dec_hidden1, s.dec_hidden2),               zero(s.dec_hidden2, s.input_dim),
  };
  return p;
}

CvaeParams init_cvae(const CvaeShape& s, std::uint64_t seed) {
  Rng rng(seed);
  CvaeParams p = zero_cvae(s);
  for (auto& layer : p.layers) layer = init_dense(layer.inputs(), layer.outputs(), rng);
  return p;
}

void validate(const CvaeParams& params) {
  const CvaeParams expected = zero_cvae(params.shape);
  if (params.layers.size() != expected.layers.size()) shape_fail("CVAE needs 6 layers");
  for (std::size_t i = 0; i < expected.layers.size(); ++i) {
    const auto& got = params.layers[i];
    const auto& want = expected.layers[i];
    if (got.weight.rows() != want.weight.rows() || got.weight.cols() != want.weight.cols() ||
        got.bias.size() != want.bias.size()) {
      shape_fail("CVAE layer " + std::to_string(i) + " shape disagrees with the configuration");
    }
    if (!got.weight.allFinite() || !got.bias.allFinite()) {
      shape_fail("CVAE layer " + std::to_string(i) + " has non-finite entries");
    }
  }
}

DropoutMasks draw_dropout_masks(const CvaeShape& s, std::size_t batch, double keep_ratio, Rng& rng) {
  DropoutMasks masks;
  if (keep_ratio >= 1.0) return masks;
  if (!(keep_ratio > 0.0)) throw Error(ErrorKind::InvalidArgument, "keep ratio must be in (0, 1]");
  const double scale = 1.0 / keep_ratio;
  auto draw = [&](std::size_t rows) {
    MatrixXd m(idx(rows), idx(batch));
    for (Index c = 0; c < m.cols(); ++c) {
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform01() < keep_ratio ? scale : 0.0;
    }
    return m;
  };
  masks.enc1 = draw(s.enc_hidden1);
  masks.enc2 = draw(s.enc_hidden2);
  masks.dec1 = draw(s.dec_hidden1);
  masks.dec2 = draw(s.dec_hidden2);
  return masks;
}

EncoderOutput encode(const CvaeParams& params, const VectorXd& x, const VectorXd& y, const DropoutMasks* masks) {
  const Forward f = run_encoder(params, x, y, masks);
  return {f.mu.col(0), f.log_var.col(0)};
}

VectorXd reparameterize(const VectorXd& mu, const VectorXd& log_var, const VectorXd& noise) {
  if (mu.size() != log_var.size() || mu.size() != noise.size()) {
    throw Error(ErrorKind::LengthMismatch, "reparameterize needs equal lengths");
  }
  return mu + ((0.5 * log_var).array().exp() * noise.array()).matrix();
}

VectorXd decode(const CvaeParams& params, const VectorXd& z, const VectorXd& y, const DropoutMasks* masks) {
  Forward f;
  f.z = z;
  run_decoder(params, y, masks, f);
  return sigmoid(f.logits).col(0);
}

double binary_cross_entropy(const VectorXd& x_target, const VectorXd& x_out) {
  if (x_target.size() != x_out.size()) throw Error(ErrorKind::LengthMismatch, "BCE length mismatch");
  double total = 0.0;
  for (Index i = 0; i < x_out.size(); ++i) {
    const double p = x_out[i];
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::DomainError, "decoder output outside (0, 1)");
    total -= x_target[i] * std::log(p) + (1.0 - x_target[i]) * std::log1p(-p);
  }
  return total;
}

double kl_divergence(const VectorXd& mu, const VectorXd& log_var) {
  if (mu.size() != log_var.size()) throw Error(ErrorKind::LengthMismatch, "KL length mismatch");
  return 0.5 * (mu.array().square() + log_var.array().exp() - 1.0 - log_var.array()).sum();
}

double elbo_loss(const VectorXd& x_target, const VectorXd& x_out, const VectorXd& mu, const VectorXd& log_var) {
  return binary_cross_entropy(x_target, x_out) + kl_divergence(mu, log_var);
}

CvaeLoss cvae_loss(const CvaeParams& params, const CvaeBatch& batch) {
  return loss_of(forward_batch(params, batch), batch.target);
}

CvaeGradients cvae_gradients(const CvaeParams& params, const CvaeBatch& batch) {
  const Forward f = forward_batch(params, batch);
  const auto& s = params.shape;
  const double inv_batch = 1.0 / static_cast<double>(batch.input.cols());

  CvaeGradients out;
  out.loss = loss_of(f, batch.target);
  out.grads.resize(CvaeParams::kLayerCount);
  const auto& L = params.layers;

  const MatrixXd d_logits = (sigmoid(f.logits) - batch.target) * inv_batch;
  accumulate(out.grads[CvaeParams::kDecOut], d_logits, f.h4);
  const MatrixXd d_a4 = backprop_hidden(L[CvaeParams::kDecOut].weight.transpose() * d_logits, f.a4,
                                        batch.masks.dec2, s.activation);
  accumulate(out.grads[CvaeParams::kDec2], d_a4, f.h3);
  const MatrixXd d_a3 = backprop_hidden(L[CvaeParams::kDec2].weight.transpose() * d_a4, f.a3,
                                        batch.masks.dec1, s.activation);
  accumulate(out.grads[CvaeParams::kDec1], d_a3, f.z_in);
  const MatrixXd d_z = (L[CvaeParams::kDec1].weight.transpose() * d_a3).bottomRows(idx(s.latent_dim));

  const MatrixXd sigma = (0.5 * f.log_var).array().exp().matrix();
  MatrixXd d_enc_out(2 * idx(s.latent_dim), f.mu.cols());
  d_enc_out.topRows(idx(s.latent_dim)) = d_z + f.mu * inv_batch;
  d_enc_out.bottomRows(idx(s.latent_dim)) =
      (0.5 * d_z.array() * sigma.array() * batch.noise.array() +
       0.5 * (f.log_var.array().exp() - 1.0) * inv_batch)
          .matrix();
  accumulate(out.grads[CvaeParams::kEncOut], d_enc_out, f.h2);
  const MatrixXd d_a2 = backprop_hidden(L[CvaeParams::kEncOut].weight.transpose() * d_enc_out, f.a2,
                                        batch.masks.enc2, s.activation);
  accumulate(out.grads[CvaeParams::kEnc2], d_a2, f.h1);
  const MatrixXd d_a1 = backprop_hidden(L[CvaeParams::kEnc2].weight.transpose() * d_a2, f.a1,
                                        batch.masks.enc1, s.activation);
  accumulate(out.grads[CvaeParams::kEnc1], d_a1, f.x_in);

  for (const auto& g : out.grads) {
    if (!g.weight.allFinite() || !g.bias.allFinite()) {
      throw Error(ErrorKind::NonFiniteGradient, "CVAE gradient has a non-finite entry");
    }
  }
  return out;
}

namespace {

struct EvalNumbers {
  double loss = 0.0;
  double recon = 0.0;
  double excess = 0.0;
};

EvalNumbers evaluate_cvae(const CvaeParams& params, const TrainingSet& data, std::span<const std::size_t> rows) {
  constexpr std::size_t kChunk = 1024;
  EvalNumbers sum;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    const auto part = rows.subspan(start, std::min(kChunk, rows.size() - start));
    CvaeBatch b;
    b.input = detail::gather(data.noisy, part);
    b.target = detail::gather(data.clean, part);
    for (std::size_t r : part) b.labels.push_back(data.labels[r]);
    b.noise = MatrixXd::Zero(idx(params.shape.latent_dim), idx(part.size()));
    const CvaeLoss loss = cvae_loss(params, b);
    const double w = static_cast<double>(part.size());
    sum.loss += loss.total * w;
    sum.recon += loss.recon * w;
    sum.excess += loss.recon * w - detail::target_entropy(b.target);
  }
  const double n = static_cast<double>(rows.size());
  return {sum.loss / n, sum.recon / n, sum.excess / n};
}

}  // namespace

CvaeTrainResult train_cvae(const TrainingSet& data, const CvaeShape& shape, const TrainConfig& cfg) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyTrainingSet, "no training pairs");
  if (data.noisy.rows() != idx(shape.input_dim) || data.clean.rows() != idx(shape.input_dim)) {
    shape_fail("training descriptors have length " + std::to_string(data.noisy.rows()));
  }
  if (data.label_count != shape.label_count) shape_fail("label count differs from the network");
  if (cfg.batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");

  Rng order_rng(derive_seed(cfg.seed, 1));
  Rng sample_rng(derive_seed(cfg.seed, 2));
  CvaeTrainResult result;
  result.params = init_cvae(shape, derive_seed(cfg.seed, 0));
  const detail::Split split = detail::split_indices(data.size(), cfg.holdout_fraction, order_rng);
  std::vector<std::size_t> order = split.train;

  auto record = [&](int epoch, double lr, double train_loss) {
    const EvalNumbers e = evaluate_cvae(result.params, data, split.eval);
    result.history.push_back({epoch, lr, epoch == 0 ? e.loss : train_loss, e.loss, e.recon, e.excess});
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
      CvaeBatch b;
      b.input = detail::gather(data.noisy, part);
      b.target = detail::gather(data.clean, part);
      for (std::size_t r : part) b.labels.push_back(data.labels[r]);
      b.noise.resize(idx(shape.latent_dim), idx(part.size()));
      for (Index c = 0; c < b.noise.cols(); ++c) {
        for (Index r = 0; r < b.noise.rows(); ++r) b.noise(r, c) = sample_rng.normal();
      }
      b.masks = draw_dropout_masks(shape, part.size(), cfg.keep_ratio, sample_rng);
      const CvaeGradients g = cvae_gradients(result.params, b);
      adam.step(result.params.layers, g.grads, lr);
      loss_sum += g.loss.total;
      ++batches;
    }
    record(epoch, lr, loss_sum / static_cast<double>(batches));
    lr *= cfg.lr_decay;
  }
  return result;
}

MatrixXd infer_cvae(const CvaeParams& params, const MatrixXd& descriptors, std::span<const std::int32_t> labels) {
  if (static_cast<std::size_t>(descriptors.cols()) != labels.size()) shape_fail("one label per descriptor");
  const MatrixXd y = one_hot_columns(labels, params.shape.label_count);
  Forward f = run_encoder(params, descriptors, y, nullptr);
  f.z = f.mu;
  run_decoder(params, y, nullptr, f);
  return sigmoid(f.logits);
}

VectorXd infer_cvae(const CvaeParams& params, const VectorXd& descriptor, std::int32_t label) {
  const std::int32_t labels[1] = {label};
  return infer_cvae(params, MatrixXd(descriptor), labels).col(0);
}

}  // namespace mdn
