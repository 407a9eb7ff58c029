#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace mdn {

class Rng;

// ---------------------------------------------------------------------------
// Dense building blocks. Samples are matrix columns throughout.

enum class Activation : std::uint8_t { Relu = 0, LeakyRelu = 1 };

inline constexpr double kLeakySlope = 0.01;

struct DenseLayer {
  Eigen::MatrixXd weight;  // outputs x inputs
  Eigen::VectorXd bias;

  Eigen::Index inputs() const { return weight.cols(); }
  Eigen::Index outputs() const { return weight.rows(); }
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    return (weight * x).colwise() + bias;
  }

  // Exact equality, including shapes.
  bool operator==(const DenseLayer& other) const {
    return weight.rows() == other.weight.rows() && weight.cols() == other.weight.cols() &&
           bias.size() == other.bias.size() && weight == other.weight && bias == other.bias;
  }
};

// Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)), zero biases.
DenseLayer init_dense(Eigen::Index inputs, Eigen::Index outputs, Rng& rng);
DenseLayer zeros_like(const DenseLayer& layer);

Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation act);
Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& pre, Activation act);
Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& pre);

// Adam over a flat list of layers.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const std::vector<DenseLayer>& like, AdamConfig config);
  void step(std::vector<DenseLayer>& params, const std::vector<DenseLayer>& grads, double learning_rate);
  long steps() const noexcept { return t_; }

 private:
  AdamConfig config_;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
  long t_ = 0;
};

// ---------------------------------------------------------------------------
// Training data.

struct TrainingPair {
  Eigen::VectorXd x_noisy;
  Eigen::VectorXd x_clean;
  std::int32_t label = 0;
};

struct TrainingSet {
  Eigen::MatrixXd noisy;  // descriptor length x pairs
  Eigen::MatrixXd clean;
  std::vector<std::int32_t> labels;
  std::size_t label_count = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(noisy.cols()); }
  TrainingPair pair(std::size_t i) const;
  static TrainingSet from_pairs(std::span<const TrainingPair> pairs, std::size_t label_count);
};

struct TrainConfig {
  double learning_rate = 3e-5;
  double lr_decay = 0.998;  // multiplied in after every epoch
  std::size_t batch_size = 256;
  int epochs = 100;
  AdamConfig adam;
  double keep_ratio = 0.99;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch = 0;  // 0 = before the first update
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean minibatch loss over the epoch; epoch 0: eval_loss
  double eval_loss = 0.0;   // deterministic pass over the held-out split
  // Cross-entropy part of eval_loss, and the same minus the entropy of the
  // targets (the part a perfect reconstruction drives to zero).
  double eval_recon = 0.0;
  double eval_recon_excess = 0.0;
};

// ---------------------------------------------------------------------------
// Conditional VAE: Gaussian encoder on [y; x], Bernoulli decoder on [y; z].

struct CvaeShape {
  std::size_t input_dim = 63;   // 3(n+1)
  std::size_t label_count = 200;
  std::size_t latent_dim = 64;
  std::size_t enc_hidden1 = 2048;
  std::size_t enc_hidden2 = 2048;
  std::size_t dec_hidden1 = 2048;
  std::size_t dec_hidden2 = 2048;
  Activation activation = Activation::Relu;

  bool operator==(const CvaeShape&) const = default;
};

struct CvaeParams {
  enum Layer : std::size_t { kEnc1, kEnc2, kEncOut, kDec1, kDec2, kDecOut, kLayerCount };

  CvaeShape shape;
  // enc_out produces [mu; log-variance], 2 * latent_dim rows.
  std::vector<DenseLayer> layers;

  const DenseLayer& layer(Layer l) const { return layers[l]; }
  bool operator==(const CvaeParams&) const = default;
};

CvaeParams init_cvae(const CvaeShape& shape, std::uint64_t seed);
CvaeParams zero_cvae(const CvaeShape& shape);
// Throws ShapeMismatch when layer shapes disagree with `shape`.
void validate(const CvaeParams& params);

// Inverted-dropout multipliers (0 or 1/keep) for the four hidden layers,
// hidden_width x batch each. Empty matrices mean "no dropout".
struct DropoutMasks {
  Eigen::MatrixXd enc1, enc2, dec1, dec2;
};

DropoutMasks draw_dropout_masks(const CvaeShape& shape, std::size_t batch, double keep_ratio, Rng& rng);

struct EncoderOutput {
  Eigen::VectorXd mu;
  Eigen::VectorXd log_var;  // sigma = exp(0.5 * log_var)
};

// Single-sample passes. `y` is the one-hot label (length label_count).
// Throws ShapeMismatch, NonFiniteActivation.
EncoderOutput encode(const CvaeParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const DropoutMasks* masks = nullptr);
Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var,
                               const Eigen::VectorXd& noise);
Eigen::VectorXd decode(const CvaeParams& params, const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                       const DropoutMasks* masks = nullptr);

// Summed binary cross-entropy of x_out against x_target plus the closed-form
// KL of N(mu, exp(log_var)) against N(0, I). Throws DomainError when an
// x_out entry is outside (0, 1), LengthMismatch on size disagreement.
double elbo_loss(const Eigen::VectorXd& x_target, const Eigen::VectorXd& x_out,
                 const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var);
double kl_divergence(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var);
double binary_cross_entropy(const Eigen::VectorXd& x_target, const Eigen::VectorXd& x_out);

// A minibatch with its sampling realisations. noise is latent_dim x batch.
struct CvaeBatch {
  Eigen::MatrixXd input;
  Eigen::MatrixXd target;
  std::vector<std::int32_t> labels;
  Eigen::MatrixXd noise;
  DropoutMasks masks;
};

struct CvaeLoss {
  double total = 0.0;  // batch mean of (recon + kl)
  double recon = 0.0;  // batch mean cross-entropy
  double kl = 0.0;     // batch mean KL
};

// Forward pass only; the cross-entropy is evaluated from the logits.
CvaeLoss cvae_loss(const CvaeParams& params, const CvaeBatch& batch);

struct CvaeGradients {
  CvaeLoss loss;
  std::vector<DenseLayer> grads;  // same layout as CvaeParams::layers
};

// Exact gradients of cvae_loss. Throws NonFiniteGradient, EmptyInput.
CvaeGradients cvae_gradients(const CvaeParams& params, const CvaeBatch& batch);

struct CvaeTrainResult {
  CvaeParams params;
  std::vector<EpochStats> history;
};

// Throws EmptyTrainingSet, ShapeMismatch.
CvaeTrainResult train_cvae(const TrainingSet& data, const CvaeShape& shape, const TrainConfig& cfg);

// Deterministic pass (z = mu, no dropout). Batch form: one column per sample.
Eigen::VectorXd infer_cvae(const CvaeParams& params, const Eigen::VectorXd& descriptor,
                           std::int32_t label);
Eigen::MatrixXd infer_cvae(const CvaeParams& params, const Eigen::MatrixXd& descriptors,
                           std::span<const std::int32_t> labels);

// ---------------------------------------------------------------------------
// Plain autoencoder baseline: dense layers with a sigmoid after each one,
// trained on mean squared error.

struct AeShape {
  std::size_t input_dim = 63;
  std::vector<std::size_t> hidden{256, 128, 64, 128, 256};

  bool operator==(const AeShape&) const = default;
};

struct AeParams {
  AeShape shape;
  std::vector<DenseLayer> layers;  // hidden.size() + 1

  bool operator==(const AeParams&) const = default;
};

AeParams init_ae(const AeShape& shape, std::uint64_t seed);
AeParams zero_ae(const AeShape& shape);
void validate(const AeParams& params);

double ae_loss(const AeParams& params, const Eigen::MatrixXd& input, const Eigen::MatrixXd& target);

struct AeGradients {
  double loss = 0.0;
  std::vector<DenseLayer> grads;
};

AeGradients ae_gradients(const AeParams& params, const Eigen::MatrixXd& input,
                         const Eigen::MatrixXd& target);

struct AeTrainResult {
  AeParams params;
  std::vector<EpochStats> history;  // eval_recon holds the MSE
};

AeTrainResult train_ae(const TrainingSet& data, const AeShape& shape, const TrainConfig& cfg);

Eigen::VectorXd infer_ae(const AeParams& params, const Eigen::VectorXd& descriptor);
Eigen::MatrixXd infer_ae(const AeParams& params, const Eigen::MatrixXd& descriptors);

}  // namespace mdn
