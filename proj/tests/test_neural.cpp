#include <cmath>

#include "gradcheck.hpp"
#include "mdn/cluster.hpp"
#include "mdn/noise.hpp"
#include "mdn/patch.hpp"
#include "mdn/shapes.hpp"
#include "support.hpp"

namespace mdn {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using test::expect_error;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

CvaeShape unit_shape(Activation act = Activation::Relu) {
  CvaeShape s;
  s.input_dim = 1;
  s.label_count = 0;
  s.latent_dim = 1;
  s.enc_hidden1 = s.enc_hidden2 = s.dec_hidden1 = s.dec_hidden2 = 1;
  s.activation = act;
  return s;
}

// Identity-ish descriptors from real patches: x_clean = x_noisy.
TrainingSet identity_pairs(std::size_t count, std::size_t labels) {
  const Mesh m = add_gaussian_noise(shapes::torus(24, 12), {0.0, 0.2, 4});
  const Adjacency adj = build_adjacency(m);
  MatrixXd x(27, static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    x.col(static_cast<Eigen::Index>(i)) = encode_descriptor(build_patch(m, adj, i % m.face_count(), 8), Vec3::UnitZ()).values;
  }
  TrainingSet set;
  set.noisy = x;
  set.clean = x;
  set.label_count = labels;
  set.labels = kmeans_fit(x, labels, 1).labels;
  return set;
}

CvaeShape small_shape(std::size_t dim, std::size_t labels) {
  CvaeShape s;
  s.input_dim = dim;
  s.label_count = labels;
  s.latent_dim = 8;
  s.enc_hidden1 = s.enc_hidden2 = s.dec_hidden1 = s.dec_hidden2 = 48;
  return s;
}

TEST(Dense, InitialisationBounds) {
  Rng rng(1);
  const DenseLayer l = init_dense(30, 20, rng);
  const double bound = std::sqrt(6.0 / 50.0);
  EXPECT_LE(l.weight.cwiseAbs().maxCoeff(), bound);
  EXPECT_GT(l.weight.cwiseAbs().maxCoeff(), 0.8 * bound);
  EXPECT_EQ(l.bias, VectorXd::Zero(20));
}

TEST(Cvae, ZeroWeightsGiveZeroPosteriorAndHalfOutputs) {
  CvaeShape s = small_shape(6, 3);
  const CvaeParams p = zero_cvae(s);
  const EncoderOutput e = encode(p, VectorXd::Constant(6, 0.3), one_hot(1, 3));
  EXPECT_EQ(e.mu, VectorXd::Zero(8));
  EXPECT_EQ(e.log_var, VectorXd::Zero(8));
  EXPECT_EQ(decode(p, VectorXd::Ones(8), one_hot(2, 3)), VectorXd::Constant(6, 0.5));
  expect_error(ErrorKind::ShapeMismatch, [&] { encode(p, VectorXd::Zero(6), one_hot(1, 4)); });
  expect_error(ErrorKind::ShapeMismatch, [&] { decode(p, VectorXd::Zero(8), one_hot(1, 2)); });
}

TEST(Cvae, HandComputedEncoder) {
  for (Activation act : {Activation::Relu, Activation::LeakyRelu}) {
    CvaeParams p = zero_cvae(unit_shape(act));
    p.layers[CvaeParams::kEnc1].weight(0, 0) = 2.0;
    p.layers[CvaeParams::kEnc1].bias[0] = 0.5;
    p.layers[CvaeParams::kEnc2].weight(0, 0) = -1.0;
    p.layers[CvaeParams::kEnc2].bias[0] = 1.0;
    p.layers[CvaeParams::kEncOut].weight(0, 0) = 3.0;
    p.layers[CvaeParams::kEncOut].weight(1, 0) = 4.0;
    p.layers[CvaeParams::kEncOut].bias << 0.25, -0.5;
    const EncoderOutput e = encode(p, vec({1.0}), VectorXd(0));
    // h1 = 2*1 + 0.5 = 2.5; a2 = -2.5 + 1 = -1.5.
    const double h2 = act == Activation::Relu ? 0.0 : -0.015;
    EXPECT_DOUBLE_EQ(e.mu[0], 3.0 * h2 + 0.25);
    EXPECT_DOUBLE_EQ(e.log_var[0], 4.0 * h2 - 0.5);
  }
}

TEST(Cvae, HandComputedDecoder) {
  CvaeShape s;
  s.input_dim = 2;
  s.label_count = 2;
  s.latent_dim = 1;
  s.enc_hidden1 = s.enc_hidden2 = 1;
  s.dec_hidden1 = s.dec_hidden2 = 2;
  CvaeParams p = zero_cvae(s);
  // Decoder input is [y; z] = [0, 1, 0.5].
  p.layers[CvaeParams::kDec1].weight << 1.0, 2.0, -1.0, 0.5, -3.0, 2.0;
  p.layers[CvaeParams::kDec1].bias << 0.1, 0.2;
  p.layers[CvaeParams::kDec2].weight << 1.0, -1.0, 0.5, 0.5;
  p.layers[CvaeParams::kDec2].bias << 0.0, -0.1;
  p.layers[CvaeParams::kDecOut].weight << 2.0, 1.0, -1.0, 3.0;
  p.layers[CvaeParams::kDecOut].bias << -0.2, 0.3;
  const VectorXd out = decode(p, vec({0.5}), one_hot(1, 2));
  // a1 = (2 - 0.5 + 0.1, -3 + 1 + 0.2) = (1.6, -1.8) -> h1 = (1.6, 0)
  // a2 = (1.6, 0.8 - 0.1) = (1.6, 0.7)
  // logits = (3.2 + 0.7 - 0.2, -1.6 + 2.1 + 0.3) = (3.7, 0.8)
  EXPECT_NEAR(out[0], 1.0 / (1.0 + std::exp(-3.7)), 1e-15);
  EXPECT_NEAR(out[1], 1.0 / (1.0 + std::exp(-0.8)), 1e-15);

  // Raising a final pre-activation raises the matching output.
  p.layers[CvaeParams::kDecOut].bias[1] += 0.1;
  EXPECT_GT(decode(p, vec({0.5}), one_hot(1, 2))[1], out[1]);
}

TEST(Cvae, Reparameterize) {
  EXPECT_EQ(reparameterize(vec({1.5, -2}), vec({0.3, 0.1}), VectorXd::Zero(2)), vec({1.5, -2}));
  EXPECT_EQ(reparameterize(VectorXd::Zero(2), VectorXd::Zero(2), vec({0.7, -1.1})), vec({0.7, -1.1}));
  EXPECT_NEAR(reparameterize(vec({1}), vec({2 * std::log(3.0)}), vec({2}))[0], 7.0, 1e-14);
}

TEST(Loss, KlIdentities) {
  EXPECT_EQ(kl_divergence(VectorXd::Zero(4), VectorXd::Zero(4)), 0.0);
  EXPECT_EQ(kl_divergence(vec({1}), vec({0})), 0.5);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const VectorXd mu = VectorXd::NullaryExpr(5, [&] { return rng.normal(); });
    const VectorXd lv = VectorXd::NullaryExpr(5, [&] { return rng.normal(); });
    EXPECT_GT(kl_divergence(mu, lv), 0.0);
  }
}

TEST(Loss, CrossEntropyIdentities) {
  for (int len : {1, 7, 63}) {
    const VectorXd half = VectorXd::Constant(len, 0.5);
    EXPECT_NEAR(binary_cross_entropy(half, half), len * std::log(2.0), 1e-12);
    EXPECT_NEAR(elbo_loss(half, half, VectorXd::Zero(3), VectorXd::Zero(3)), len * std::log(2.0), 1e-12);
  }
  expect_error(ErrorKind::DomainError, [] { binary_cross_entropy(vec({0.5}), vec({1.0})); });
  expect_error(ErrorKind::DomainError, [] { binary_cross_entropy(vec({0.5}), vec({0.0})); });
  expect_error(ErrorKind::LengthMismatch, [] { binary_cross_entropy(vec({0.5}), vec({0.5, 0.5})); });
}

TEST(Gradients, HandDerivedBiasGradients) {
  // Zero net, zero inputs: every output is 0.5, so d(BCE)/d(logit) = 0.5 - t
  // and the decoder output bias gradient is that value (batch of one).
  CvaeShape s = small_shape(4, 2);
  const CvaeParams p = zero_cvae(s);
  CvaeBatch b;
  b.input = MatrixXd::Zero(4, 1);
  b.target = MatrixXd(4, 1);
  b.target << 0.0, 0.25, 0.75, 1.0;
  b.labels = {0};
  b.noise = MatrixXd::Zero(8, 1);
  const CvaeGradients g = cvae_gradients(p, b);
  const VectorXd expected = VectorXd::Constant(4, 0.5) - b.target.col(0);
  EXPECT_LT((g.grads[CvaeParams::kDecOut].bias - expected).norm(), 1e-15);
  EXPECT_EQ(g.grads[CvaeParams::kDecOut].weight, MatrixXd::Zero(4, 48));
  // KL of (0, 0) has zero gradient and the decoder ignores z when weights
  // are zero, so the encoder sees nothing.
  EXPECT_EQ(g.grads[CvaeParams::kEncOut].bias, VectorXd::Zero(16));
}

TEST(Gradients, FiniteDifferencesOnRandomTinyNets) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto c = test::random_tiny_cvae(seed);
    const auto r = test::check_cvae_gradients(c);
    EXPECT_LT(r.max_rel_error, 1e-3) << "seed " << seed;
    EXPECT_GT(r.parameters, 0u);
  }
}

TEST(Gradients, EmptyBatch) {
  const CvaeParams p = zero_cvae(small_shape(4, 2));
  CvaeBatch b;
  b.input = MatrixXd(4, 0);
  b.target = MatrixXd(4, 0);
  b.noise = MatrixXd(8, 0);
  expect_error(ErrorKind::EmptyInput, [&] { cvae_gradients(p, b); });
}

TEST(Training, IdentityPairsReduceReconstruction) {
  const TrainingSet set = identity_pairs(512, 4);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 64;
  cfg.epochs = 100;
  cfg.seed = 7;
  const CvaeTrainResult r = train_cvae(set, small_shape(27, 4), cfg);
  ASSERT_EQ(r.history.size(), 101u);
  // Cross-entropy against soft targets cannot go below their entropy, so
  // the reduction is measured on the part above that floor.
  const double before = r.history.front().eval_recon_excess;
  const double after = r.history.back().eval_recon_excess;
  EXPECT_LE(after, 0.5 * before) << before << " -> " << after;
  double early = 0, late = 0;
  for (int e = 1; e <= 20; ++e) early += r.history[e].train_loss;
  for (int e = 81; e <= 100; ++e) late += r.history[e].train_loss;
  EXPECT_LT(late, early);
}

TEST(Training, DeterministicAndZeroRate) {
  const TrainingSet set = identity_pairs(200, 3);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 32;
  cfg.epochs = 3;
  const CvaeShape s = small_shape(27, 3);
  const auto a = train_cvae(set, s, cfg);
  const auto b = train_cvae(set, s, cfg);
  EXPECT_TRUE(a.params == b.params);
  cfg.learning_rate = 0.0;
  const auto frozen = train_cvae(set, s, cfg);
  EXPECT_TRUE(frozen.params == init_cvae(s, derive_seed(cfg.seed, 0)));
}

TEST(Training, Errors) {
  TrainingSet empty;
  empty.noisy = MatrixXd(27, 0);
  empty.clean = MatrixXd(27, 0);
  empty.label_count = 3;
  expect_error(ErrorKind::EmptyTrainingSet, [&] { train_cvae(empty, small_shape(27, 3), {}); });
  const TrainingSet set = identity_pairs(20, 3);
  expect_error(ErrorKind::ShapeMismatch, [&] { train_cvae(set, small_shape(30, 3), {}); });
  expect_error(ErrorKind::ShapeMismatch, [&] { train_cvae(set, small_shape(27, 5), {}); });
}

TEST(Inference, PureRangeConditioningAndFlatPatch) {
  // Toy model trained on clean-target pairs from noisy shapes.
  std::vector<TrainingPair> pairs;
  const Mesh clean = shapes::icosphere(3);
  const Mesh noisy = add_gaussian_noise(clean, {0.0, 0.1, 9});
  const Adjacency adj = build_adjacency(noisy);
  for (std::size_t f = 0; f < noisy.face_count(); ++f) {
    const Patch p = build_patch(noisy, adj, f, 8);
    const PatchAlignment a = compute_alignment(p, Vec3::UnitZ());
    std::vector<Vec3> target{clean.face_normals()[f]};
    for (std::int32_t g : p.member_faces) target.push_back(clean.face_normals()[g]);
    TrainingPair pair;
    pair.x_noisy.resize(27);
    pair.x_clean.resize(27);
    encode_normals(p.normals, a, {pair.x_noisy.data(), 27});
    encode_normals(target, a, {pair.x_clean.data(), 27});
    pairs.push_back(pair);
  }
  TrainingSet set = TrainingSet::from_pairs(pairs, 4);
  set.labels = kmeans_fit(set.noisy, 4, 1).labels;
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 64;
  cfg.epochs = 15;
  const CvaeParams p = train_cvae(set, small_shape(27, 4), cfg).params;

  const VectorXd x = set.noisy.col(5);
  const VectorXd a = infer_cvae(p, x, 1);
  EXPECT_EQ(a, infer_cvae(p, x, 1));
  EXPECT_GT(a.minCoeff(), 0.0);
  EXPECT_LT(a.maxCoeff(), 1.0);
  double spread = 0.0;
  for (std::int32_t l = 1; l < 4; ++l) spread = std::max(spread, (infer_cvae(p, x, l) - infer_cvae(p, x, 0)).cwiseAbs().maxCoeff());
  EXPECT_GT(spread, 1e-6);

  // Batch form equals the single-sample form.
  const std::vector<std::int32_t> labels{0, 3};
  const MatrixXd batch = infer_cvae(p, set.noisy.leftCols(2), labels);
  EXPECT_LT((batch.col(0) - infer_cvae(p, set.noisy.col(0), 0)).norm(), 1e-12);
  EXPECT_LT((batch.col(1) - infer_cvae(p, set.noisy.col(1), 3)).norm(), 1e-12);

  VectorXd flat(27);
  for (int i = 0; i < 9; ++i) flat.segment<3>(3 * i) = Eigen::Vector3d(0.5, 0.5, 1.0);
  for (std::int32_t l = 0; l < 4; ++l) {
    const VectorXd out = infer_cvae(p, flat, l);
    const Vec3 n = decode_center_normal({out.data(), 27}, PatchAlignment{});
    EXPECT_LT(std::acos(std::clamp(n.z(), -1.0, 1.0)) * 180.0 / test::kPi, 10.0);
  }
}

TEST(Autoencoder, ZeroNetTrainingAndDeterminism) {
  AeShape s;
  s.input_dim = 27;
  s.hidden = {32, 16, 32};
  const AeParams zero = zero_ae(s);
  EXPECT_EQ(infer_ae(zero, VectorXd(VectorXd::Constant(27, 0.2))), VectorXd::Constant(27, 0.5));

  const TrainingSet set = identity_pairs(256, 2);
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 32;
  cfg.epochs = 30;
  const AeTrainResult a = train_ae(set, s, cfg);
  const AeTrainResult b = train_ae(set, s, cfg);
  EXPECT_LT(a.history.back().eval_loss, a.history.front().eval_loss);
  EXPECT_TRUE(a.params == b.params);
}

TEST(Autoencoder, FiniteDifferences) {
  Rng rng(12);
  AeShape s;
  s.input_dim = 5;
  s.hidden = {4, 3, 4};
  AeParams p = init_ae(s, 3);
  MatrixXd in = MatrixXd::NullaryExpr(5, 3, [&] { return rng.uniform01(); });
  MatrixXd target = MatrixXd::NullaryExpr(5, 3, [&] { return rng.uniform01(); });
  const AeGradients g = ae_gradients(p, in, target);
  double worst = 0.0;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (Eigen::Index i = 0; i < p.layers[l].weight.size(); ++i) {
      double& w = p.layers[l].weight.data()[i];
      const double saved = w;
      w = saved + 1e-4;
      const double up = ae_loss(p, in, target);
      w = saved - 1e-4;
      const double down = ae_loss(p, in, target);
      w = saved;
      worst = std::max(worst, test::relative_error(g.grads[l].weight.data()[i], (up - down) / 2e-4));
    }
  }
  EXPECT_LT(worst, 1e-3);
}

}  // namespace
}  // namespace mdn
