#include <cmath>
#include <string>

#include "mdn/error.hpp"
#include "mdn/neural.hpp"
#include "mdn/rng.hpp"

namespace mdn {

DenseLayer init_dense(Eigen::Index inputs, Eigen::Index outputs, Rng& rng) {
  DenseLayer layer;
  layer.weight.resize(outputs, inputs);
  layer.bias = Eigen::VectorXd::Zero(outputs);
  const double fan = static_cast<double>(inputs + outputs);
  const double scale = fan > 0 ? std::sqrt(6.0 / fan) : 0.0;
  // Column-major fill order is part of the reproducible stream.
  for (Eigen::Index c = 0; c < inputs; ++c) {
    for (Eigen::Index r = 0; r < outputs; ++r) layer.weight(r, c) = rng.uniform(-scale, scale);
  }
  return layer;
}

DenseLayer zeros_like(const DenseLayer& layer) {
  return {Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
          Eigen::VectorXd::Zero(layer.bias.size())};
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation act) {
  if (act == Activation::Relu) return pre.cwiseMax(0.0);
  return pre.unaryExpr([](double a) { return a > 0.0 ? a : kLeakySlope * a; });
}

Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& pre, Activation act) {
  const double negative = act == Activation::Relu ? 0.0 : kLeakySlope;
  return pre.unaryExpr([negative](double a) { return a > 0.0 ? 1.0 : negative; });
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& pre) {
  return pre.unaryExpr([](double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
  });
}

Adam::Adam(const std::vector<DenseLayer>& like, AdamConfig config) : config_(config) {
  m_.reserve(like.size());
  for (const auto& layer : like) m_.push_back(zeros_like(layer));
  v_ = m_;
}

void Adam::step(std::vector<DenseLayer>& params, const std::vector<DenseLayer>& grads,
                double learning_rate) {
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double eps = config_.epsilon;
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].weight, grads[i].weight, m_[i].weight, v_[i].weight);
    update(params[i].bias, grads[i].bias, m_[i].bias, v_[i].bias);
  }
}

TrainingPair TrainingSet::pair(std::size_t i) const {
  const auto c = static_cast<Eigen::Index>(i);
  return {noisy.col(c), clean.col(c), labels[i]};
}

TrainingSet TrainingSet::from_pairs(std::span<const TrainingPair> pairs, std::size_t label_count) {
  TrainingSet set;
  set.label_count = label_count;
  if (pairs.empty()) return set;
  const Eigen::Index dim = pairs.front().x_noisy.size();
  set.noisy.resize(dim, static_cast<Eigen::Index>(pairs.size()));
  set.clean.resize(dim, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.x_noisy.size() != dim || p.x_clean.size() != dim) {
      throw Error(ErrorKind::ShapeMismatch, "training pair " + std::to_string(i) + " has wrong length");
    }
    set.noisy.col(static_cast<Eigen::Index>(i)) = p.x_noisy;
    set.clean.col(static_cast<Eigen::Index>(i)) = p.x_clean;
    set.labels.push_back(p.label);
  }
  return set;
}

}  // namespace mdn
