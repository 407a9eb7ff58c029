#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "mdn/neural.hpp"
#include "mdn/rng.hpp"

namespace mdn::detail {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;  // held-out; falls back to train when empty
};

inline Split split_indices(std::size_t count, double holdout_fraction, Rng& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  auto holdout = static_cast<std::size_t>(std::floor(holdout_fraction * static_cast<double>(count)));
  holdout = std::min(holdout, count - 1);
  Split split;
  split.eval.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(holdout), order.end());
  std::sort(split.eval.begin(), split.eval.end());
  if (split.eval.empty()) split.eval = split.train;
  return split;
}

inline Eigen::MatrixXd gather(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

// Sum over entries of the Bernoulli entropy of the targets.
inline double target_entropy(const Eigen::MatrixXd& target) {
  return target
      .unaryExpr([](double t) {
        double h = 0.0;
        if (t > 0.0) h -= t * std::log(t);
        if (t < 1.0) h -= (1.0 - t) * std::log1p(-t);
        return h;
      })
      .sum();
}

}  // namespace mdn::detail
