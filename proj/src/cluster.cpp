#include "mdn/cluster.hpp"

#include <limits>
#include <string>

#include "mdn/error.hpp"
#include "mdn/rng.hpp"
#include "mdn/thread_pool.hpp"

namespace mdn {

namespace {

struct Nearest {
  std::int32_t index = 0;
  double distance = 0.0;
};

Nearest nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
    const double d = (centroids.col(c) - x).squaredNorm();
    if (d < best.distance) best = {static_cast<std::int32_t>(c), d};
  }
  return best;
}

// Returns WCSS of the new assignment and whether any label changed.
std::pair<double, bool> assign_all(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids,
                                   std::vector<std::int32_t>& labels, std::vector<double>& dist,
                                   ThreadPool* pool) {
  const auto n = static_cast<std::size_t>(data.cols());
  std::vector<std::uint8_t> changed(n, 0);
  parallel_for(pool, 0, n, 1024, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Nearest near = nearest_centroid(centroids, data.col(static_cast<Eigen::Index>(i)));
      changed[i] = labels[i] != near.index;
      labels[i] = near.index;
      dist[i] = near.distance;
    }
  });
  double wcss = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    wcss += dist[i];
    any = any || changed[i] != 0;
  }
  return {wcss, any};
}

Eigen::MatrixXd plus_plus_init(const Eigen::MatrixXd& data, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(data.cols());
  Eigen::MatrixXd centroids(data.rows(), static_cast<Eigen::Index>(k));
  centroids.col(0) = data.col(static_cast<Eigen::Index>(rng.below(n)));
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    best[i] = (data.col(static_cast<Eigen::Index>(i)) - centroids.col(0)).squaredNorm();
  }
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : best) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double running = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        running += best[i];
        if (running > target && best[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    centroids.col(static_cast<Eigen::Index>(c)) = data.col(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      const double d =
          (data.col(static_cast<Eigen::Index>(i)) - centroids.col(static_cast<Eigen::Index>(c))).squaredNorm();
      if (d < best[i]) best[i] = d;
    }
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans_fit(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed, int max_iter,
                        ThreadPool* pool) {
  if (data.cols() == 0 || data.rows() == 0) throw Error(ErrorKind::EmptyInput, "no samples to cluster");
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "cluster count must be >= 1");
  const auto n = static_cast<std::size_t>(data.cols());
  if (n < k) {
    throw Error(ErrorKind::TooFewSamples,
                std::to_string(n) + " samples for " + std::to_string(k) + " clusters");
  }

  Rng rng(seed);
  KMeansResult result;
  result.model.seed = seed;
  Eigen::MatrixXd centroids = plus_plus_init(data, k, rng);
  std::vector<std::int32_t> labels(n, -1);
  std::vector<double> dist(n, 0.0);

  for (int iter = 0; iter < max_iter; ++iter) {
    const auto [wcss, changed] = assign_all(data, centroids, labels, dist, pool);
    result.wcss_history.push_back(wcss);
    result.iterations = iter + 1;
    if (!changed && iter > 0) {
      result.converged = true;
      break;
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(data.rows(), static_cast<Eigen::Index>(k));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.col(labels[i]) += data.col(static_cast<Eigen::Index>(i));
      ++counts[labels[i]];
    }
    std::vector<std::uint8_t> taken(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      if (counts[c] > 0) {
        centroids.col(col) = sums.col(col) / static_cast<double>(counts[c]);
        continue;
      }
      // Reseed an emptied cluster on the sample worst served by its centroid.
      std::size_t far = 0;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && dist[i] > far_dist) {
          far = i;
          far_dist = dist[i];
        }
      }
      taken[far] = 1;
      dist[far] = 0.0;
      centroids.col(col) = data.col(static_cast<Eigen::Index>(far));
    }
  }

  if (!result.converged) {
    const auto [wcss, changed] = assign_all(data, centroids, labels, dist, pool);
    result.wcss_history.push_back(wcss);
    result.converged = !changed;
  }
  result.model.centroids = std::move(centroids);
  result.labels = std::move(labels);
  return result;
}

std::int32_t assign_label(const ClusterModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != model.dimension()) {
    throw Error(ErrorKind::LengthMismatch, "descriptor length " + std::to_string(x.size()) +
                                               " vs centroid length " + std::to_string(model.dimension()));
  }
  if (model.cluster_count() == 0) throw Error(ErrorKind::EmptyInput, "cluster model has no centroids");
  return nearest_centroid(model.centroids, x).index;
}

Eigen::VectorXd one_hot(std::size_t label, std::size_t k) {
  if (label >= k) {
    throw Error(ErrorKind::IndexOutOfRange, "label " + std::to_string(label) + " for " +
                                                std::to_string(k) + " clusters");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  v[static_cast<Eigen::Index>(label)] = 1.0;
  return v;
}

}  // namespace mdn
