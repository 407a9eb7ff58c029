#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace mdn {

class ThreadPool;

struct ClusterModel {
  Eigen::MatrixXd centroids;  // one centroid per column
  std::uint64_t seed = 0;

  std::size_t cluster_count() const noexcept { return static_cast<std::size_t>(centroids.cols()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(centroids.rows()); }
};

struct KMeansResult {
  ClusterModel model;
  std::vector<std::int32_t> labels;
  // Within-cluster sum of squares after each assignment step.
  std::vector<double> wcss_history;
  int iterations = 0;
  bool converged = false;
};

// k-means++ seeding then Lloyd iterations until the assignment stops
// changing or max_iter is reached. Samples are the columns of `data`. An
// emptied cluster is reseeded on the sample farthest from its centroid.
// Throws EmptyInput, TooFewSamples.
KMeansResult kmeans_fit(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                        int max_iter = 100, ThreadPool* pool = nullptr);

// Nearest centroid by squared distance; ties go to the lower index.
// Throws LengthMismatch.
std::int32_t assign_label(const ClusterModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// Throws IndexOutOfRange.
Eigen::VectorXd one_hot(std::size_t label, std::size_t k);

}  // namespace mdn
