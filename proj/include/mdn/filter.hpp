#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdn/mesh.hpp"

namespace mdn {

class ThreadPool;

// MeanSquaredDistance: sigma1 = mean of |c_i - c_j|^2 over the neighbourhood.
// MeanDistance: sigma1 = mean of |c_i - c_j|, which keeps W1 scale-free.
enum class Sigma1Mode : std::uint8_t { MeanSquaredDistance = 0, MeanDistance = 1 };

struct BilateralConfig {
  double sigma2 = 0.15;
  int iterations = 1;
  std::size_t patch_size = 20;  // neighbourhood = centre face + this many nearest faces
  Sigma1Mode sigma1_mode = Sigma1Mode::MeanSquaredDistance;
};

struct VertexUpdateConfig {
  int iterations = 20;
  // Leave vertices without incident faces in place instead of throwing.
  bool skip_isolated = false;
};

// Throws EmptyNeighborhood when `neighbors` is empty.
double sigma1_estimate(const Mesh& mesh, std::size_t face, std::span<const std::int32_t> neighbors,
                       Sigma1Mode mode = Sigma1Mode::MeanSquaredDistance);
// Neighbourhood = faces sharing a vertex with `face`.
double sigma1_estimate(const Mesh& mesh, const Adjacency& adj, std::size_t face,
                       Sigma1Mode mode = Sigma1Mode::MeanSquaredDistance);

// Each iteration replaces n_i by the normalised sum over the centre face and
// its patch of A_j * W1_ij * W2_ij * n_j, with
//   W1 = exp(-|c_i - c_j|^2 / (2 sigma1_i^2)),
//   W2 = exp(-|n_i - n_j|^2 / (2 sigma2^2)).
// Degenerate faces keep their input normal. Throws ZeroAccumulator.
std::vector<Vec3> bilateral_filter(const Mesh& mesh, const Adjacency& adj, std::span<const Vec3> normals,
                                   const BilateralConfig& cfg, ThreadPool* pool = nullptr);

// Jacobi iterations of
//   v_i += (1/|N_i|) sum_{j in N_i} n_j <n_j, c_j - v_i>
// over the faces N_i incident to v_i, centroids taken from the previous
// iterate. Throws IsolatedVertex (unless skipped), LengthMismatch.
Mesh update_vertices(const Mesh& mesh, const Adjacency& adj, std::span<const Vec3> normals,
                     const VertexUpdateConfig& cfg, ThreadPool* pool = nullptr);

}  // namespace mdn
