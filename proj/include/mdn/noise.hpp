#pragma once

#include <cstdint>

#include "mdn/mesh.hpp"

namespace mdn {

// Offsets are drawn in units of the mesh's mean edge length:
// d ~ Normal(mu * L, (beta * L)^2).
struct NoiseSpec {
  double mu = 0.0;
  double beta = 0.1;
  std::uint64_t seed = 1;
};

// Moves every vertex along its clean-mesh vertex normal by an independent
// Gaussian offset. One draw per vertex, in vertex order, from Rng(seed).
// Throws IsolatedVertex, NoEdges, or InvalidArgument (beta < 0).
Mesh add_gaussian_noise(const Mesh& mesh, const NoiseSpec& spec);

}  // namespace mdn
