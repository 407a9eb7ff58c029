#include "mdn/noise.hpp"

#include "mdn/error.hpp"
#include "mdn/rng.hpp"

namespace mdn {

Mesh add_gaussian_noise(const Mesh& mesh, const NoiseSpec& spec) {
  if (!(spec.beta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise beta must be >= 0");
  const double edge = average_edge_length(mesh);
  const double mean = spec.mu * edge;
  const double stddev = spec.beta * edge;

  std::vector<Vec3> moved = mesh.vertices();
  Rng rng(spec.seed);
  for (std::size_t v = 0; v < moved.size(); ++v) {
    const Vec3 normal = vertex_normal(mesh, v);
    const double offset = rng.normal(mean, stddev);
    moved[v] += offset * normal;
  }
  return mesh.with_vertices(std::move(moved));
}

}  // namespace mdn
