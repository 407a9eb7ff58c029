#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdn/mesh.hpp"

namespace mdn {

class ThreadPool;

struct DistanceResult {
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> per_vertex;
};

struct AngleResult {
  double mean_deg = 0.0;
  std::vector<double> per_face;  // degrees in [0, 180]
};

struct MetricsReport {
  // Mean over reconstructed vertices of the distance to the reference
  // surface (what is often loosely called the Hausdorff distance), plus the
  // max, which is the actual one-sided Hausdorff distance.
  double mean_one_sided_distance = 0.0;
  double max_one_sided_distance = 0.0;
  double alpha_mean_deg = 0.0;
  std::vector<std::size_t> alpha_histogram;  // 180 one-degree bins
  std::vector<double> per_vertex_distance;
  std::vector<double> per_face_alpha;
};

// Meshes above this face count are searched through a TriangleBvh.
inline constexpr std::size_t kBvhFaceThreshold = 10000;

// Throws EmptyMesh.
DistanceResult one_sided_distance(const Mesh& reconstructed, const Mesh& reference,
                                  ThreadPool* pool = nullptr);

// Faces degenerate in either mesh report 0 and are left out of the mean.
// Throws ConnectivityMismatch.
AngleResult normal_angle_alpha(const Mesh& reconstructed, const Mesh& reference);

MetricsReport evaluate(const Mesh& reconstructed, const Mesh& reference, ThreadPool* pool = nullptr);

struct ErrorColormap {
  std::string coff;  // COFF with RGBA per vertex, min -> blue, max -> red
  std::string csv;   // vertex_index,distance
};

// Throws LengthMismatch.
ErrorColormap export_error_colormap(const Mesh& mesh, std::span<const double> per_vertex);

}  // namespace mdn
