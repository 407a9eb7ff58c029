#include "mdn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "mdn/bvh.hpp"
#include "mdn/error.hpp"
#include "mdn/mesh_io.hpp"
#include "mdn/thread_pool.hpp"

namespace mdn {

DistanceResult one_sided_distance(const Mesh& reconstructed, const Mesh& reference, ThreadPool* pool) {
  if (reconstructed.vertex_count() == 0 || reference.face_count() == 0) {
    throw Error(ErrorKind::EmptyMesh, "distance needs reconstructed vertices and reference faces");
  }
  std::optional<TriangleBvh> bvh;
  if (reference.face_count() > kBvhFaceThreshold) bvh.emplace(reference);

  DistanceResult result;
  result.per_vertex.resize(reconstructed.vertex_count());
  parallel_for(pool, 0, reconstructed.vertex_count(), 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const Vec3& p = reconstructed.vertex(v);
      const ClosestPoint hit = bvh ? bvh->closest(p) : closest_point_brute_force(reference, p);
      result.per_vertex[v] = std::sqrt(hit.squared_distance);
    }
  });
  double total = 0.0;
  for (double d : result.per_vertex) {
    total += d;
    result.max = std::max(result.max, d);
  }
  result.mean = total / static_cast<double>(result.per_vertex.size());
  return result;
}

AngleResult normal_angle_alpha(const Mesh& reconstructed, const Mesh& reference) {
  if (reconstructed.faces() != reference.faces()) {
    throw Error(ErrorKind::ConnectivityMismatch, "alpha needs identical face lists");
  }
  AngleResult result;
  result.per_face.assign(reference.face_count(), 0.0);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t f = 0; f < reference.face_count(); ++f) {
    if (reconstructed.is_degenerate(f) || reference.is_degenerate(f)) continue;
    const double c = std::clamp(reconstructed.face_normals()[f].dot(reference.face_normals()[f]), -1.0, 1.0);
    result.per_face[f] = std::acos(c) * 180.0 / std::numbers::pi;
    total += result.per_face[f];
    ++counted;
  }
  result.mean_deg = counted > 0 ? total / static_cast<double>(counted) : 0.0;
  return result;
}

MetricsReport evaluate(const Mesh& reconstructed, const Mesh& reference, ThreadPool* pool) {
  MetricsReport report;
  DistanceResult distance = one_sided_distance(reconstructed, reference, pool);
  AngleResult alpha = normal_angle_alpha(reconstructed, reference);
  report.mean_one_sided_distance = distance.mean;
  report.max_one_sided_distance = distance.max;
  report.alpha_mean_deg = alpha.mean_deg;
  report.alpha_histogram.assign(180, 0);
  for (double a : alpha.per_face) {
    report.alpha_histogram[std::min<std::size_t>(static_cast<std::size_t>(a), 179)] += 1;
  }
  report.per_vertex_distance = std::move(distance.per_vertex);
  report.per_face_alpha = std::move(alpha.per_face);
  return report;
}

ErrorColormap export_error_colormap(const Mesh& mesh, std::span<const double> per_vertex) {
  if (per_vertex.size() != mesh.vertex_count()) {
    throw Error(ErrorKind::LengthMismatch, "one value per vertex required");
  }
  double lo = 0.0;
  double hi = 0.0;
  if (!per_vertex.empty()) {
    const auto [mn, mx] = std::minmax_element(per_vertex.begin(), per_vertex.end());
    lo = *mn;
    hi = *mx;
  }
  const double range = hi - lo;

  ErrorColormap out;
  out.coff = "COFF\n" + std::to_string(mesh.vertex_count()) + ' ' + std::to_string(mesh.face_count()) + " 0\n";
  out.csv = "vertex_index,distance\n";
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const double t = range > 0.0 ? (per_vertex[v] - lo) / range : 0.0;
    const int red = static_cast<int>(std::lround(255.0 * t));
    const int blue = 255 - red;
    const Vec3& p = mesh.vertex(v);
    out.coff += format_double(p.x()) + ' ' + format_double(p.y()) + ' ' + format_double(p.z()) + ' ' +
                std::to_string(red) + " 0 " + std::to_string(blue) + " 255\n";
    out.csv += std::to_string(v) + ',' + format_double(per_vertex[v]) + '\n';
  }
  for (const Face& f : mesh.faces()) {
    out.coff += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]) + '\n';
  }
  return out;
}

}  // namespace mdn
