#include "mdn/patch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "mdn/error.hpp"

namespace mdn {

namespace {

constexpr double kParallelTol = 1e-12;

Vec3 first_non_parallel_axis(const Vec3& v) {
  return std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
}

// Spin about `target` (already the tilted mean normal) that maps the in-plane
// component of the first usable centroid offset onto the reference axis.
double canonical_spin(const Patch& patch, const Eigen::Matrix3d& tilt, const Vec3& target) {
  const Vec3 ref_raw = first_non_parallel_axis(target);
  const Vec3 reference = (ref_raw - ref_raw.dot(target) * target).normalized();
  for (std::size_t k = 1; k < patch.centroids.size(); ++k) {
    const Vec3 offset = tilt * (patch.centroids[k] - patch.centroids[0]);
    const Vec3 in_plane = offset - offset.dot(target) * target;
    if (in_plane.norm() <= 1e-9 * offset.norm()) continue;
    return std::atan2(target.dot(in_plane.cross(reference)), in_plane.dot(reference));
  }
  return 0.0;
}

}  // namespace

Eigen::Matrix3d PatchAlignment::matrix() const {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

void collect_patch_members(const Mesh& mesh, const Adjacency& adj, std::size_t face,
                           std::size_t n, std::vector<std::int32_t>& members) {
  members.clear();
  if (n == 0) return;
  const auto center = static_cast<std::int32_t>(face);
  std::vector<std::int32_t> visited{center};
  std::vector<std::int32_t> frontier{center};
  std::vector<std::int32_t> next;

  while (members.size() < n && !frontier.empty()) {
    next.clear();
    for (std::int32_t f : frontier) {
      for (std::int32_t g : adj.face_to_faces[f]) {
        if (std::find(visited.begin(), visited.end(), g) != visited.end()) continue;
        visited.push_back(g);
        next.push_back(g);
        if (!mesh.is_degenerate(g)) members.push_back(g);
      }
    }
    std::swap(frontier, next);
  }

  const auto& centroids = mesh.face_centroids();
  const Vec3& c0 = centroids[face];
  std::vector<std::pair<double, std::int32_t>> keyed;
  keyed.reserve(members.size());
  for (std::int32_t g : members) keyed.emplace_back((centroids[g] - c0).squaredNorm(), g);
  std::sort(keyed.begin(), keyed.end());
  const std::size_t keep = std::min(n, keyed.size());
  members.resize(keep);
  for (std::size_t k = 0; k < keep; ++k) members[k] = keyed[k].second;
}

Patch build_patch(const Mesh& mesh, const Adjacency& adj, std::size_t face, std::size_t n) {
  if (face >= mesh.face_count()) {
    throw Error(ErrorKind::IndexOutOfRange, "face " + std::to_string(face));
  }
  if (mesh.is_degenerate(face)) {
    throw Error(ErrorKind::DegenerateFace, "patch centre " + std::to_string(face) + " is degenerate");
  }
  Patch patch;
  patch.center_face = static_cast<std::int32_t>(face);
  collect_patch_members(mesh, adj, face, n, patch.member_faces);
  if (patch.member_faces.size() < n) {
    throw Error(ErrorKind::InsufficientNeighbors,
                "face " + std::to_string(face) + " reaches only " +
                    std::to_string(patch.member_faces.size()) + " of " + std::to_string(n) +
                    " neighbours");
  }
  patch.normals.reserve(n + 1);
  patch.areas.reserve(n + 1);
  patch.centroids.reserve(n + 1);
  auto push = [&](std::size_t f) {
    patch.normals.push_back(mesh.face_normals()[f]);
    patch.areas.push_back(mesh.face_areas()[f]);
    patch.centroids.push_back(mesh.face_centroids()[f]);
  };
  push(face);
  for (std::int32_t g : patch.member_faces) push(static_cast<std::size_t>(g));
  return patch;
}

Vec3 area_weighted_mean_normal(const Patch& patch) {
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < patch.normals.size(); ++i) sum += patch.areas[i] * patch.normals[i];
  return sum / static_cast<double>(patch.normals.size());
}

PatchAlignment minimal_alignment(const Vec3& from, const Vec3& to) {
  const Vec3 cross = from.cross(to);
  const double sine = cross.norm();
  const double cosine = from.dot(to);
  PatchAlignment alignment;
  if (sine <= kParallelTol) {
    if (cosine > 0.0) return alignment;
    alignment.axis = from.cross(first_non_parallel_axis(from)).normalized();
    alignment.angle = std::numbers::pi;
    return alignment;
  }
  alignment.axis = cross / sine;
  alignment.angle = std::atan2(sine, cosine);
  return alignment;
}

PatchAlignment compute_alignment(const Patch& patch, const Vec3& target, AlignmentMode mode) {
  const Vec3 mean = area_weighted_mean_normal(patch);
  double mean_area = 0.0;
  for (double a : patch.areas) mean_area += a;
  mean_area /= static_cast<double>(std::max<std::size_t>(patch.areas.size(), 1));
  // Relative to the mean face area so the test is scale-free.
  if (!(mean.norm() > 1e-12 * mean_area)) {
    throw Error(ErrorKind::DegenerateMeanNormal,
                "patch of face " + std::to_string(patch.center_face) + " has a cancelling mean normal");
  }
  const PatchAlignment tilt = minimal_alignment(mean.normalized(), target);
  if (mode == AlignmentMode::Minimal) return tilt;

  const double spin = canonical_spin(patch, tilt.matrix(), target);
  const Eigen::Quaterniond full =
      Eigen::Quaterniond(Eigen::AngleAxisd(spin, target)) *
      Eigen::Quaterniond(Eigen::AngleAxisd(tilt.angle, tilt.axis));
  const Eigen::AngleAxisd combined(full.normalized());
  PatchAlignment alignment;
  alignment.angle = combined.angle();
  alignment.axis = alignment.angle == 0.0 ? Vec3(Vec3::UnitX()) : Vec3(combined.axis().normalized());
  return alignment;
}

std::vector<Vec3> rotate_vectors(std::span<const Vec3> vectors, const PatchAlignment& alignment,
                                 bool inverse) {
  const Eigen::Matrix3d r = inverse ? Eigen::Matrix3d(alignment.matrix().transpose())
                                    : alignment.matrix();
  std::vector<Vec3> out;
  out.reserve(vectors.size());
  for (const Vec3& v : vectors) out.push_back(r * v);
  return out;
}

void encode_normals(std::span<const Vec3> normals, const PatchAlignment& alignment,
                    std::span<double> out) {
  if (out.size() != 3 * normals.size()) {
    throw Error(ErrorKind::LengthMismatch, "descriptor buffer has wrong length");
  }
  const Eigen::Matrix3d r = alignment.matrix();
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const Vec3 rotated = r * normals[i];
    for (int k = 0; k < 3; ++k) out[3 * i + k] = std::clamp((rotated[k] + 1.0) * 0.5, 0.0, 1.0);
  }
}

PatchDescriptor encode_descriptor(const Patch& patch, const Vec3& target, AlignmentMode mode) {
  PatchDescriptor descriptor;
  descriptor.center_face = patch.center_face;
  descriptor.alignment = compute_alignment(patch, target, mode);
  descriptor.values.resize(static_cast<Eigen::Index>(3 * patch.normals.size()));
  encode_normals(patch.normals, descriptor.alignment,
                 std::span<double>(descriptor.values.data(), descriptor.values.size()));
  return descriptor;
}

Vec3 decode_center_normal(std::span<const double> output, const PatchAlignment& alignment) {
  if (output.size() < 3) throw Error(ErrorKind::LengthMismatch, "output shorter than one normal");
  const Vec3 mapped(2.0 * output[0] - 1.0, 2.0 * output[1] - 1.0, 2.0 * output[2] - 1.0);
  const double norm = mapped.norm();
  if (!(norm > 1e-12)) throw Error(ErrorKind::ZeroVector, "decoded centre normal is zero");
  return alignment.matrix().transpose() * (mapped / norm);
}

}  // namespace mdn
