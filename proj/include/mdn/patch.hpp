#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mdn/mesh.hpp"

namespace mdn {

// A face plus its n nearest topological neighbours. Index 0 of normals,
// areas and centroids is the centre face; index k+1 is member_faces[k].
// Members are sorted by centroid distance to the centre (ties: lower index).
struct Patch {
  std::int32_t center_face = -1;
  std::vector<std::int32_t> member_faces;
  std::vector<Vec3> normals;
  std::vector<double> areas;
  std::vector<Vec3> centroids;

  std::size_t size() const noexcept { return member_faces.size(); }
};

// Rotation taking a patch's area-weighted mean normal onto the target.
struct PatchAlignment {
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;  // radians, [0, pi]

  Eigen::Matrix3d matrix() const;
};

// Minimal: the shortest-arc rotation from the mean normal to a_c. The
// residual spin about a_c then depends on the patch's global orientation.
// Canonical: additionally spins about a_c so the in-plane direction from the
// centre centroid to the nearest member centroid maps onto a fixed reference
// axis, which makes the descriptor invariant under every rigid motion.
enum class AlignmentMode : std::uint8_t { Minimal = 0, Canonical = 1 };

struct PatchDescriptor {
  Eigen::VectorXd values;  // 3(n+1), entries in [0, 1], face-major
  PatchAlignment alignment;
  std::int32_t center_face = -1;
};

inline std::size_t descriptor_length(std::size_t n) { return 3 * (n + 1); }

// Ring-by-ring breadth-first growth over shared-vertex neighbours until at
// least n non-degenerate candidates exist, then the n nearest by centroid
// distance. Throws InsufficientNeighbors, DegenerateFace (centre face),
// IndexOutOfRange.
Patch build_patch(const Mesh& mesh, const Adjacency& adj, std::size_t face, std::size_t n);

// Same growth, but returns whatever is reachable (at most n members) instead
// of throwing. Writes member face indices into `members`.
void collect_patch_members(const Mesh& mesh, const Adjacency& adj, std::size_t face,
                           std::size_t n, std::vector<std::int32_t>& members);

// (1/N) * sum of A_i n_i over the centre and the members.
Vec3 area_weighted_mean_normal(const Patch& patch);

// Shortest-arc rotation of the unit vector `from` onto unit `to`.
// Parallel: angle 0, axis (1,0,0). Antipodal: angle pi about
// normalize(from x e), e the first of x, y axes not parallel to `from`.
PatchAlignment minimal_alignment(const Vec3& from, const Vec3& to);

// Throws DegenerateMeanNormal when the mean normal cancels out.
PatchAlignment compute_alignment(const Patch& patch, const Vec3& target,
                                 AlignmentMode mode = AlignmentMode::Canonical);

std::vector<Vec3> rotate_vectors(std::span<const Vec3> vectors, const PatchAlignment& alignment,
                                 bool inverse = false);

// Rotates the normals by `alignment`, maps each coordinate by (x+1)/2 and
// writes them face-major into `out` (length 3 * normals.size()).
void encode_normals(std::span<const Vec3> normals, const PatchAlignment& alignment,
                    std::span<double> out);

PatchDescriptor encode_descriptor(const Patch& patch, const Vec3& target,
                                  AlignmentMode mode = AlignmentMode::Canonical);

// First triple of a network output mapped back by 2u-1, normalised and
// rotated by the inverse alignment. Throws ZeroVector or LengthMismatch.
Vec3 decode_center_normal(std::span<const double> output, const PatchAlignment& alignment);

}  // namespace mdn
