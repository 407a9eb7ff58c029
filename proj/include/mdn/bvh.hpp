#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Geometry>

#include "mdn/mesh.hpp"

namespace mdn {

// Exact closest point on triangle (a, b, c) by Voronoi-region tests.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  double squared_distance = 0.0;
  std::int32_t face = -1;
};

// Axis-aligned bounding-box tree over the faces of a mesh. Holds a
// reference to the mesh, which must outlive it.
class TriangleBvh {
 public:
  explicit TriangleBvh(const Mesh& mesh, std::size_t leaf_size = 4);

  ClosestPoint closest(const Vec3& p) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    std::int32_t left = -1;  // -1 for leaves
    std::int32_t right = -1;
    std::uint32_t first = 0;
    std::uint32_t count = 0;
  };

  std::int32_t build(std::uint32_t first, std::uint32_t count);

  const Mesh* mesh_;
  std::size_t leaf_size_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
};

// Exhaustive search over all faces.
ClosestPoint closest_point_brute_force(const Mesh& mesh, const Vec3& p);

}  // namespace mdn
