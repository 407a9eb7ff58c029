#include "mdn/bvh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mdn/error.hpp"

namespace mdn {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }

  const double denom = va + vb + vc;
  if (!(denom > 0.0)) {
    // Zero-area triangle: nearest point over its three edges.
    auto on_segment = [&](const Vec3& s, const Vec3& e) {
      const Vec3 d = e - s;
      const double len2 = d.squaredNorm();
      const double t = len2 > 0.0 ? std::clamp((p - s).dot(d) / len2, 0.0, 1.0) : 0.0;
      return Vec3(s + t * d);
    };
    Vec3 best = on_segment(a, b);
    for (const Vec3& q : {on_segment(b, c), on_segment(c, a)}) {
      if ((q - p).squaredNorm() < (best - p).squaredNorm()) best = q;
    }
    return best;
  }
  const double v = vb / denom;
  const double w = vc / denom;
  return a + v * ab + w * ac;
}

ClosestPoint closest_point_brute_force(const Mesh& mesh, const Vec3& p) {
  ClosestPoint best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& t = mesh.face(f);
    const Vec3 q = closest_point_on_triangle(p, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    const double d = (q - p).squaredNorm();
    if (d < best.squared_distance) best = {q, d, static_cast<std::int32_t>(f)};
  }
  return best;
}

TriangleBvh::TriangleBvh(const Mesh& mesh, std::size_t leaf_size)
    : mesh_(&mesh), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (mesh.face_count() == 0) throw Error(ErrorKind::EmptyMesh, "cannot build a tree without faces");
  order_.resize(mesh.face_count());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * mesh.face_count() / leaf_size_ + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t TriangleBvh::build(std::uint32_t first, std::uint32_t count) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centroid_box;
  const auto& centroids = mesh_->face_centroids();
  for (std::uint32_t i = first; i < first + count; ++i) {
    for (std::int32_t v : mesh_->face(order_[i])) box.extend(mesh_->vertex(v));
    centroid_box.extend(centroids[order_[i]]);
  }
  nodes_[index].box = box;
  nodes_[index].first = first;
  nodes_[index].count = count;
  if (count <= leaf_size_) return index;

  int axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  const std::uint32_t half = count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + first + half, order_.begin() + first + count,
                   [&](std::int32_t x, std::int32_t y) {
                     const double cx = centroids[x][axis];
                     const double cy = centroids[y][axis];
                     return cx < cy || (cx == cy && x < y);
                   });
  const std::int32_t left = build(first, half);
  const std::int32_t right = build(first + half, count - half);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

ClosestPoint TriangleBvh::closest(const Vec3& p) const {
  ClosestPoint best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squaredExteriorDistance(p) >= best.squared_distance) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const Face& t = mesh_->face(order_[i]);
        const Vec3 q = closest_point_on_triangle(p, mesh_->vertex(t[0]), mesh_->vertex(t[1]), mesh_->vertex(t[2]));
        const double d = (q - p).squaredNorm();
        if (d < best.squared_distance || (d == best.squared_distance && order_[i] < best.face)) {
          best = {q, d, order_[i]};
        }
      }
      continue;
    }
    const std::int32_t a = node.left;
    const std::int32_t b = node.right;
    const double da = nodes_[a].box.squaredExteriorDistance(p);
    const double db = nodes_[b].box.squaredExteriorDistance(p);
    // Push the farther child first so the nearer one is searched first.
    if (da <= db) {
      stack[top++] = b;
      stack[top++] = a;
    } else {
      stack[top++] = a;
      stack[top++] = b;
    }
  }
  return best;
}

}  // namespace mdn
