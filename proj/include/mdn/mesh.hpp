#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mdn {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::int32_t, 3>;

// Indexed triangle mesh with per-face and per-vertex derived geometry.
// Immutable after construction; use with_vertices() to move vertices.
class Mesh {
 public:
  Mesh() = default;

  // Throws ParseError when a face references a missing vertex or repeats an
  // index. Zero-area faces are accepted and flagged degenerate.
  Mesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  Mesh with_vertices(std::vector<Vec3> vertices) const;

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const Vec3& vertex(std::size_t v) const { return vertices_[v]; }
  const Face& face(std::size_t f) const { return faces_[f]; }

  // Cached per-face quantities. Normals of degenerate faces are zero.
  const std::vector<Vec3>& face_centroids() const noexcept { return centroids_; }
  const std::vector<Vec3>& face_normals() const noexcept { return normals_; }
  const std::vector<double>& face_areas() const noexcept { return areas_; }
  bool is_degenerate(std::size_t f) const { return degenerate_[f] != 0; }

  // Area-weighted vertex normals; zero for vertices without a usable face.
  const std::vector<Vec3>& vertex_normals() const noexcept { return vertex_normals_; }

  // 0 when the mesh has no edges.
  double mean_edge_length() const noexcept { return mean_edge_length_; }

 private:
  void compute_caches();

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> centroids_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  std::vector<std::uint8_t> degenerate_;
  std::vector<Vec3> vertex_normals_;
  double mean_edge_length_ = 0.0;
};

Vec3 face_centroid(const Mesh& mesh, std::size_t face);
// Throws DegenerateFace for a zero-area triangle.
Vec3 face_normal(const Mesh& mesh, std::size_t face);
double face_area(const Mesh& mesh, std::size_t face);
// Throws IsolatedVertex when no non-degenerate face touches the vertex.
Vec3 vertex_normal(const Mesh& mesh, std::size_t vertex);
// Mean length over unique undirected edges; throws NoEdges.
double average_edge_length(const Mesh& mesh);

// Compressed adjacency lists: row i is data[offsets[i], offsets[i+1]).
class IndexLists {
 public:
  IndexLists() = default;
  explicit IndexLists(std::vector<std::vector<std::int32_t>> rows);

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const std::int32_t> operator[](std::size_t i) const {
    return {data_.data() + offsets_[i], data_.data() + offsets_[i + 1]};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::int32_t> data_;
};

// Rows are sorted ascending without duplicates.
struct Adjacency {
  IndexLists vertex_to_faces;
  IndexLists vertex_to_vertices;
  // Faces sharing at least one vertex, excluding the face itself.
  IndexLists face_to_faces;
};

Adjacency build_adjacency(const Mesh& mesh);

}  // namespace mdn
