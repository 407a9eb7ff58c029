#include "mdn/mesh.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "mdn/error.hpp"

namespace mdn {

namespace {

// Relative threshold below which a cross product counts as zero.
constexpr double kDegenerateRelTol = 1e-14;

void check_face_index(const Mesh& mesh, std::size_t face) {
  if (face >= mesh.face_count()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "face " + std::to_string(face) + " of " + std::to_string(mesh.face_count()));
  }
}

Vec3 cross_of(const Mesh& mesh, std::size_t face) {
  const Face& f = mesh.face(face);
  const Vec3& a = mesh.vertex(f[0]);
  return (mesh.vertex(f[1]) - a).cross(mesh.vertex(f[2]) - a);
}

bool cross_is_degenerate(const Mesh& mesh, std::size_t face, const Vec3& cross) {
  const Face& f = mesh.face(face);
  const Vec3& a = mesh.vertex(f[0]);
  const Vec3& b = mesh.vertex(f[1]);
  const Vec3& c = mesh.vertex(f[2]);
  const double scale =
      std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (c - b).squaredNorm()});
  return !(cross.norm() > kDegenerateRelTol * scale);
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonTriangular: return "NonTriangular";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DegenerateFace: return "DegenerateFace";
    case ErrorKind::IsolatedVertex: return "IsolatedVertex";
    case ErrorKind::NoEdges: return "NoEdges";
    case ErrorKind::InsufficientNeighbors: return "InsufficientNeighbors";
    case ErrorKind::DegenerateMeanNormal: return "DegenerateMeanNormal";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorKind::ZeroAccumulator: return "ZeroAccumulator";
    case ErrorKind::EmptyMesh: return "EmptyMesh";
    case ErrorKind::ConnectivityMismatch: return "ConnectivityMismatch";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::CorruptModel: return "CorruptModel";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const auto n = static_cast<std::int64_t>(vertices_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& face = faces_[f];
    for (std::int32_t v : face) {
      if (v < 0 || v >= n) {
        throw Error(ErrorKind::ParseError, "face " + std::to_string(f) + " references vertex " +
                                               std::to_string(v) + " of " + std::to_string(n));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw Error(ErrorKind::ParseError, "face " + std::to_string(f) + " repeats a vertex index");
    }
  }
  compute_caches();
}

Mesh Mesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) {
    throw Error(ErrorKind::LengthMismatch, "vertex count changed");
  }
  Mesh out;
  out.vertices_ = std::move(vertices);
  out.faces_ = faces_;
  out.compute_caches();
  return out;
}

void Mesh::compute_caches() {
  const std::size_t nf = faces_.size();
  centroids_.assign(nf, Vec3::Zero());
  normals_.assign(nf, Vec3::Zero());
  areas_.assign(nf, 0.0);
  degenerate_.assign(nf, 0);
  vertex_normals_.assign(vertices_.size(), Vec3::Zero());

  for (std::size_t f = 0; f < nf; ++f) {
    const Face& face = faces_[f];
    centroids_[f] = (vertices_[face[0]] + vertices_[face[1]] + vertices_[face[2]]) / 3.0;
    const Vec3 cross = cross_of(*this, f);
    const double norm = cross.norm();
    areas_[f] = 0.5 * norm;
    if (cross_is_degenerate(*this, f, cross)) {
      degenerate_[f] = 1;
      continue;
    }
    normals_[f] = cross / norm;
    for (std::int32_t v : face) vertex_normals_[v] += cross;
  }
  for (Vec3& n : vertex_normals_) {
    const double norm = n.norm();
    n = norm > 0.0 ? Vec3(n / norm) : Vec3::Zero();
  }

  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  edges.reserve(3 * nf);
  for (const Face& face : faces_) {
    for (int k = 0; k < 3; ++k) {
      std::int32_t a = face[k];
      std::int32_t b = face[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  double total = 0.0;
  for (const auto& [a, b] : edges) total += (vertices_[a] - vertices_[b]).norm();
  mean_edge_length_ = edges.empty() ? 0.0 : total / static_cast<double>(edges.size());
}

Vec3 face_centroid(const Mesh& mesh, std::size_t face) {
  check_face_index(mesh, face);
  return mesh.face_centroids()[face];
}

Vec3 face_normal(const Mesh& mesh, std::size_t face) {
  check_face_index(mesh, face);
  if (mesh.is_degenerate(face)) {
    throw Error(ErrorKind::DegenerateFace, "face " + std::to_string(face) + " has zero area");
  }
  return mesh.face_normals()[face];
}

double face_area(const Mesh& mesh, std::size_t face) {
  check_face_index(mesh, face);
  return mesh.face_areas()[face];
}

Vec3 vertex_normal(const Mesh& mesh, std::size_t vertex) {
  if (vertex >= mesh.vertex_count()) {
    throw Error(ErrorKind::IndexOutOfRange, "vertex " + std::to_string(vertex));
  }
  const Vec3& n = mesh.vertex_normals()[vertex];
  if (n.isZero(0.0)) {
    throw Error(ErrorKind::IsolatedVertex,
                "vertex " + std::to_string(vertex) + " has no incident non-degenerate face");
  }
  return n;
}

double average_edge_length(const Mesh& mesh) {
  if (mesh.face_count() == 0) throw Error(ErrorKind::NoEdges, "mesh has no faces");
  return mesh.mean_edge_length();
}

IndexLists::IndexLists(std::vector<std::vector<std::int32_t>> rows) {
  offsets_.reserve(rows.size() + 1);
  offsets_.push_back(0);
  std::size_t total = 0;
  for (const auto& row : rows) total += row.size();
  data_.reserve(total);
  for (const auto& row : rows) {
    data_.insert(data_.end(), row.begin(), row.end());
    offsets_.push_back(data_.size());
  }
}

Adjacency build_adjacency(const Mesh& mesh) {
  const std::size_t nv = mesh.vertex_count();
  const std::size_t nf = mesh.face_count();

  std::vector<std::vector<std::int32_t>> v2f(nv);
  std::vector<std::vector<std::int32_t>> v2v(nv);
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& face = mesh.face(f);
    for (int k = 0; k < 3; ++k) {
      v2f[face[k]].push_back(static_cast<std::int32_t>(f));
      v2v[face[k]].push_back(face[(k + 1) % 3]);
      v2v[face[k]].push_back(face[(k + 2) % 3]);
    }
  }
  for (auto& row : v2v) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  std::vector<std::vector<std::int32_t>> f2f(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto& row = f2f[f];
    for (std::int32_t v : mesh.face(f)) {
      for (std::int32_t g : v2f[v]) {
        if (static_cast<std::size_t>(g) != f) row.push_back(g);
      }
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  Adjacency adj;
  adj.vertex_to_faces = IndexLists(std::move(v2f));
  adj.vertex_to_vertices = IndexLists(std::move(v2v));
  adj.face_to_faces = IndexLists(std::move(f2f));
  return adj;
}

}  // namespace mdn
