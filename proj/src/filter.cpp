#include "mdn/filter.hpp"

#include <cmath>
#include <string>

#include "mdn/error.hpp"
#include "mdn/patch.hpp"
#include "mdn/thread_pool.hpp"

namespace mdn {

namespace {

constexpr std::size_t kGrain = 512;

void check_normals(const Mesh& mesh, std::span<const Vec3> normals) {
  if (normals.size() != mesh.face_count()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(normals.size()) + " normals for " +
                                               std::to_string(mesh.face_count()) + " faces");
  }
}

}  // namespace

double sigma1_estimate(const Mesh& mesh, std::size_t face, std::span<const std::int32_t> neighbors,
                       Sigma1Mode mode) {
  if (neighbors.empty()) {
    throw Error(ErrorKind::EmptyNeighborhood, "face " + std::to_string(face) + " has no neighbours");
  }
  const auto& c = mesh.face_centroids();
  double total = 0.0;
  for (std::int32_t j : neighbors) {
    const double d2 = (c[face] - c[j]).squaredNorm();
    total += mode == Sigma1Mode::MeanSquaredDistance ? d2 : std::sqrt(d2);
  }
  return total / static_cast<double>(neighbors.size());
}

double sigma1_estimate(const Mesh& mesh, const Adjacency& adj, std::size_t face, Sigma1Mode mode) {
  if (face >= mesh.face_count()) throw Error(ErrorKind::IndexOutOfRange, "face " + std::to_string(face));
  return sigma1_estimate(mesh, face, adj.face_to_faces[face], mode);
}

std::vector<Vec3> bilateral_filter(const Mesh& mesh, const Adjacency& adj, std::span<const Vec3> normals,
                                   const BilateralConfig& cfg, ThreadPool* pool) {
  check_normals(mesh, normals);
  if (!(cfg.sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma2 must be > 0");
  std::vector<Vec3> current(normals.begin(), normals.end());
  if (cfg.iterations <= 0) return current;

  const std::size_t nf = mesh.face_count();
  // Neighbourhoods and sigma1 depend only on the fixed geometry.
  std::vector<std::vector<std::int32_t>> members(nf);
  std::vector<double> sigma1(nf, 0.0);
  parallel_for(pool, 0, nf, kGrain, [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      if (mesh.is_degenerate(f)) continue;
      collect_patch_members(mesh, adj, f, cfg.patch_size, members[f]);
      if (!members[f].empty()) sigma1[f] = sigma1_estimate(mesh, f, members[f], cfg.sigma1_mode);
    }
  });

  const auto& centroids = mesh.face_centroids();
  const auto& areas = mesh.face_areas();
  const double inv_2s2 = 1.0 / (2.0 * cfg.sigma2 * cfg.sigma2);
  std::vector<Vec3> next(nf);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    parallel_for(pool, 0, nf, kGrain, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (mesh.is_degenerate(i) || members[i].empty()) {
          next[i] = current[i];
          continue;
        }
        const double s1 = sigma1[i];
        const double inv_2s1 = s1 > 0.0 ? 1.0 / (2.0 * s1 * s1) : 0.0;
        Vec3 sum = areas[i] * current[i];
        double weight_total = areas[i];
        for (std::int32_t j : members[i]) {
          const double w1 = s1 > 0.0 ? std::exp(-(centroids[i] - centroids[j]).squaredNorm() * inv_2s1) : 0.0;
          const double w2 = std::exp(-(current[i] - current[j]).squaredNorm() * inv_2s2);
          const double w = areas[j] * w1 * w2;
          sum += w * current[j];
          weight_total += w;
        }
        const double norm = sum.norm();
        if (!(norm > 1e-12 * weight_total)) {
          throw Error(ErrorKind::ZeroAccumulator, "bilateral sum vanished at face " + std::to_string(i));
        }
        next[i] = sum / norm;
      }
    });
    std::swap(current, next);
  }
  return current;
}

Mesh update_vertices(const Mesh& mesh, const Adjacency& adj, std::span<const Vec3> normals,
                     const VertexUpdateConfig& cfg, ThreadPool* pool) {
  check_normals(mesh, normals);
  const std::size_t nv = mesh.vertex_count();
  if (!cfg.skip_isolated) {
    for (std::size_t v = 0; v < nv; ++v) {
      if (adj.vertex_to_faces[v].empty()) {
        throw Error(ErrorKind::IsolatedVertex, "vertex " + std::to_string(v) + " has no incident face");
      }
    }
  }
  if (cfg.iterations <= 0) return mesh;

  std::vector<Vec3> positions = mesh.vertices();
  std::vector<Vec3> next(nv);
  std::vector<Vec3> centroids(mesh.face_count());
  const auto& faces = mesh.faces();
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    parallel_for(pool, 0, faces.size(), kGrain, [&](std::size_t begin, std::size_t end) {
      for (std::size_t f = begin; f < end; ++f) {
        const Face& t = faces[f];
        centroids[f] = (positions[t[0]] + positions[t[1]] + positions[t[2]]) / 3.0;
      }
    });
    parallel_for(pool, 0, nv, kGrain, [&](std::size_t begin, std::size_t end) {
      for (std::size_t v = begin; v < end; ++v) {
        const auto ring = adj.vertex_to_faces[v];
        if (ring.empty()) {
          next[v] = positions[v];
          continue;
        }
        Vec3 delta = Vec3::Zero();
        for (std::int32_t f : ring) {
          const Vec3& n = normals[f];
          delta += n * n.dot(centroids[f] - positions[v]);
        }
        next[v] = positions[v] + delta / static_cast<double>(ring.size());
      }
    });
    std::swap(positions, next);
  }
  return mesh.with_vertices(std::move(positions));
}

}  // namespace mdn
