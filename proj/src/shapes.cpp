#include "mdn/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "mdn/error.hpp"

namespace mdn::shapes {

namespace {

using std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

Face tri(int a, int b, int c) { return {a, b, c}; }

}  // namespace

Mesh icosphere(int subdivisions, double radius) {
  require(subdivisions >= 0, "icosphere subdivisions must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> vertices = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& v : vertices) v.normalize();
  std::vector<Face> faces = {
      tri(0, 11, 5), tri(0, 5, 1),  tri(0, 1, 7),   tri(0, 7, 10), tri(0, 10, 11),
      tri(1, 5, 9),  tri(5, 11, 4), tri(11, 10, 2), tri(10, 7, 6), tri(7, 1, 8),
      tri(3, 9, 4),  tri(3, 4, 2),  tri(3, 2, 6),   tri(3, 6, 8),  tri(3, 8, 9),
      tri(4, 9, 5),  tri(2, 4, 11), tri(6, 2, 10),  tri(8, 6, 7),  tri(9, 8, 1),
  };
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      vertices.push_back((vertices[a] + vertices[b]).normalized());
      const int index = static_cast<int>(vertices.size()) - 1;
      midpoints.emplace(key, index);
      return index;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back(tri(f[0], ab, ca));
      next.push_back(tri(f[1], bc, ab));
      next.push_back(tri(f[2], ca, bc));
      next.push_back(tri(ab, bc, ca));
    }
    faces = std::move(next);
  }
  for (Vec3& v : vertices) v *= radius;
  return Mesh(std::move(vertices), std::move(faces));
}

Mesh uv_sphere(int rings, int segments, double radius) {
  require(rings >= 2 && segments >= 3, "uv_sphere needs rings >= 2 and segments >= 3");
  std::vector<Vec3> vertices;
  vertices.emplace_back(0, 0, radius);
  for (int r = 1; r < rings; ++r) {
    const double theta = pi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * pi * s / segments;
      vertices.emplace_back(radius * std::sin(theta) * std::cos(phi),
                            radius * std::sin(theta) * std::sin(phi), radius * std::cos(theta));
    }
  }
  vertices.emplace_back(0, 0, -radius);
  const int south = static_cast<int>(vertices.size()) - 1;
  auto ring_vertex = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };

  std::vector<Face> faces;
  for (int s = 0; s < segments; ++s) faces.push_back(tri(0, ring_vertex(1, s), ring_vertex(1, s + 1)));
  for (int r = 1; r < rings - 1; ++r) {
    for (int s = 0; s < segments; ++s) {
      const int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      const int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      faces.push_back(tri(a, c, d));
      faces.push_back(tri(a, d, b));
    }
  }
  for (int s = 0; s < segments; ++s) {
    faces.push_back(tri(south, ring_vertex(rings - 1, s + 1), ring_vertex(rings - 1, s)));
  }
  return Mesh(std::move(vertices), std::move(faces));
}

Mesh cube(int cells, double size) {
  require(cells >= 1, "cube needs cells >= 1");
  std::vector<Vec3> vertices;
  std::map<std::array<int, 3>, int> lattice;
  auto vertex_at = [&](std::array<int, 3> key) {
    if (auto it = lattice.find(key); it != lattice.end()) return it->second;
    const Vec3 p = Vec3(key[0], key[1], key[2]) * (size / cells) - Vec3::Constant(size / 2);
    vertices.push_back(p);
    const int index = static_cast<int>(vertices.size()) - 1;
    lattice.emplace(key, index);
    return index;
  };

  std::vector<Face> faces;
  // For each of the 6 sides: fixed axis, fixed value, and an (u, v) frame
  // whose cross product points outward.
  for (int axis = 0; axis < 3; ++axis) {
    const int u_axis = (axis + 1) % 3;
    const int v_axis = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      const int fixed = side == 0 ? 0 : cells;
      for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
          auto at = [&](int du, int dv) {
            std::array<int, 3> key{};
            key[axis] = fixed;
            key[u_axis] = i + du;
            key[v_axis] = j + dv;
            return vertex_at(key);
          };
          const int a = at(0, 0), b = at(1, 0), c = at(1, 1), d = at(0, 1);
          if (side == 1) {
            faces.push_back(tri(a, b, c));
            faces.push_back(tri(a, c, d));
          } else {
            faces.push_back(tri(a, c, b));
            faces.push_back(tri(a, d, c));
          }
        }
      }
    }
  }
  return Mesh(std::move(vertices), std::move(faces));
}

Mesh cylinder(int segments, int stacks, double radius, double height) {
  require(segments >= 3 && stacks >= 1, "cylinder needs segments >= 3 and stacks >= 1");
  std::vector<Vec3> vertices;
  for (int k = 0; k <= stacks; ++k) {
    const double z = -height / 2 + height * k / stacks;
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * pi * s / segments;
      vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
    }
  }
  const int bottom = static_cast<int>(vertices.size());
  vertices.emplace_back(0, 0, -height / 2);
  const int top = bottom + 1;
  vertices.emplace_back(0, 0, height / 2);
  auto at = [&](int k, int s) { return k * segments + (s % segments); };

  std::vector<Face> faces;
  for (int k = 0; k < stacks; ++k) {
    for (int s = 0; s < segments; ++s) {
      const int a = at(k, s), b = at(k, s + 1), c = at(k + 1, s + 1), d = at(k + 1, s);
      faces.push_back(tri(a, b, c));
      faces.push_back(tri(a, c, d));
    }
  }
  for (int s = 0; s < segments; ++s) {
    faces.push_back(tri(bottom, at(0, s + 1), at(0, s)));
    faces.push_back(tri(top, at(stacks, s), at(stacks, s + 1)));
  }
  return Mesh(std::move(vertices), std::move(faces));
}

Mesh torus(int major_segments, int minor_segments, double major_radius, double minor_radius) {
  require(major_segments >= 3 && minor_segments >= 3, "torus needs >= 3 segments per direction");
  std::vector<Vec3> vertices;
  for (int i = 0; i < major_segments; ++i) {
    const double u = 2.0 * pi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double v = 2.0 * pi * j / minor_segments;
      const double r = major_radius + minor_radius * std::cos(v);
      vertices.emplace_back(r * std::cos(u), r * std::sin(u), minor_radius * std::sin(v));
    }
  }
  auto at = [&](int i, int j) {
    return (i % major_segments) * minor_segments + (j % minor_segments);
  };
  std::vector<Face> faces;
  for (int i = 0; i < major_segments; ++i) {
    for (int j = 0; j < minor_segments; ++j) {
      const int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
      faces.push_back(tri(a, b, c));
      faces.push_back(tri(a, c, d));
    }
  }
  return Mesh(std::move(vertices), std::move(faces));
}

Mesh grid(int nx, int ny, double spacing) {
  require(nx >= 1 && ny >= 1, "grid needs nx, ny >= 1");
  std::vector<Vec3> vertices;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) vertices.emplace_back(i * spacing, j * spacing, 0.0);
  }
  auto at = [&](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Face> faces;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      faces.push_back(tri(at(i, j), at(i + 1, j), at(i + 1, j + 1)));
      faces.push_back(tri(at(i, j), at(i + 1, j + 1), at(i, j + 1)));
    }
  }
  return Mesh(std::move(vertices), std::move(faces));
}

}  // namespace mdn::shapes
