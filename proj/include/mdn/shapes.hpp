#pragma once

#include "mdn/mesh.hpp"

namespace mdn::shapes {

// Unit-radius icosphere: 20 * 4^subdivisions faces.
Mesh icosphere(int subdivisions, double radius = 1.0);
// Latitude/longitude sphere with pole fans: 2 * segments * (rings - 1) faces.
Mesh uv_sphere(int rings, int segments, double radius = 1.0);
// Axis-aligned cube of side `size` centred at the origin, each side split
// into a cells x cells grid: 12 * cells^2 faces.
Mesh cube(int cells, double size = 1.0);
// Closed cylinder along z with fan caps: 2 * segments * (stacks + 1) faces.
Mesh cylinder(int segments, int stacks, double radius = 0.5, double height = 1.0);
// Torus around z: 2 * major_segments * minor_segments faces.
Mesh torus(int major_segments, int minor_segments, double major_radius = 1.0,
           double minor_radius = 0.35);
// Planar grid on z = 0 spanning [0, nx*spacing] x [0, ny*spacing]:
// 2 * nx * ny faces, normals +z.
Mesh grid(int nx, int ny, double spacing = 1.0);

}  // namespace mdn::shapes
