#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Geometry>

#include "mdn/error.hpp"
#include "mdn/mesh.hpp"
#include "mdn/rng.hpp"

namespace mdn::test {

inline constexpr double kPi = 3.14159265358979323846;

// Runs `fn` and checks that it throws mdn::Error of the given kind.
inline void expect_error(ErrorKind kind, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(kind) << ", nothing thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

inline Vec3 random_unit(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized().toRotationMatrix();
}

inline Mesh transformed(const Mesh& m, const Eigen::Matrix3d& r, const Vec3& t, double scale = 1.0) {
  std::vector<Vec3> v = m.vertices();
  for (auto& p : v) p = scale * (r * p) + t;
  return Mesh(std::move(v), m.faces());
}

inline Mesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
  return Mesh({a, b, c}, {Face{0, 1, 2}});
}

// Regular fan of `k` triangles around the origin in the z=0 plane.
inline Mesh flat_fan(int k, double radius = 1.0) {
  std::vector<Vec3> v{Vec3::Zero()};
  std::vector<Face> f;
  for (int i = 0; i < k; ++i) {
    const double a = 2.0 * kPi * i / k;
    v.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
  }
  for (int i = 0; i < k; ++i) f.push_back({0, 1 + i, 1 + (i + 1) % k});
  return Mesh(std::move(v), std::move(f));
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace mdn::test
