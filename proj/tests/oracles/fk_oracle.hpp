// Standalone forward kinematics: 4x4 homogeneous transforms composed as plain
// arrays. Shares no code with the library beyond the joint description.
#pragma once

#include <array>
#include <cmath>

namespace oracle {

using Mat4 = std::array<double, 16>;  // row-major
using Vec3 = std::array<double, 3>;

inline Mat4 identity() {
  Mat4 m{};
  m[0] = m[5] = m[10] = m[15] = 1.0;
  return m;
}

inline Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k)
      for (int col = 0; col < 4; ++col) c[r * 4 + col] += a[r * 4 + k] * b[k * 4 + col];
  return c;
}

// Rodrigues: R = I + sin(a) K + (1 - cos(a)) K^2 for unit axis u.
inline Mat4 rotation(const Vec3& u, double angle) {
  const double s = std::sin(angle), c = std::cos(angle), v = 1.0 - c;
  const double x = u[0], y = u[1], z = u[2];
  Mat4 m = identity();
  m[0] = c + x * x * v;
  m[1] = x * y * v - z * s;
  m[2] = x * z * v + y * s;
  m[4] = y * x * v + z * s;
  m[5] = c + y * y * v;
  m[6] = y * z * v - x * s;
  m[8] = z * x * v - y * s;
  m[9] = z * y * v + x * s;
  m[10] = c + z * z * v;
  return m;
}

inline Mat4 translation(const Vec3& t) {
  Mat4 m = identity();
  m[3] = t[0];
  m[7] = t[1];
  m[11] = t[2];
  return m;
}

struct Joint {
  Vec3 axis;
  Vec3 offset;
};

struct Result {
  Vec3 position;
  Vec3 facing;
};

// Base -> rotate about joint axis -> translate by offset, six times, then the head offset.
inline Result head_pose(const std::array<Joint, 6>& joints, const Vec3& head_offset, const Vec3& forward,
                        const std::array<double, 6>& q) {
  Mat4 t = identity();
  for (int i = 0; i < 6; ++i) t = multiply(multiply(t, rotation(joints[i].axis, q[i])), translation(joints[i].offset));
  t = multiply(t, translation(head_offset));
  Result r;
  r.position = {t[3], t[7], t[11]};
  for (int i = 0; i < 3; ++i) r.facing[i] = t[i * 4 + 0] * forward[0] + t[i * 4 + 1] * forward[1] + t[i * 4 + 2] * forward[2];
  return r;
}

}  // namespace oracle
