#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

namespace manikin {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

/// Rodrigues formula; stable for small angles.
inline Mat3 exp_so3(const Vec3& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    return Mat3::Identity() + skew(w);
  }
  const Vec3 axis = w / theta;
  return Eigen::AngleAxisd(theta, axis).toRotationMatrix();
}

/// Inverse of exp_so3. Robust near 0 and near pi.
inline Vec3 log_so3(const Mat3& r) {
  const double tr = r.trace();
  const double cos_theta = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta < 1e-10) {
    return Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)) * 0.5;
  }
  if (theta > M_PI - 1e-6) {
    // axis from the symmetric part; sign fixed by the off-diagonal terms
    Vec3 axis;
    const Mat3 s = 0.5 * (r + Mat3::Identity());
    axis.x() = std::sqrt(std::max(s(0, 0), 0.0));
    axis.y() = std::sqrt(std::max(s(1, 1), 0.0));
    axis.z() = std::sqrt(std::max(s(2, 2), 0.0));
    int k = 0;
    if (axis.y() > axis.x()) k = 1;
    if (axis.z() > axis(k)) k = 2;
    if (axis(k) < 1e-12) return Vec3::Zero();
    if (k == 0) {
      axis.y() = std::copysign(axis.y(), r(0, 1));
      axis.z() = std::copysign(axis.z(), r(0, 2));
    } else if (k == 1) {
      axis.x() = std::copysign(axis.x(), r(0, 1));
      axis.z() = std::copysign(axis.z(), r(1, 2));
    } else {
      axis.x() = std::copysign(axis.x(), r(0, 2));
      axis.y() = std::copysign(axis.y(), r(1, 2));
    }
    axis.normalize();
    return theta * axis;
  }
  const double scale = theta / (2.0 * std::sin(theta));
  return scale * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
}

/// Rigid transform, rotation then translation: p' = R p + t.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform Identity() { return Transform{}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Transform operator*(const Transform& other) const {
    return Transform{rotation * other.rotation,
                     rotation * other.translation + translation};
  }

  Transform inverse() const {
    Mat3 rt = rotation.transpose();
    return Transform{rt, -(rt * translation)};
  }
};

/// Max abs entry of R^T R - I; zero for a perfect rotation.
inline double orthonormality_error(const Mat3& r) {
  return ((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace manikin
