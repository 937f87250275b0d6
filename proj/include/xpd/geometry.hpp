#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "xpd/core.hpp"

namespace xpd {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using ProjMatrix = Eigen::Matrix<double, 3, 4>;
using ProjMatrixInv = Eigen::Matrix<double, 4, 3>;

/// Full cone-beam system description. Distances in mm, principal point in
/// detector pixels, orientation angles in radians. The world frame has the
/// isocenter at the origin; at a 0 deg view the detector columns run along +x,
/// rows along +y, and depth increases along +z toward the detector.
struct Geometry {
  double d_sd = 1200.0;  ///< source-to-detector distance
  double d_si = 750.0;   ///< source-to-isocenter distance
  int det_nu = 512;
  int det_nv = 512;
  double s_u = 1.0;  ///< detector pixel spacing, mm/px
  double s_v = 1.0;
  double p_u = 256.0;  ///< principal point, px
  double p_v = 256.0;
  double theta_x = 0.0;
  double theta_y = 0.0;
  double theta_z = 0.0;

  /// Pixel spacing of the virtual detector placed at the isocenter.
  double virtual_spacing_u() const { return s_u * d_si / d_sd; }
  double virtual_spacing_v() const { return s_v * d_si / d_sd; }

  // d_sd == d_si is allowed: it describes a system whose detector already sits
  // at the isocenter, which is exactly what virtual_detector() returns.
  void validate() const
  {
    require(std::isfinite(d_sd) && std::isfinite(d_si) && d_si > 0.0 && d_sd >= d_si,
            ErrorCode::invalid_geometry, "need d_sd >= d_si > 0");
    require(det_nu > 0 && det_nv > 0, ErrorCode::invalid_geometry, "detector dims must be positive");
    require(s_u > 0.0 && s_v > 0.0, ErrorCode::invalid_geometry, "pixel spacing must be positive");
    require(p_u >= 0.0 && p_u < det_nu && p_v >= 0.0 && p_v < det_nv,
            ErrorCode::invalid_geometry, "principal point outside detector");
    require(std::isfinite(theta_x) && std::isfinite(theta_y) && std::isfinite(theta_z),
            ErrorCode::invalid_geometry, "orientation angles must be finite");
  }
};

/// 3D line as point + unit direction.
struct Line3 {
  Vec3 point;
  Vec3 dir;
};

/// Homogeneous 2D line coefficients (l0*u + l1*v + l2 = 0), unit-normalized.
using Line2 = Vec3;

namespace detail {
// Homogeneous coordinate treated as at-infinity below this absolute value.
inline constexpr double kHomogeneousTol = 1e-12;
// Relative singular-value cutoff for pseudo-inverse / rank decisions.
inline constexpr double kRankTol = 1e-10;
}  // namespace detail

/// Intrinsic matrix K of the physical detector.
inline Mat3 intrinsics(const Geometry& g)
{
  g.validate();
  Mat3 k = Mat3::Identity();
  k(0, 0) = g.d_sd / g.s_u;
  k(1, 1) = g.d_sd / g.s_v;
  k(0, 2) = g.p_u;
  k(1, 2) = g.p_v;
  return k;
}

/// Rebins the detector to the isocenter: spacing shrinks by d_si/d_sd and the
/// detector distance becomes d_si. The projection matrix is unchanged.
inline Geometry virtual_detector(const Geometry& g)
{
  g.validate();
  Geometry out = g;
  out.s_u = g.virtual_spacing_u();
  out.s_v = g.virtual_spacing_v();
  out.d_sd = g.d_si;
  return out;
}

// Orientation matrices mapping world to camera coordinates. A positive angle
// turns the camera, so these are the transposes of the usual world rotations.
inline Mat3 rotation_x(double t)
{
  const double c = std::cos(t), s = std::sin(t);
  Mat3 r;
  r << 1, 0, 0,
       0, c, s,
       0, -s, c;
  return r;
}

inline Mat3 rotation_y(double t)
{
  const double c = std::cos(t), s = std::sin(t);
  Mat3 r;
  r << c, 0, -s,
       0, 1, 0,
       s, 0, c;
  return r;
}

inline Mat3 rotation_z(double t)
{
  const double c = std::cos(t), s = std::sin(t);
  Mat3 r;
  r << c, s, 0,
       -s, c, 0,
       0, 0, 1;
  return r;
}

/// World-to-camera rotation for the given orientation angles,
/// composed as R = Rz * Rx * Ry.
inline Mat3 rotation_matrix(double theta_x, double theta_y, double theta_z)
{
  return rotation_z(theta_z) * rotation_x(theta_x) * rotation_y(theta_y);
}

/// Perspective projection matrix onto the virtual detector for the given view
/// angle (radians, about the y axis). The translation is [0, 0, d_si].
inline ProjMatrix compose_perspective(const Geometry& g, double view_angle = 0.0)
{
  g.validate();
  const double su = g.virtual_spacing_u();
  const double sv = g.virtual_spacing_v();
  Mat3 k = Mat3::Identity();
  k(0, 0) = g.d_si / su;
  k(1, 1) = g.d_si / sv;
  k(0, 2) = g.p_u;
  k(1, 2) = g.p_v;
  const Mat3 r = rotation_matrix(g.theta_x, g.theta_y + view_angle, g.theta_z);
  ProjMatrix p;
  p.leftCols<3>() = k * r;
  p.col(3) = k * Vec3(0.0, 0.0, g.d_si);
  return p;
}

/// Orthogonal (parallel-beam) projection matrix onto the same virtual
/// detector. Built from the first two rows of R; depth does not enter.
inline ProjMatrix compose_orthogonal(const Geometry& g, double view_angle = 0.0)
{
  g.validate();
  const double su = g.virtual_spacing_u();
  const double sv = g.virtual_spacing_v();
  const Mat3 r = rotation_matrix(g.theta_x, g.theta_y + view_angle, g.theta_z);
  ProjMatrix p = ProjMatrix::Zero();
  p.block<1, 3>(0, 0) = r.row(0) / su;
  p.block<1, 3>(1, 0) = r.row(1) / sv;
  p(0, 3) = g.p_u;
  p(1, 3) = g.p_v;
  p(2, 3) = 1.0;
  return p;
}

/// Applies a projection matrix and dehomogenizes to detector pixels.
inline Vec2 project(const ProjMatrix& p, const Vec4& point)
{
  const Vec3 q = p * point;
  require(std::abs(q.z()) > detail::kHomogeneousTol, ErrorCode::point_at_infinity,
          "projected point lies in the source plane");
  return Vec2(q.x() / q.z(), q.y() / q.z());
}

/// Depth-dependent magnification m = d_si / (d_si + z) on the virtual detector.
inline double magnification(double z, double d_si)
{
  require(std::abs(z) < d_si, ErrorCode::depth_out_of_range, "|z| must be below d_si");
  return d_si / (d_si + z);
}

/// Magnification seen from the complementary (180 deg) view, m' = d_si / (d_si - z).
/// Together: 1/m + 1/m' = 2.
inline double magnification_complementary(double z, double d_si)
{
  require(std::abs(z) < d_si, ErrorCode::depth_out_of_range, "|z| must be below d_si");
  return d_si / (d_si - z);
}

namespace detail {
inline Vec3 dehomogenize3(const Vec4& a)
{
  require(std::abs(a.w()) > kHomogeneousTol, ErrorCode::point_at_infinity,
          "point at infinity");
  return a.head<3>() / a.w();
}

// Euclidean distance in mm between two pixel positions on the virtual detector.
inline double pixel_distance_mm(const Vec2& a, const Vec2& b, const Geometry& g)
{
  const double du = (a.x() - b.x()) * g.virtual_spacing_u();
  const double dv = (a.y() - b.y()) * g.virtual_spacing_v();
  return std::hypot(du, dv);
}
}  // namespace detail

/// Perspective deformation of a world point: the mm distance on the virtual
/// detector between its perspective and orthogonal projections,
/// d_PD = |m - 1| * sqrt(x^2 + y^2).
inline double d_pd(const Vec4& a, const Geometry& g)
{
  g.validate();
  const Vec3 w = detail::dehomogenize3(a);
  const double m = magnification(w.z(), g.d_si);
  return std::abs(m - 1.0) * std::hypot(w.x(), w.y());
}

/// Point-to-point distance in mm between the projections seen from the 0 deg
/// and 90 deg views, evaluated on their shared pixel coordinates.
inline double d_90(const Vec4& a, const Geometry& g)
{
  g.validate();
  const Vec3 w = detail::dehomogenize3(a);
  require(std::abs(w.z()) < g.d_si, ErrorCode::depth_out_of_range, "|z| must be below d_si");
  require(std::abs(w.x()) < g.d_si, ErrorCode::depth_out_of_range,
          "|x| must be below d_si for the 90 deg view");
  const Vec2 a0 = project(compose_perspective(g, 0.0), a);
  const Vec2 a90 = project(compose_perspective(g, M_PI / 2.0), a);
  return detail::pixel_distance_mm(a90, a0, g);
}

/// Mirrors a detector point about the principal-point column: u -> 2 p_u - u.
inline Vec2 flip_complementary_point(const Vec2& p, double p_u)
{
  return Vec2(2.0 * p_u - p.x(), p.y());
}

/// Point-to-point distance in mm between the 0 deg projection and the flipped
/// complementary-view projection, d_180 = |m' - m| * sqrt(x^2 + y^2).
/// Vanishes exactly on the z = 0 plane and on the principal ray.
inline double d_180(const Vec4& a, const Geometry& g)
{
  g.validate();
  const Vec3 w = detail::dehomogenize3(a);
  const double m = magnification(w.z(), g.d_si);
  const double mc = magnification_complementary(w.z(), g.d_si);
  return std::abs(mc - m) * std::hypot(w.x(), w.y());
}

/// Ratio alpha = d_PD / d_180 locating the orthogonal projection inside the
/// interval spanned by the two complementary projections.
inline double alpha(const Vec4& a, const Geometry& g)
{
  const double num = d_pd(a, g);
  const double den = d_180(a, g);
  require(den > 0.0, ErrorCode::undefined_ratio,
          "d_180 vanishes (z = 0 or point on the principal ray)");
  return num / den;
}

namespace detail {

struct ProjMatrixSvd {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd;
  explicit ProjMatrixSvd(const ProjMatrix& p)
      : svd(Eigen::MatrixXd(p), Eigen::ComputeFullU | Eigen::ComputeFullV)
  {
  }
  int rank() const
  {
    const auto& s = svd.singularValues();
    const double cutoff = kRankTol * s(0);
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > cutoff) ++r;
    return r;
  }
};

}  // namespace detail

/// Moore-Penrose pseudo-inverse with singular values below 1e-10 * sigma_max
/// treated as zero. Throws SingularMatrix when rank < 3.
inline ProjMatrixInv pseudo_inverse(const ProjMatrix& p)
{
  detail::ProjMatrixSvd d(p);
  require(d.rank() == 3, ErrorCode::singular_matrix, "projection matrix is rank-deficient");
  const auto& s = d.svd.singularValues();
  Eigen::MatrixXd sinv = Eigen::MatrixXd::Zero(4, 3);
  for (int i = 0; i < 3; ++i) sinv(i, i) = 1.0 / s(i);
  return d.svd.matrixV() * sinv * d.svd.matrixU().transpose();
}

/// Homogeneous camera center (right null vector). Finite for perspective
/// matrices; a direction (w = 0) for orthogonal ones.
inline Vec4 camera_center(const ProjMatrix& p)
{
  detail::ProjMatrixSvd d(p);
  require(d.rank() == 3, ErrorCode::singular_matrix, "projection matrix is rank-deficient");
  Vec4 c = d.svd.matrixV().col(3);
  if (std::abs(c.w()) > detail::kHomogeneousTol) c /= c.w();
  return c;
}

/// Back-projection line of a detector pixel (homogeneous 3-vector): all world
/// points projecting onto it. The returned line contains the pixel's
/// minimum-norm pre-image and the camera center.
inline Line3 backproject(const ProjMatrix& p, const Vec3& pixel)
{
  const ProjMatrixInv pinv = pseudo_inverse(p);
  const Vec4 x0 = pinv * pixel;
  const Vec4 c = camera_center(p);
  Line3 line;
  if (std::abs(x0.w()) > detail::kHomogeneousTol) {
    line.point = x0.head<3>() / x0.w();
    line.dir = (std::abs(c.w()) > detail::kHomogeneousTol)
                   ? Vec3(c.head<3>() / c.w() - line.point)
                   : Vec3(c.head<3>());
  } else {
    // Minimum-norm solution at infinity: it then encodes the direction and the
    // camera center must be finite.
    require(std::abs(c.w()) > detail::kHomogeneousTol, ErrorCode::singular_matrix,
            "degenerate back-projection");
    line.point = c.head<3>() / c.w();
    line.dir = x0.head<3>();
  }
  const double n = line.dir.norm();
  require(n > 0.0, ErrorCode::singular_matrix, "zero back-projection direction");
  line.dir /= n;
  return line;
}

/// Orthogonal projection of a pixel's back-projection ray: the homogeneous 2D
/// line traced on the orthogonal view's detector by projecting every point of
/// the ray. Candidate locus of the pixel's orthogonal projection.
inline Line2 opbp(const ProjMatrix& perspective, const ProjMatrix& orthogonal, const Vec3& pixel)
{
  const ProjMatrixInv pinv = pseudo_inverse(perspective);
  const Vec4 c = camera_center(perspective);
  const Vec3 q0 = orthogonal * (pinv * pixel);
  const Vec3 q1 = orthogonal * c;
  Line2 l = q0.cross(q1);
  const double scale = q0.norm() * q1.norm();
  require(l.norm() > 1e-12 * (scale > 0.0 ? scale : 1.0), ErrorCode::singular_matrix,
          "back-projection ray projects to a point");
  return l / l.norm();
}

}  // namespace xpd
