#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "xpd/core.hpp"
#include "xpd/geometry.hpp"
#include "xpd/image.hpp"
#include "xpd/phantom.hpp"

namespace xpd {

/// Linear attenuation from HU: mu = mu_water * (1 + hu/1000), clamped to zero
/// below air.
inline double hu_to_mu(double hu, double mu_water = 0.02)
{
  if (hu <= -1000.0) return 0.0;
  return mu_water * (1.0 + hu / 1000.0);
}

enum class ParallelMode { exact, far_source };

namespace detail {

struct VolumeGrid {
  Vec3 aabb_min;
  Vec3 spacing;
  int n[3];
  const float* mu;

  std::size_t index(int i, int j, int k) const
  {
    return (static_cast<std::size_t>(k) * n[1] + j) * n[0] + i;
  }
};

// Radiological path integral of mu along origin + t*dir (dir unit, t in mm),
// exact for the piecewise-constant voxel grid.
inline double integrate_ray(const VolumeGrid& g, const Vec3& origin, const Vec3& dir)
{
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double tmin = -kInf, tmax = kInf;
  for (int a = 0; a < 3; ++a) {
    const double lo = g.aabb_min[a];
    const double hi = lo + g.n[a] * g.spacing[a];
    if (std::abs(dir[a]) < 1e-12) {
      if (origin[a] <= lo || origin[a] >= hi) return 0.0;
    } else {
      double t0 = (lo - origin[a]) / dir[a];
      double t1 = (hi - origin[a]) / dir[a];
      if (t0 > t1) std::swap(t0, t1);
      tmin = std::max(tmin, t0);
      tmax = std::min(tmax, t1);
    }
  }
  if (!(tmin < tmax)) return 0.0;

  // Start slightly inside to land in a well-defined voxel.
  const double eps = 1e-9 * std::max(1.0, std::abs(tmin));
  double t = tmin;
  Vec3 p = origin + dir * (tmin + eps);
  int idx[3];
  int step[3];
  double t_next[3], t_delta[3];
  for (int a = 0; a < 3; ++a) {
    int i = static_cast<int>(std::floor((p[a] - g.aabb_min[a]) / g.spacing[a]));
    idx[a] = std::clamp(i, 0, g.n[a] - 1);
    if (std::abs(dir[a]) < 1e-12) {
      step[a] = 0;
      t_next[a] = kInf;
      t_delta[a] = kInf;
    } else {
      step[a] = dir[a] > 0.0 ? 1 : -1;
      const double boundary = g.aabb_min[a] + (idx[a] + (step[a] > 0 ? 1 : 0)) * g.spacing[a];
      t_next[a] = (boundary - origin[a]) / dir[a];
      t_delta[a] = g.spacing[a] / std::abs(dir[a]);
    }
  }

  double sum = 0.0;
  const int max_steps = g.n[0] + g.n[1] + g.n[2] + 3;
  for (int s = 0; s < max_steps; ++s) {
    int axis = 0;
    if (t_next[1] < t_next[axis]) axis = 1;
    if (t_next[2] < t_next[axis]) axis = 2;
    const double t_exit = std::min(t_next[axis], tmax);
    if (t_exit > t) {
      sum += g.mu[g.index(idx[0], idx[1], idx[2])] * (t_exit - t);
      t = t_exit;
    }
    if (t_next[axis] >= tmax) break;
    idx[axis] += step[axis];
    if (idx[axis] < 0 || idx[axis] >= g.n[axis]) break;
    t_next[axis] += t_delta[axis];
  }
  return sum;
}

inline std::vector<float> mu_buffer(const VoxelVolume& vol, double mu_water)
{
  std::vector<float> mu(vol.data.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    mu[i] = static_cast<float>(hu_to_mu(vol.data[i], mu_water));
  return mu;
}

// The whole volume must stay strictly between the source plane and its mirror,
// i.e. |depth| < d_si in the view's camera frame.
inline void check_support(const VoxelVolume& vol, const Geometry& g, const Mat3& r)
{
  const Vec3 half(vol.nx * vol.spacing.x() / 2.0, vol.ny * vol.spacing.y() / 2.0,
                  vol.nz * vol.spacing.z() / 2.0);
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner = vol.origin + Vec3((c & 1) ? half.x() : -half.x(),
                                          (c & 2) ? half.y() : -half.y(),
                                          (c & 4) ? half.z() : -half.z());
    const double depth = (r * corner).z();
    require(std::abs(depth) < g.d_si, ErrorCode::geometry_mismatch,
            "volume support reaches the source plane (|z| >= d_si)");
  }
}

}  // namespace detail

/// Cone-beam forward projection onto the virtual detector at the isocenter.
/// Each pixel is the exact radiological path integral from the source through
/// that pixel center.
inline ProjImage cone_project(const VoxelVolume& vol, const Geometry& g, double view_angle_deg,
                              double mu_water = 0.02)
{
  vol.validate();
  g.validate();
  const double su = g.virtual_spacing_u();
  const double sv = g.virtual_spacing_v();
  const Mat3 r = rotation_matrix(g.theta_x, g.theta_y + view_angle_deg * M_PI / 180.0, g.theta_z);
  const Mat3 rt = r.transpose();
  detail::check_support(vol, g, r);

  const std::vector<float> mu = detail::mu_buffer(vol, mu_water);
  detail::VolumeGrid grid{vol.origin - Vec3(vol.nx * vol.spacing.x(), vol.ny * vol.spacing.y(),
                                            vol.nz * vol.spacing.z()) /
                                           2.0,
                          vol.spacing,
                          {vol.nx, vol.ny, vol.nz},
                          mu.data()};

  const Vec3 source = rt * Vec3(0.0, 0.0, -g.d_si);
  ProjImage img = ProjImage::zeros(g.det_nu, g.det_nv);
  img.spacing_u = su;
  img.spacing_v = sv;
  img.view_angle_deg = view_angle_deg;
  img.kind = ProjKind::perspective;

  parallel_for(g.det_nv, [&](int v) {
    for (int u = 0; u < g.det_nu; ++u) {
      const Vec3 det_point = rt * Vec3((u - g.p_u) * su, (v - g.p_v) * sv, 0.0);
      const Vec3 dir = (det_point - source).normalized();
      img.at(u, v) = static_cast<float>(detail::integrate_ray(grid, source, dir));
    }
  });
  return img;
}

/// Parallel-beam projection onto the same virtual detector. `exact` integrates
/// along rays orthogonal to the detector; `far_source` emulates it with a
/// cone geometry of d_sd = 12000 mm whose detector sits 100 mm past the
/// isocenter, rebinned to the identical grid.
inline ProjImage parallel_project(const VoxelVolume& vol, const Geometry& g, double view_angle_deg,
                                  ParallelMode mode = ParallelMode::exact, double mu_water = 0.02)
{
  if (mode == ParallelMode::far_source) {
    Geometry far = g;
    far.d_sd = 12000.0;
    far.d_si = far.d_sd - 100.0;
    far.s_u = g.virtual_spacing_u() * far.d_sd / far.d_si;
    far.s_v = g.virtual_spacing_v() * far.d_sd / far.d_si;
    ProjImage img = cone_project(vol, far, view_angle_deg, mu_water);
    img.kind = ProjKind::orthogonal;
    return img;
  }

  vol.validate();
  g.validate();
  const double su = g.virtual_spacing_u();
  const double sv = g.virtual_spacing_v();
  const Mat3 r = rotation_matrix(g.theta_x, g.theta_y + view_angle_deg * M_PI / 180.0, g.theta_z);
  const Mat3 rt = r.transpose();
  detail::check_support(vol, g, r);

  const std::vector<float> mu = detail::mu_buffer(vol, mu_water);
  detail::VolumeGrid grid{vol.origin - Vec3(vol.nx * vol.spacing.x(), vol.ny * vol.spacing.y(),
                                            vol.nz * vol.spacing.z()) /
                                           2.0,
                          vol.spacing,
                          {vol.nx, vol.ny, vol.nz},
                          mu.data()};

  const Vec3 dir = rt * Vec3(0.0, 0.0, 1.0);
  ProjImage img = ProjImage::zeros(g.det_nu, g.det_nv);
  img.spacing_u = su;
  img.spacing_v = sv;
  img.view_angle_deg = view_angle_deg;
  img.kind = ProjKind::orthogonal;

  parallel_for(g.det_nv, [&](int v) {
    for (int u = 0; u < g.det_nu; ++u) {
      const Vec3 det_point = rt * Vec3((u - g.p_u) * su, (v - g.p_v) * sv, 0.0);
      img.at(u, v) = static_cast<float>(detail::integrate_ray(grid, det_point, dir));
    }
  });
  return img;
}

}  // namespace xpd
