#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "xpd/core.hpp"
#include "xpd/geometry.hpp"

namespace xpd {

enum class DistanceMetric { d_pd, d_90, d_180, alpha };

inline const char* to_string(DistanceMetric m)
{
  switch (m) {
    case DistanceMetric::d_pd: return "d_pd";
    case DistanceMetric::d_90: return "d_90";
    case DistanceMetric::d_180: return "d_180";
    case DistanceMetric::alpha: return "alpha";
  }
  return "?";
}

struct SummaryStats {
  double min = 0.0, max = 0.0, mean = 0.0, p50 = 0.0, p99 = 0.0;
  std::size_t count = 0;
};

struct DistanceHistogram {
  DistanceMetric metric = DistanceMetric::d_pd;
  double bin_lo = 0.0;     ///< left edge of bin 0
  double bin_width = 0.0;  ///< uniform width; 128 bins span [0, max]
  std::vector<std::uint64_t> counts;
  SummaryStats summary;
};

namespace detail {

inline SummaryStats summarize(std::vector<float>& samples)
{
  SummaryStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  double acc = 0.0;
  double mn = samples[0], mx = samples[0];
  for (float x : samples) {
    acc += x;
    mn = std::min(mn, static_cast<double>(x));
    mx = std::max(mx, static_cast<double>(x));
  }
  s.min = mn;
  s.max = mx;
  s.mean = acc / static_cast<double>(samples.size());
  const auto nth = [&](double q) {
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * samples.size()));
    idx = idx == 0 ? 0 : idx - 1;
    std::nth_element(samples.begin(), samples.begin() + idx, samples.end());
    return static_cast<double>(samples[idx]);
  };
  s.p50 = nth(0.50);
  s.p99 = nth(0.99);
  return s;
}

inline DistanceHistogram make_histogram(DistanceMetric metric, std::vector<float> samples)
{
  DistanceHistogram h;
  h.metric = metric;
  h.counts.assign(128, 0);
  h.summary = summarize(samples);
  h.bin_lo = 0.0;
  h.bin_width = h.summary.max > 0.0 ? h.summary.max / 128.0 : 1.0;
  for (float x : samples) {
    int idx = static_cast<int>(x / h.bin_width);
    idx = std::clamp(idx, 0, 127);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

}  // namespace detail

/// Evaluates the deformation distances d_PD, d_90, d_180 (mm) and the ratio
/// alpha over a regular grid of points inside a cylinder (axis along y)
/// centered at the isocenter. alpha is collected only where it is defined
/// (z != 0 and off the principal ray).
inline std::vector<DistanceHistogram> distance_distributions(double cyl_diameter_mm,
                                                             double cyl_height_mm,
                                                             const Geometry& geom,
                                                             double step_mm = 2.0)
{
  geom.validate();
  require(step_mm > 0.0, ErrorCode::invalid_spec, "grid step must be positive");
  require(cyl_diameter_mm > 0.0 && cyl_height_mm > 0.0, ErrorCode::degenerate_object,
          "cylinder is empty");
  const double r = cyl_diameter_mm / 2.0;
  const double hh = cyl_height_mm / 2.0;
  require(r < geom.d_si, ErrorCode::depth_out_of_range,
          "cylinder reaches the source orbit (radius >= d_si)");

  const double d_si = geom.d_si;
  const int n_r = static_cast<int>(std::floor(2.0 * r / step_mm + 0.5));
  const int n_y = static_cast<int>(std::floor(2.0 * hh / step_mm + 0.5));

  std::vector<float> s_pd, s_90, s_180, s_alpha;
  for (int iz = 0; iz <= n_r; ++iz) {
    const double z = -r + iz * step_mm;
    const double m = d_si / (d_si + z);
    const double mc = d_si / (d_si - z);
    for (int ix = 0; ix <= n_r; ++ix) {
      const double x = -r + ix * step_mm;
      if (x * x + z * z > r * r + 1e-9) continue;
      const double mx = d_si / (d_si + x);
      for (int iy = 0; iy <= n_y; ++iy) {
        const double y = -hh + iy * step_mm;
        const double rho = std::hypot(x, y);
        const double pd = std::abs(m - 1.0) * rho;
        const double c180 = std::abs(mc - m) * rho;
        const double du = mx * (-z) - m * x;
        const double dv = (mx - m) * y;
        s_pd.push_back(static_cast<float>(pd));
        s_180.push_back(static_cast<float>(c180));
        s_90.push_back(static_cast<float>(std::hypot(du, dv)));
        if (c180 > 0.0) s_alpha.push_back(static_cast<float>(pd / c180));
      }
    }
  }
  require(!s_pd.empty(), ErrorCode::degenerate_object, "cylinder grid holds no samples");

  std::vector<DistanceHistogram> out;
  out.push_back(detail::make_histogram(DistanceMetric::d_pd, std::move(s_pd)));
  out.push_back(detail::make_histogram(DistanceMetric::d_90, std::move(s_90)));
  out.push_back(detail::make_histogram(DistanceMetric::d_180, std::move(s_180)));
  out.push_back(detail::make_histogram(DistanceMetric::alpha, std::move(s_alpha)));
  return out;
}

/// Closed-form range of alpha for object depths |z| <= half_depth:
/// alpha(z) = (d_si - z) / (2 d_si), monotone in z.
inline std::pair<double, double> alpha_bounds(double cyl_half_depth_mm, double d_si_mm)
{
  require(cyl_half_depth_mm >= 0.0 && cyl_half_depth_mm < d_si_mm, ErrorCode::depth_out_of_range,
          "half depth must be below d_si");
  return {(d_si_mm - cyl_half_depth_mm) / (2.0 * d_si_mm),
          (d_si_mm + cyl_half_depth_mm) / (2.0 * d_si_mm)};
}

enum class PerturbationKind { rotation_error_deg, dsi_error_mm, principal_shift_mm };

inline const char* to_string(PerturbationKind k)
{
  switch (k) {
    case PerturbationKind::rotation_error_deg: return "rotation_error_deg";
    case PerturbationKind::dsi_error_mm: return "dsi_error_mm";
    case PerturbationKind::principal_shift_mm: return "principal_shift_mm";
  }
  return "?";
}

struct Perturbation {
  PerturbationKind kind = PerturbationKind::rotation_error_deg;
  double magnitude = 0.0;
};

/// Applies a geometric acquisition error to the geometry used for the second
/// (complementary) view. rotation_error adds to the view rotation, dsi_error
/// offsets the source-to-isocenter distance, principal_shift moves the virtual
/// detector by the given mm (converted to detector pixels along u).
inline Geometry perturb(const Geometry& geom, const Perturbation& p)
{
  geom.validate();
  require(std::isfinite(p.magnitude), ErrorCode::invalid_geometry,
          "perturbation magnitude must be finite");
  Geometry out = geom;
  switch (p.kind) {
    case PerturbationKind::rotation_error_deg:
      out.theta_y += p.magnitude * M_PI / 180.0;
      break;
    case PerturbationKind::dsi_error_mm:
      out.d_si += p.magnitude;
      break;
    case PerturbationKind::principal_shift_mm:
      out.p_u += p.magnitude / geom.virtual_spacing_u();
      break;
  }
  out.validate();
  return out;
}

struct AlignResult {
  double shift_u = 0.0;  ///< px to add to the flipped complementary view
  double shift_v = 0.0;
  double residual_mm = 0.0;  ///< principal-point distance left after the shift
};

namespace detail {
inline Vec2 dehomogenize2(const Vec3& q)
{
  require(std::abs(q.z()) > kHomogeneousTol, ErrorCode::singular_matrix,
          "homogeneous point at infinity");
  return Vec2(q.x() / q.z(), q.y() / q.z());
}

inline Vec2 principal_point_of(const ProjMatrix& p)
{
  const Vec3 pp = p.block<3, 3>(0, 0) * p.block<1, 3>(2, 0).transpose();
  return dehomogenize2(pp);
}
}  // namespace detail

/// Calibrates a complementary pair from its projection matrices: the world
/// origin projects to the last column of each matrix, so shifting the flipped
/// second view by (shift_u, shift_v) aligns the two origin images. The
/// residual is the principal-point distance remaining after that shift, in
/// virtual-detector mm.
inline AlignResult align_complementary(const ProjMatrix& p0, const ProjMatrix& p180,
                                       const Geometry& geom)
{
  geom.validate();
  require(detail::ProjMatrixSvd(p0).rank() == 3 && detail::ProjMatrixSvd(p180).rank() == 3,
          ErrorCode::singular_matrix, "projection matrices must have rank 3");
  const Vec2 o0 = detail::dehomogenize2(p0.col(3));
  const Vec2 o180 = detail::dehomogenize2(p180.col(3));
  const Vec2 o180f = flip_complementary_point(o180, geom.p_u);

  AlignResult res;
  res.shift_u = o0.x() - o180f.x();
  res.shift_v = o0.y() - o180f.y();

  const Vec2 pp0 = detail::principal_point_of(p0);
  const Vec2 pp180f = flip_complementary_point(detail::principal_point_of(p180), geom.p_u);
  const double du = (pp0.x() - (pp180f.x() + res.shift_u)) * geom.virtual_spacing_u();
  const double dv = (pp0.y() - (pp180f.y() + res.shift_v)) * geom.virtual_spacing_v();
  res.residual_mm = std::hypot(du, dv);
  return res;
}

}  // namespace xpd
