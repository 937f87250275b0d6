#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xpd/core.hpp"

namespace xpd {

enum class Space { cartesian, polar, logpolar };
enum class ProjKind { perspective, orthogonal };

inline const char* to_string(Space s)
{
  switch (s) {
    case Space::cartesian: return "cartesian";
    case Space::polar: return "polar";
    case Space::logpolar: return "logpolar";
  }
  return "?";
}

inline const char* to_string(ProjKind k)
{
  return k == ProjKind::perspective ? "perspective" : "orthogonal";
}

inline Space space_from_string(const std::string& s)
{
  if (s == "cartesian") return Space::cartesian;
  if (s == "polar") return Space::polar;
  if (s == "logpolar") return Space::logpolar;
  fail(ErrorCode::format_error, "unknown space tag '" + s + "'");
}

inline ProjKind kind_from_string(const std::string& s)
{
  if (s == "perspective") return ProjKind::perspective;
  if (s == "orthogonal") return ProjKind::orthogonal;
  fail(ErrorCode::format_error, "unknown kind tag '" + s + "'");
}

/// Sampling grid of a polar or log-polar transform. Rows index the angle phi,
/// columns the radius rho; the transform origin (center_u, center_v) is given
/// in pixels of the source Cartesian image.
struct PolarSpec {
  int n_rho = 512;
  int n_phi = 512;
  double rho_spacing = 0.375;        ///< mm per radial sample (linear polar)
  double phi_spacing = 360.0 / 512;  ///< degrees per row
  double log_initial_rho = 0.0075;   ///< radius of column 0 in log-polar, mm
  double log_k = 0.0;                ///< log radial step; 0 = derive from image
  double center_u = -1.0;            ///< transform origin, px (<0 = principal point)
  double center_v = -1.0;

  void validate() const
  {
    require(n_rho > 0 && n_phi > 0, ErrorCode::invalid_spec, "polar dims must be positive");
    require(rho_spacing > 0.0 && phi_spacing > 0.0, ErrorCode::invalid_spec,
            "polar spacings must be positive");
    require(std::abs(n_phi * phi_spacing - 360.0) < 1e-9, ErrorCode::invalid_spec,
            "phi samples must cover [0, 360) exactly");
    require(log_initial_rho > 0.0, ErrorCode::invalid_spec, "log_initial_rho must be positive");
  }
};

/// 2D grid of line integrals (mu * mm). For Cartesian images spacing_u/v are
/// mm per pixel; for polar images spacing_u is mm per radial sample (the
/// initial radius for log-polar) and spacing_v is degrees per row.
struct ProjImage {
  int nu = 0;
  int nv = 0;
  double spacing_u = 1.0;
  double spacing_v = 1.0;
  Space space = Space::cartesian;
  double view_angle_deg = 0.0;
  ProjKind kind = ProjKind::perspective;
  std::vector<float> data;  ///< row-major, u fastest
  std::optional<PolarSpec> polar;

  static ProjImage zeros(int nu_, int nv_)
  {
    ProjImage img;
    img.nu = nu_;
    img.nv = nv_;
    img.data.assign(static_cast<std::size_t>(nu_) * nv_, 0.0f);
    return img;
  }

  float& at(int u, int v) { return data[static_cast<std::size_t>(v) * nu + u]; }
  float at(int u, int v) const { return data[static_cast<std::size_t>(v) * nu + u]; }

  void validate() const
  {
    require(nu > 0 && nv > 0, ErrorCode::invalid_spec, "image dims must be positive");
    require(data.size() == static_cast<std::size_t>(nu) * nv, ErrorCode::invalid_spec,
            "image buffer size mismatch");
    require(spacing_u > 0.0 && spacing_v > 0.0, ErrorCode::invalid_spec,
            "image spacing must be positive");
  }

  bool same_grid(const ProjImage& o) const
  {
    return nu == o.nu && nv == o.nv && space == o.space;
  }
};

/// Bilinear sample at continuous pixel coordinates; anything outside the grid
/// contributes zero.
inline double sample_bilinear(const ProjImage& img, double u, double v)
{
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const double fu = u - u0;
  const double fv = v - v0;
  double acc = 0.0;
  for (int dv = 0; dv <= 1; ++dv) {
    const int vv = v0 + dv;
    if (vv < 0 || vv >= img.nv) continue;
    const double wv = dv ? fv : 1.0 - fv;
    for (int du = 0; du <= 1; ++du) {
      const int uu = u0 + du;
      if (uu < 0 || uu >= img.nu) continue;
      const double wu = du ? fu : 1.0 - fu;
      acc += wu * wv * img.at(uu, vv);
    }
  }
  return acc;
}

}  // namespace xpd
