#pragma once

#include <cmath>

#include "xpd/core.hpp"
#include "xpd/image.hpp"

namespace xpd {

/// Target grid for the inverse transforms. A negative center falls back to the
/// transform origin stored with the polar image.
struct CartesianGridSpec {
  int nu = 512;
  int nv = 512;
  double spacing_u = 0.625;
  double spacing_v = 0.625;
  double center_u = -1.0;
  double center_v = -1.0;
};

namespace detail {

inline PolarSpec resolved(const PolarSpec& spec, const ProjImage& img)
{
  PolarSpec s = spec;
  if (s.center_u < 0.0) s.center_u = (img.nu - 1) / 2.0;
  if (s.center_v < 0.0) s.center_v = (img.nv - 1) / 2.0;
  return s;
}

inline double half_diagonal_mm(const ProjImage& img)
{
  return std::hypot(img.nu * img.spacing_u / 2.0, img.nv * img.spacing_v / 2.0);
}

}  // namespace detail

/// Radius in mm of radial sample column i.
inline double polar_radius(const PolarSpec& spec, int i, bool log_space)
{
  if (!log_space) return i * spec.rho_spacing;
  return spec.log_initial_rho * std::exp(i * spec.log_k);
}

/// Resamples a Cartesian image to polar coordinates about the transform
/// origin. Rows index phi (0.. 360 deg), columns index rho; samples falling
/// outside the source image are zero.
inline ProjImage to_polar(const ProjImage& img, const PolarSpec& spec)
{
  img.validate();
  require(img.space == Space::cartesian, ErrorCode::space_mismatch,
          "to_polar expects a cartesian image");
  PolarSpec s = detail::resolved(spec, img);
  s.validate();

  ProjImage out = ProjImage::zeros(s.n_rho, s.n_phi);
  out.spacing_u = s.rho_spacing;
  out.spacing_v = s.phi_spacing;
  out.space = Space::polar;
  out.view_angle_deg = img.view_angle_deg;
  out.kind = img.kind;
  out.polar = s;

  parallel_for(s.n_phi, [&](int j) {
    const double phi = j * s.phi_spacing * M_PI / 180.0;
    const double c = std::cos(phi), sn = std::sin(phi);
    for (int i = 0; i < s.n_rho; ++i) {
      const double rho = i * s.rho_spacing;
      const double u = s.center_u + rho * c / img.spacing_u;
      const double v = s.center_v + rho * sn / img.spacing_v;
      out.at(i, j) = static_cast<float>(sample_bilinear(img, u, v));
    }
  });
  return out;
}

/// Inverse of to_polar onto the given Cartesian grid. Radii beyond the last
/// polar column are zero; rows wrap periodically in phi.
inline ProjImage from_polar(const ProjImage& img, const CartesianGridSpec& target)
{
  img.validate();
  require(img.space == Space::polar || img.space == Space::logpolar, ErrorCode::space_mismatch,
          "from_polar expects a polar image");
  require(img.polar.has_value(), ErrorCode::format_error, "polar image lacks its sampling spec");
  const PolarSpec& s = *img.polar;
  const bool log_space = img.space == Space::logpolar;

  CartesianGridSpec t = target;
  if (t.center_u < 0.0) t.center_u = s.center_u;
  if (t.center_v < 0.0) t.center_v = s.center_v;
  require(t.nu > 0 && t.nv > 0 && t.spacing_u > 0.0 && t.spacing_v > 0.0, ErrorCode::invalid_spec,
          "invalid cartesian target grid");

  ProjImage out = ProjImage::zeros(t.nu, t.nv);
  out.spacing_u = t.spacing_u;
  out.spacing_v = t.spacing_v;
  out.space = Space::cartesian;
  out.view_angle_deg = img.view_angle_deg;
  out.kind = img.kind;

  parallel_for(t.nv, [&](int v) {
    for (int u = 0; u < t.nu; ++u) {
      const double dx = (u - t.center_u) * t.spacing_u;
      const double dy = (v - t.center_v) * t.spacing_v;
      const double rho = std::hypot(dx, dy);
      double ri;
      if (log_space) {
        // The sub-initial-radius disk is far smaller than a pixel; clamp it to
        // the first column instead of dropping the center pixel.
        ri = rho > 0.0 ? std::log(rho / s.log_initial_rho) / s.log_k : 0.0;
        if (ri < 0.0) ri = 0.0;
      } else {
        ri = rho / s.rho_spacing;
      }
      if (ri > s.n_rho - 1) continue;
      double phi = std::atan2(dy, dx);
      if (phi < 0.0) phi += 2.0 * M_PI;
      const double fj = phi * 180.0 / M_PI / s.phi_spacing;

      // Bilinear with periodic wrap across the angular seam.
      const int j0 = static_cast<int>(std::floor(fj));
      const double wj = fj - j0;
      const int i0 = static_cast<int>(std::floor(ri));
      const double wi = ri - i0;
      const int ja = ((j0 % s.n_phi) + s.n_phi) % s.n_phi;
      const int jb = (ja + 1) % s.n_phi;
      const int ib = std::min(i0 + 1, s.n_rho - 1);
      const double val = (1.0 - wj) * ((1.0 - wi) * img.at(i0, ja) + wi * img.at(ib, ja)) +
                         wj * ((1.0 - wi) * img.at(i0, jb) + wi * img.at(ib, jb));
      out.at(u, v) = static_cast<float>(val);
    }
  });
  return out;
}

/// Log-polar transform: column radii grow geometrically from log_initial_rho
/// up to the Cartesian half-diagonal (unless spec.log_k pins the step).
inline ProjImage to_log_polar(const ProjImage& img, const PolarSpec& spec)
{
  img.validate();
  require(img.space == Space::cartesian, ErrorCode::space_mismatch,
          "to_log_polar expects a cartesian image");
  PolarSpec s = detail::resolved(spec, img);
  s.validate();
  if (s.log_k <= 0.0) {
    const double rho_max = detail::half_diagonal_mm(img);
    require(rho_max > s.log_initial_rho, ErrorCode::invalid_spec,
            "image smaller than the initial log radius");
    s.log_k = std::log(rho_max / s.log_initial_rho) / (s.n_rho - 1);
  }

  ProjImage out = ProjImage::zeros(s.n_rho, s.n_phi);
  out.spacing_u = s.log_initial_rho;
  out.spacing_v = s.phi_spacing;
  out.space = Space::logpolar;
  out.view_angle_deg = img.view_angle_deg;
  out.kind = img.kind;
  out.polar = s;

  parallel_for(s.n_phi, [&](int j) {
    const double phi = j * s.phi_spacing * M_PI / 180.0;
    const double c = std::cos(phi), sn = std::sin(phi);
    for (int i = 0; i < s.n_rho; ++i) {
      const double rho = polar_radius(s, i, true);
      const double u = s.center_u + rho * c / img.spacing_u;
      const double v = s.center_v + rho * sn / img.spacing_v;
      out.at(i, j) = static_cast<float>(sample_bilinear(img, u, v));
    }
  });
  return out;
}

inline ProjImage from_log_polar(const ProjImage& img, const CartesianGridSpec& target)
{
  require(img.space == Space::logpolar, ErrorCode::space_mismatch,
          "from_log_polar expects a log-polar image");
  return from_polar(img, target);
}

/// Wraps `pad` rows from each angular end onto the other, reducing seam
/// artifacts for consumers that convolve across rows.
inline ProjImage periodic_pad(const ProjImage& img, int pad)
{
  img.validate();
  require(img.space == Space::polar || img.space == Space::logpolar, ErrorCode::space_mismatch,
          "periodic_pad expects a polar image");
  require(pad >= 0 && pad <= img.nv, ErrorCode::invalid_spec, "pad must be in [0, n_phi]");
  ProjImage out = img;
  out.nv = img.nv + 2 * pad;
  out.data.assign(static_cast<std::size_t>(out.nu) * out.nv, 0.0f);
  for (int v = 0; v < out.nv; ++v) {
    const int src = ((v - pad) % img.nv + img.nv) % img.nv;
    for (int u = 0; u < out.nu; ++u) out.at(u, v) = img.at(u, src);
  }
  return out;
}

/// Exact inverse of periodic_pad.
inline ProjImage periodic_unpad(const ProjImage& img, int pad)
{
  img.validate();
  require(img.space == Space::polar || img.space == Space::logpolar, ErrorCode::space_mismatch,
          "periodic_unpad expects a polar image");
  require(pad >= 0 && img.nv > 2 * pad, ErrorCode::invalid_spec, "pad larger than image");
  ProjImage out = img;
  out.nv = img.nv - 2 * pad;
  out.data.assign(static_cast<std::size_t>(out.nu) * out.nv, 0.0f);
  for (int v = 0; v < out.nv; ++v)
    for (int u = 0; u < out.nu; ++u) out.at(u, v) = img.at(u, v + pad);
  return out;
}

}  // namespace xpd
