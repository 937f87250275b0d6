#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xpd/core.hpp"
#include "xpd/geometry.hpp"
#include "xpd/image.hpp"

namespace xpd {

enum class Combo { single, comp_dup, comp_diff, ortho_naive, ortho_opbp, triple };

inline const char* to_string(Combo c)
{
  switch (c) {
    case Combo::single: return "single";
    case Combo::comp_dup: return "comp_dup";
    case Combo::comp_diff: return "comp_diff";
    case Combo::ortho_naive: return "ortho_naive";
    case Combo::ortho_opbp: return "ortho_opbp";
    case Combo::triple: return "triple";
  }
  return "?";
}

inline Combo combo_from_string(const std::string& s)
{
  if (s == "single") return Combo::single;
  if (s == "comp_dup") return Combo::comp_dup;
  if (s == "comp_diff") return Combo::comp_diff;
  if (s == "ortho_naive") return Combo::ortho_naive;
  if (s == "ortho_opbp") return Combo::ortho_opbp;
  if (s == "triple") return Combo::triple;
  fail(ErrorCode::format_error, "unknown combo '" + s + "'");
}

/// Mirrors an image about the principal-point column (u -> 2 p_u - u),
/// resampling linearly when 2 p_u is not an integer grid line.
inline ProjImage flip_image(const ProjImage& img, double p_u)
{
  img.validate();
  require(img.space == Space::cartesian, ErrorCode::space_mismatch,
          "flip_image expects a cartesian image");
  ProjImage out = img;
  for (int v = 0; v < img.nv; ++v)
    for (int u = 0; u < img.nu; ++u)
      out.at(u, v) = static_cast<float>(sample_bilinear(img, 2.0 * p_u - u, v));
  return out;
}

/// Pixelwise signed difference a - b.
inline ProjImage difference_image(const ProjImage& a, const ProjImage& b)
{
  a.validate();
  b.validate();
  require(a.nu == b.nu && a.nv == b.nv, ErrorCode::dimension_mismatch,
          "difference_image dimensions differ");
  require(a.space == b.space, ErrorCode::space_mismatch, "difference_image spaces differ");
  ProjImage out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
  return out;
}

/// Three-channel composite of two views sharing one image header.
struct ViewStack {
  ProjImage r, g, b;
  Combo combo = Combo::single;

  void validate() const
  {
    r.validate();
    g.validate();
    b.validate();
    require(r.same_grid(g) && r.same_grid(b), ErrorCode::dimension_mismatch,
            "stack channels must share one grid");
  }
};

/// Builds the two-view RGB combinations. The auxiliary image must already be
/// flipped/aligned as the combo requires. comp_dup and the ortho combos repeat
/// the reference view in R and B; comp_diff carries img0 - aux in B.
inline ViewStack stack(const ProjImage& img0, const ProjImage& img_aux, Combo combo)
{
  img0.validate();
  img_aux.validate();
  require(img0.nu == img_aux.nu && img0.nv == img_aux.nv, ErrorCode::dimension_mismatch,
          "stack inputs differ in size");
  require(img0.space == img_aux.space, ErrorCode::space_mismatch, "stack inputs differ in space");
  require(combo != Combo::triple, ErrorCode::invalid_spec, "triple combo needs stack_triple");

  ViewStack s;
  s.combo = combo;
  s.r = img0;
  s.b = img0;
  switch (combo) {
    case Combo::single:
      s.g = img0;
      break;
    case Combo::comp_dup:
    case Combo::ortho_naive:
    case Combo::ortho_opbp:
      s.g = img_aux;
      break;
    case Combo::comp_diff:
      s.g = img_aux;
      s.b = difference_image(img0, img_aux);
      break;
    case Combo::triple:
      break;
  }
  return s;
}

/// Direct combination of the 0/90/180 deg views as R/G/B.
inline ViewStack stack_triple(const ProjImage& img0, const ProjImage& img90,
                              const ProjImage& img180)
{
  ViewStack s;
  s.combo = Combo::triple;
  s.r = img0;
  s.g = img90;
  s.b = img180;
  s.validate();
  return s;
}

/// Renders the orthogonal projections of the back-projection rays of every
/// nonzero pixel of the 90 deg view onto the base view's virtual detector.
/// Stripes are composited with max blending, sampled at half-pixel steps.
inline ProjImage render_opbp(const ProjImage& img90, const Geometry& geom,
                             double base_view_deg = 0.0)
{
  img90.validate();
  require(img90.space == Space::cartesian, ErrorCode::space_mismatch,
          "render_opbp expects a cartesian image");
  const double base = base_view_deg * M_PI / 180.0;
  const ProjMatrix p90 = compose_perspective(geom, base + M_PI / 2.0);
  const ProjMatrix portho = compose_orthogonal(geom, base);
  const ProjMatrixInv p90_pinv = pseudo_inverse(p90);
  const Vec4 center = camera_center(p90);
  const Vec3 src_px = portho * center;  // orthogonal image of the 90 deg source

  ProjImage out = ProjImage::zeros(img90.nu, img90.nv);
  out.spacing_u = img90.spacing_u;
  out.spacing_v = img90.spacing_v;
  out.view_angle_deg = base_view_deg;
  out.kind = img90.kind;

  const double ulo = -0.5, uhi = img90.nu - 0.5;
  const double vlo = -0.5, vhi = img90.nv - 0.5;
  for (int v = 0; v < img90.nv; ++v) {
    for (int u = 0; u < img90.nu; ++u) {
      const float val = img90.at(u, v);
      if (val <= 0.0f) continue;
      const Vec3 qa = portho * (p90_pinv * Vec3(u, v, 1.0));
      if (std::abs(qa.z()) < 1e-12 || std::abs(src_px.z()) < 1e-12) continue;
      const Vec2 a(qa.x() / qa.z(), qa.y() / qa.z());
      const Vec2 b(src_px.x() / src_px.z(), src_px.y() / src_px.z());
      Vec2 d = b - a;
      if (d.norm() < 1e-9) {
        const int iu = static_cast<int>(std::lround(a.x()));
        const int iv = static_cast<int>(std::lround(a.y()));
        if (iu >= 0 && iu < out.nu && iv >= 0 && iv < out.nv)
          out.at(iu, iv) = std::max(out.at(iu, iv), val);
        continue;
      }

      // Clip the infinite line a + t*d to the detector rectangle.
      double t0 = -std::numeric_limits<double>::infinity();
      double t1 = std::numeric_limits<double>::infinity();
      bool empty = false;
      const auto clip = [&](double p, double q, double lo, double hi) {
        if (std::abs(q) < 1e-15) {
          if (p < lo || p > hi) empty = true;
          return;
        }
        double ta = (lo - p) / q;
        double tb = (hi - p) / q;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      };
      clip(a.x(), d.x(), ulo, uhi);
      clip(a.y(), d.y(), vlo, vhi);
      if (empty || !(t0 <= t1)) continue;

      const double len = (t1 - t0) * d.norm();
      const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
      for (int s = 0; s <= steps; ++s) {
        const double t = t0 + (t1 - t0) * s / steps;
        const Vec2 p = a + t * d;
        const int iu = static_cast<int>(std::lround(p.x()));
        const int iv = static_cast<int>(std::lround(p.y()));
        if (iu < 0 || iu >= out.nu || iv < 0 || iv >= out.nv) continue;
        out.at(iu, iv) = std::max(out.at(iu, iv), val);
      }
    }
  }
  return out;
}

}  // namespace xpd
