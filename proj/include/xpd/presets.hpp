#pragma once

#include <string>

#include "xpd/core.hpp"
#include "xpd/geometry.hpp"
#include "xpd/image.hpp"

namespace xpd::presets {

/// C-arm style system: 1200/750 mm, 512x512 virtual detector at 0.625 mm.
/// Suits the bead-phantom protocol.
inline Geometry bead()
{
  Geometry g;
  g.d_sd = 1200.0;
  g.d_si = 750.0;
  g.det_nu = 512;
  g.det_nv = 512;
  g.s_u = g.s_v = 1.0;  // virtual spacing 0.625 mm
  g.p_u = g.p_v = 256.0;
  return g;
}

/// Same system rebinned to a truncated 472x352 virtual detector at 0.8 mm,
/// as used for chest-size objects.
inline Geometry chest()
{
  Geometry g;
  g.d_sd = 1200.0;
  g.d_si = 750.0;
  g.det_nu = 472;
  g.det_nv = 352;
  g.s_u = g.s_v = 1.28;  // virtual spacing 0.8 mm
  g.p_u = 236.0;
  g.p_v = 176.0;
  return g;
}

/// Dental-style short system: 960/600 mm, 512x512 virtual detector at 0.5 mm.
inline Geometry head()
{
  Geometry g;
  g.d_sd = 960.0;
  g.d_si = 600.0;
  g.det_nu = 512;
  g.det_nv = 512;
  g.s_u = g.s_v = 0.8;  // virtual spacing 0.5 mm
  g.p_u = g.p_v = 256.0;
  return g;
}

inline bool is_preset_name(const std::string& name)
{
  return name == "bead" || name == "chest" || name == "head";
}

inline Geometry by_name(const std::string& name)
{
  if (name == "bead") return bead();
  if (name == "chest") return chest();
  if (name == "head") return head();
  fail(ErrorCode::invalid_spec, "unknown geometry preset '" + name + "'");
}

/// Default polar grid for the given system: 512 radii x 512 angles, radial
/// spacing 0.375 mm for the 0.625 mm detectors and 0.5 mm for the 0.5 mm one.
inline PolarSpec default_polar(const Geometry& g)
{
  PolarSpec s;
  s.n_rho = 512;
  s.n_phi = 512;
  s.phi_spacing = 360.0 / 512;
  s.rho_spacing = g.virtual_spacing_u() <= 0.5 ? 0.5 : 0.375;
  s.center_u = g.p_u;
  s.center_v = g.p_v;
  return s;
}

}  // namespace xpd::presets
