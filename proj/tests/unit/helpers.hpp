#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "xpd/xpd.hpp"

namespace xpd::test {

/// Intensity-weighted centroid of a square window around (cu, cv).
inline Vec2 centroid(const ProjImage& img, double cu, double cv, int radius)
{
  double sw = 0, su = 0, sv = 0;
  for (int v = std::max(0, static_cast<int>(cv) - radius);
       v <= std::min(img.nv - 1, static_cast<int>(cv) + radius); ++v)
    for (int u = std::max(0, static_cast<int>(cu) - radius);
         u <= std::min(img.nu - 1, static_cast<int>(cu) + radius); ++u) {
      const double w = img.at(u, v);
      sw += w;
      su += w * u;
      sv += w * v;
    }
  return sw > 0 ? Vec2(su / sw, sv / sw) : Vec2(cu, cv);
}

/// Profile width along a row as integral/max; robust to silhouette staircase
/// and scales exactly with magnification.
inline double effective_width(const ProjImage& img, int row)
{
  double area = 0, mx = 0;
  for (int u = 0; u < img.nu; ++u) {
    area += img.at(u, row);
    mx = std::max(mx, static_cast<double>(img.at(u, row)));
  }
  return mx > 0 ? area / mx : 0.0;
}

/// Rotates a Cartesian image about (cu, cv) by angle_deg with bilinear
/// sampling; content at angle phi moves to phi + angle_deg.
inline ProjImage rotate_about(const ProjImage& img, double cu, double cv, double angle_deg)
{
  ProjImage out = img;
  const double c = std::cos(-angle_deg * M_PI / 180.0);
  const double s = std::sin(-angle_deg * M_PI / 180.0);
  for (int v = 0; v < img.nv; ++v)
    for (int u = 0; u < img.nu; ++u) {
      const double du = u - cu, dv = v - cv;
      out.at(u, v) =
          static_cast<float>(sample_bilinear(img, cu + c * du - s * dv, cv + s * du + c * dv));
    }
  return out;
}

/// Translates an image by (du, dv) pixels with bilinear sampling.
inline ProjImage translate(const ProjImage& img, double du, double dv)
{
  ProjImage out = img;
  for (int v = 0; v < img.nv; ++v)
    for (int u = 0; u < img.nu; ++u)
      out.at(u, v) = static_cast<float>(sample_bilinear(img, u - du, v - dv));
  return out;
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag)
  {
    path = std::filesystem::temp_directory_path() /
           ("xpd_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str(const std::string& name = "") const { return (path / name).string(); }
};

}  // namespace xpd::test
