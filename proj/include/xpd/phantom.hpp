#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xpd/core.hpp"
#include "xpd/geometry.hpp"

namespace xpd {

inline constexpr float kAirHU = -1000.0f;

/// 3D scalar grid of HU values, x fastest. `origin` is the world position of
/// the volume center; imaged objects are centered at the isocenter, so this is
/// normally zero.
struct VoxelVolume {
  int nx = 0, ny = 0, nz = 0;
  Vec3 spacing{0.625, 0.625, 0.625};  ///< mm per voxel
  Vec3 origin{0.0, 0.0, 0.0};
  std::vector<float> data;

  static VoxelVolume filled(int nx_, int ny_, int nz_, double spacing_mm, float value)
  {
    VoxelVolume v;
    v.nx = nx_;
    v.ny = ny_;
    v.nz = nz_;
    v.spacing = Vec3::Constant(spacing_mm);
    v.data.assign(static_cast<std::size_t>(nx_) * ny_ * nz_, value);
    return v;
  }

  float& at(int i, int j, int k)
  {
    return data[(static_cast<std::size_t>(k) * ny + j) * nx + i];
  }
  float at(int i, int j, int k) const
  {
    return data[(static_cast<std::size_t>(k) * ny + j) * nx + i];
  }

  Vec3 voxel_center(int i, int j, int k) const
  {
    return origin + Vec3((i - (nx - 1) / 2.0) * spacing.x(),
                         (j - (ny - 1) / 2.0) * spacing.y(),
                         (k - (nz - 1) / 2.0) * spacing.z());
  }

  void validate() const
  {
    require(nx > 0 && ny > 0 && nz > 0, ErrorCode::invalid_spec, "volume dims must be positive");
    require(spacing.minCoeff() > 0.0, ErrorCode::invalid_spec, "voxel spacing must be positive");
    require(data.size() == static_cast<std::size_t>(nx) * ny * nz, ErrorCode::invalid_spec,
            "volume buffer size mismatch");
  }
};

struct Bead {
  Vec3 center;  ///< mm, world coordinates
  double radius = 0.0;
  float hu = 0.0f;
};

/// Recipe for a random cylinder-with-beads phantom. All "center, halfwidth"
/// pairs are uniform ranges [center - halfwidth, center + halfwidth].
struct BeadPhantomSpec {
  std::uint64_t seed = 0;
  int nx = 512, ny = 512, nz = 512;
  double spacing_mm = 0.625;
  double cylinder_height_mm = 240.0, cylinder_height_halfwidth_mm = 16.0;
  double cylinder_diameter_mm = 225.0, cylinder_diameter_halfwidth_mm = 32.0;
  double background_hu = 50.0, background_halfwidth_hu = 35.0;
  int beads_min = 40, beads_max = 60;
  double small_bead_diameter_mm = 6.4, small_bead_halfwidth_mm = 1.6;
  double large_bead_diameter_mm = 16.0, large_bead_halfwidth_mm = 8.0;
  double intensity_low_hu = 3500.0, intensity_low_halfwidth_hu = 350.0;
  double intensity_high_hu = 6000.0, intensity_high_halfwidth_hu = 1000.0;

  void validate() const
  {
    require(nx > 0 && ny > 0 && nz > 0, ErrorCode::invalid_spec, "volume dims must be positive");
    require(spacing_mm > 0.0, ErrorCode::invalid_spec, "voxel spacing must be positive");
    require(cylinder_height_mm - cylinder_height_halfwidth_mm > 0.0 &&
                cylinder_diameter_mm - cylinder_diameter_halfwidth_mm > 0.0,
            ErrorCode::invalid_spec, "cylinder dimensions must stay positive");
    require(beads_min >= 0 && beads_max >= beads_min, ErrorCode::invalid_spec,
            "bead count range invalid");
    require(small_bead_diameter_mm - small_bead_halfwidth_mm > 0.0 &&
                large_bead_diameter_mm - large_bead_halfwidth_mm > 0.0,
            ErrorCode::invalid_spec, "bead diameters must stay positive");
  }
};

/// Generated phantom with its ground-truth draw, useful for geometric oracles.
struct BeadPhantom {
  VoxelVolume volume;
  double cylinder_height_mm = 0.0;
  double cylinder_diameter_mm = 0.0;
  float background_hu = 0.0f;
  std::vector<Bead> beads;
};

/// Writes a sphere into the volume; a voxel takes the bead value when its
/// center lies inside. Later beads overwrite earlier ones.
inline void rasterize_bead(VoxelVolume& vol, const Bead& bead)
{
  const Vec3 lo = bead.center - Vec3::Constant(bead.radius);
  const Vec3 hi = bead.center + Vec3::Constant(bead.radius);
  // Voxel index range covering the bead's bounding box.
  int i0[3], i1[3];
  const int dims[3] = {vol.nx, vol.ny, vol.nz};
  for (int a = 0; a < 3; ++a) {
    const double c0 = (lo[a] - vol.origin[a]) / vol.spacing[a] + (dims[a] - 1) / 2.0;
    const double c1 = (hi[a] - vol.origin[a]) / vol.spacing[a] + (dims[a] - 1) / 2.0;
    i0[a] = std::max(0, static_cast<int>(std::floor(c0)));
    i1[a] = std::min(dims[a] - 1, static_cast<int>(std::ceil(c1)));
  }
  const double r2 = bead.radius * bead.radius;
  for (int k = i0[2]; k <= i1[2]; ++k)
    for (int j = i0[1]; j <= i1[1]; ++j)
      for (int i = i0[0]; i <= i1[0]; ++i)
        if ((vol.voxel_center(i, j, k) - bead.center).squaredNorm() <= r2)
          vol.at(i, j, k) = bead.hu;
}

/// Generates a bead phantom: air background, a cylinder along the y axis with
/// a random background HU, and randomly placed spherical beads fully inside
/// the cylinder. Deterministic for a given spec.
inline BeadPhantom generate_phantom(const BeadPhantomSpec& spec)
{
  spec.validate();
  std::mt19937_64 rng(spec.seed);

  BeadPhantom out;
  out.cylinder_height_mm = uniform(rng, spec.cylinder_height_mm - spec.cylinder_height_halfwidth_mm,
                                   spec.cylinder_height_mm + spec.cylinder_height_halfwidth_mm);
  out.cylinder_diameter_mm =
      uniform(rng, spec.cylinder_diameter_mm - spec.cylinder_diameter_halfwidth_mm,
              spec.cylinder_diameter_mm + spec.cylinder_diameter_halfwidth_mm);
  out.background_hu =
      static_cast<float>(uniform(rng, spec.background_hu - spec.background_halfwidth_hu,
                                 spec.background_hu + spec.background_halfwidth_hu));
  const int n_beads = static_cast<int>(uniform_int(rng, spec.beads_min, spec.beads_max));

  const double cyl_r = out.cylinder_diameter_mm / 2.0;
  const double cyl_hh = out.cylinder_height_mm / 2.0;
  out.beads.reserve(static_cast<std::size_t>(n_beads));
  for (int b = 0; b < n_beads; ++b) {
    Bead bead;
    const bool small = uniform01(rng) < 0.5;
    const double dc = small ? spec.small_bead_diameter_mm : spec.large_bead_diameter_mm;
    const double dw = small ? spec.small_bead_halfwidth_mm : spec.large_bead_halfwidth_mm;
    bead.radius = uniform(rng, dc - dw, dc + dw) / 2.0;
    const bool low = uniform01(rng) < 0.5;
    const double ic = low ? spec.intensity_low_hu : spec.intensity_high_hu;
    const double iw = low ? spec.intensity_low_halfwidth_hu : spec.intensity_high_halfwidth_hu;
    bead.hu = static_cast<float>(uniform(rng, ic - iw, ic + iw));
    // Uniform over the admissible disk/height so the bead stays inside the cylinder.
    const double r_adm = std::max(0.0, cyl_r - bead.radius);
    const double y_adm = std::max(0.0, cyl_hh - bead.radius);
    const double rr = r_adm * std::sqrt(uniform01(rng));
    const double phi = 2.0 * M_PI * uniform01(rng);
    const double y = uniform(rng, -y_adm, y_adm);
    bead.center = Vec3(rr * std::cos(phi), y, rr * std::sin(phi));
    out.beads.push_back(bead);
  }

  VoxelVolume vol = VoxelVolume::filled(spec.nx, spec.ny, spec.nz, spec.spacing_mm, kAirHU);
  const double r2 = cyl_r * cyl_r;
  for (int k = 0; k < vol.nz; ++k) {
    const double z = vol.voxel_center(0, 0, k).z();
    for (int j = 0; j < vol.ny; ++j) {
      const double y = vol.voxel_center(0, j, 0).y();
      if (std::abs(y) > cyl_hh) continue;
      float* row = &vol.at(0, j, k);
      for (int i = 0; i < vol.nx; ++i) {
        const double x = vol.voxel_center(i, 0, 0).x();
        if (x * x + z * z <= r2) row[i] = out.background_hu;
      }
    }
  }
  for (const Bead& bead : out.beads) rasterize_bead(vol, bead);
  out.volume = std::move(vol);
  return out;
}

inline VoxelVolume generate(const BeadPhantomSpec& spec)
{
  return generate_phantom(spec).volume;
}

inline float sample_trilinear(const VoxelVolume& vol, const Vec3& world, float fill = kAirHU)
{
  const double fx = (world.x() - vol.origin.x()) / vol.spacing.x() + (vol.nx - 1) / 2.0;
  const double fy = (world.y() - vol.origin.y()) / vol.spacing.y() + (vol.ny - 1) / 2.0;
  const double fz = (world.z() - vol.origin.z()) / vol.spacing.z() + (vol.nz - 1) / 2.0;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int z0 = static_cast<int>(std::floor(fz));
  const double wx = fx - x0, wy = fy - y0, wz = fz - z0;
  double acc = 0.0;
  for (int dz = 0; dz <= 1; ++dz) {
    const int z = z0 + dz;
    const double az = dz ? wz : 1.0 - wz;
    for (int dy = 0; dy <= 1; ++dy) {
      const int y = y0 + dy;
      const double ay = dy ? wy : 1.0 - wy;
      for (int dx = 0; dx <= 1; ++dx) {
        const int x = x0 + dx;
        const double ax = dx ? wx : 1.0 - wx;
        const double v = (x < 0 || x >= vol.nx || y < 0 || y >= vol.ny || z < 0 || z >= vol.nz)
                             ? fill
                             : vol.at(x, y, z);
        acc += ax * ay * az * v;
      }
    }
  }
  return static_cast<float>(acc);
}

/// Rotates the volume about the vertical (y) axis through the world origin and
/// resamples trilinearly. Acquiring the rotated volume at a 0 deg view equals
/// acquiring the original at `angle_deg` (up to interpolation).
inline VoxelVolume rotate_augment(const VoxelVolume& vol, double angle_deg)
{
  vol.validate();
  const Mat3 r_inv = rotation_matrix(0.0, angle_deg * M_PI / 180.0, 0.0).transpose();
  VoxelVolume out = vol;
  parallel_for(vol.nz, [&](int k) {
    for (int j = 0; j < vol.ny; ++j)
      for (int i = 0; i < vol.nx; ++i)
        out.at(i, j, k) = sample_trilinear(vol, r_inv * vol.voxel_center(i, j, k));
  });
  return out;
}

}  // namespace xpd
