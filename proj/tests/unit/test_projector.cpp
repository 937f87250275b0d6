#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "xpd/xpd.hpp"

using namespace xpd;
using Catch::Approx;

namespace {

// Bead-protocol system with a quarter-size detector for fast unit runs.
Geometry small_detector()
{
  Geometry g = presets::bead();
  g.det_nu = g.det_nv = 256;
  g.p_u = g.p_v = 128.0;
  return g;
}

}  // namespace

TEST_CASE("hu_to_mu")
{
  CHECK(hu_to_mu(-1000.0) == 0.0);
  CHECK(hu_to_mu(-1500.0) == 0.0);
  CHECK(hu_to_mu(0.0) == Approx(0.02).epsilon(1e-12));
  CHECK(hu_to_mu(3500.0) == Approx(0.09).epsilon(1e-12));
  CHECK(hu_to_mu(0.0, 0.05) == Approx(0.05).epsilon(1e-12));
}

TEST_CASE("all-air volume projects to zero")
{
  const Geometry g = small_detector();
  const VoxelVolume air = VoxelVolume::filled(32, 32, 32, 4.0, kAirHU);
  for (const ProjImage& img :
       {cone_project(air, g, 0.0), parallel_project(air, g, 0.0),
        parallel_project(air, g, 0.0, ParallelMode::far_source)}) {
    double mx = 0;
    for (float v : img.data) mx = std::max(mx, std::abs(static_cast<double>(v)));
    CHECK(mx == 0.0);
  }
}

TEST_CASE("uniform sphere central-ray integral")
{
  // Water sphere, radius 50 mm: the central ray sees a 100 mm chord.
  const Geometry g = small_detector();
  VoxelVolume vol = VoxelVolume::filled(160, 160, 160, 1.25, kAirHU);
  rasterize_bead(vol, Bead{Vec3(0, 0, 0), 50.0, 0.0f});
  const ProjImage img = cone_project(vol, g, 0.0);
  CHECK(img.at(128, 128) == Approx(2.0 * 50.0 * 0.02).epsilon(0.005));
}

TEST_CASE("perspective silhouette scales with the magnification factor")
{
  const Geometry g = small_detector();
  const double zs[3] = {-100.0, 0.0, 100.0};
  double widths[3];
  for (int i = 0; i < 3; ++i) {
    // 280 mm cube: the displaced sphere must stay fully inside.
    VoxelVolume vol = VoxelVolume::filled(224, 224, 224, 1.25, kAirHU);
    rasterize_bead(vol, Bead{Vec3(0, 0, zs[i]), 30.0, 0.0f});
    widths[i] = test::effective_width(cone_project(vol, g, 0.0), 128);
  }
  for (int i = 0; i < 3; ++i) {
    const double m = magnification(zs[i], g.d_si);
    CHECK(std::abs(widths[i] - m * widths[1]) < 1.0);
  }
}

TEST_CASE("parallel projection of a uniform cylinder")
{
  const Geometry g = small_detector();
  VoxelVolume vol = VoxelVolume::filled(192, 192, 192, 1.25, kAirHU);
  const double radius = 80.0;
  for (int k = 0; k < vol.nz; ++k)
    for (int j = 0; j < vol.ny; ++j)
      for (int i = 0; i < vol.nx; ++i) {
        const Vec3 c = vol.voxel_center(i, j, k);
        if (c.x() * c.x() + c.z() * c.z() <= radius * radius) vol.at(i, j, k) = 0.0f;
      }
  const ProjImage img = parallel_project(vol, g, 0.0);

  double mx = 0;
  for (int u = 0; u < img.nu; ++u) mx = std::max(mx, static_cast<double>(img.at(u, 128)));
  CHECK(mx == Approx(2.0 * radius * 0.02).epsilon(0.005));

  // Per-pixel chord check away from the grazing edge; voxelization leaves up
  // to ~2 boundary voxels of path error.
  for (int u = 0; u < img.nu; ++u) {
    const double x = (u - g.p_u) * img.spacing_u;
    if (std::abs(x) > 0.8 * radius) continue;
    const double chord = 2.0 * std::sqrt(radius * radius - x * x) * 0.02;
    CHECK(std::abs(img.at(u, 128) - chord) < 2.5 * 1.25 * 0.02);
  }
}

TEST_CASE("projection is linear in the volume")
{
  const Geometry g = small_detector();
  std::mt19937_64 rng(8);
  VoxelVolume v1 = VoxelVolume::filled(24, 24, 24, 4.0, 0.0f);
  VoxelVolume v2 = v1;
  for (auto& x : v1.data) x = static_cast<float>(uniform(rng, 0, 2000));
  for (auto& x : v2.data) x = static_cast<float>(uniform(rng, 0, 2000));

  // Work on mu-linear values: mu(a*h1 + b*h2 + offset) must match the pixel
  // combination, so compare against volumes whose HU encode the mixture.
  const double a = 0.7, b = 0.3;
  VoxelVolume mix = v1;
  for (std::size_t i = 0; i < mix.data.size(); ++i)
    mix.data[i] = static_cast<float>(a * (v1.data[i] + 1000.0) + b * (v2.data[i] + 1000.0) - 1000.0);

  const ProjImage p1 = cone_project(v1, g, 30.0);
  const ProjImage p2 = cone_project(v2, g, 30.0);
  const ProjImage pm = cone_project(mix, g, 30.0);
  double worst = 0;
  for (std::size_t i = 0; i < pm.data.size(); ++i) {
    const double want = a * p1.data[i] + b * p2.data[i];
    if (std::abs(want) < 1e-6) continue;
    worst = std::max(worst, std::abs(pm.data[i] - want) / std::abs(want));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("silhouette centroids stay collinear with the principal point")
{
  const Geometry g = small_detector();
  VoxelVolume vol = VoxelVolume::filled(224, 224, 224, 1.25, kAirHU);
  const Vec3 center(45, -35, 80);
  rasterize_bead(vol, Bead{center, 12.0, 0.0f});
  const ProjImage persp = cone_project(vol, g, 0.0);
  const ProjImage ortho = parallel_project(vol, g, 0.0);
  const Vec2 expected = project(compose_perspective(g, 0.0),
                                Vec4(center.x(), center.y(), center.z(), 1.0));
  const Vec2 cp = test::centroid(persp, expected.x(), expected.y(), 40);
  const Vec2 co = test::centroid(ortho, 128 + 45 / 0.625, 128 - 35 / 0.625, 40);
  const Vec2 u = cp - Vec2(g.p_u, g.p_v);
  const Vec2 v = co - Vec2(g.p_u, g.p_v);
  // Normalized triangle-area test: the deviation transverse to the radial
  // direction stays below a pixel.
  CHECK(std::abs(u.x() * v.y() - u.y() * v.x()) / u.norm() < 1.0);
}

TEST_CASE("parallel projection is depth invariant")
{
  const Geometry g = small_detector();
  double centers[2];
  int idx = 0;
  for (double z : {-90.0, 90.0}) {
    VoxelVolume vol = VoxelVolume::filled(192, 192, 192, 1.25, kAirHU);
    rasterize_bead(vol, Bead{Vec3(30, -20, z), 15.0, 0.0f});
    const ProjImage img = parallel_project(vol, g, 0.0);
    centers[idx++] = test::centroid(img, 128 + 30 / 0.625, 128 - 20 / 0.625, 40).x();
  }
  CHECK(std::abs(centers[0] - centers[1]) < 1.0);
}

TEST_CASE("far-source approximation of the orthogonal projection")
{
  // The 12000/11900 mm cone leaves residual magnification |m-1| <= ~1%, which
  // shifts bead rims by a couple of pixels. Oracle run on the 512^3 protocol
  // phantom (seed 42): approx-vs-exact windowed RMSE 5.78 against 22.3 for
  // perspective-vs-exact.
  BeadPhantomSpec spec;
  spec.seed = 42;
  spec.nx = spec.ny = spec.nz = 256;
  spec.spacing_mm = 1.25;
  const VoxelVolume vol = generate(spec);
  const Geometry g = presets::bead();
  const DisplayWindow w{0, 6};
  const ProjImage exact = window_to_display(parallel_project(vol, g, 0.0), w);
  const ProjImage approx =
      window_to_display(parallel_project(vol, g, 0.0, ParallelMode::far_source), w);
  const ProjImage persp = window_to_display(cone_project(vol, g, 0.0), w);
  const double err_approx = rmse(exact, approx);
  const double err_persp = rmse(exact, persp);
  CHECK(err_approx < 7.0);
  CHECK(err_approx < 0.35 * err_persp);
}

TEST_CASE("volume reaching the source plane is rejected")
{
  const Geometry g = small_detector();
  const VoxelVolume vol = VoxelVolume::filled(64, 64, 64, 25.0, 0.0f);  // 1600 mm cube
  CHECK_THROWS_AS(cone_project(vol, g, 0.0), Error);
  try {
    cone_project(vol, g, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::geometry_mismatch);
  }
}

TEST_CASE("volume rotation equals view rotation")
{
  BeadPhantomSpec spec;
  spec.seed = 5;
  spec.nx = spec.ny = spec.nz = 128;
  spec.spacing_mm = 1.25;
  spec.cylinder_diameter_mm = 110.0;
  spec.cylinder_diameter_halfwidth_mm = 8.0;
  spec.cylinder_height_mm = 110.0;
  spec.cylinder_height_halfwidth_mm = 8.0;
  const VoxelVolume vol = generate(spec);
  const Geometry g = small_detector();
  const DisplayWindow w{0, 6};
  const ProjImage via_volume = window_to_display(cone_project(rotate_augment(vol, 15.0), g, 0.0), w);
  const ProjImage via_view = window_to_display(cone_project(vol, g, 15.0), w);
  // Differs only by the trilinear resampling of the volume; measured 1.51.
  CHECK(rmse(via_volume, via_view) < 2.0);
}
