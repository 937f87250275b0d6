#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "xpd/xpd.hpp"

using namespace xpd;
using Catch::Approx;

namespace {

ProjImage random_image(int n, std::uint64_t seed, double lo = 0, double hi = 255)
{
  ProjImage img = ProjImage::zeros(n, n);
  std::mt19937_64 rng(seed);
  for (auto& x : img.data) x = static_cast<float>(uniform(rng, lo, hi));
  return img;
}

ProjImage smooth(const ProjImage& img)
{
  ProjImage out = img;
  for (int v = 1; v < img.nv - 1; ++v)
    for (int u = 1; u < img.nu - 1; ++u)
      out.at(u, v) = 0.2f * (img.at(u, v) + img.at(u - 1, v) + img.at(u + 1, v) +
                             img.at(u, v - 1) + img.at(u, v + 1));
  return out;
}

}  // namespace

TEST_CASE("display windowing")
{
  ProjImage img = ProjImage::zeros(4, 1);
  img.data = {0.0f, 3.0f, 6.0f, 9.0f};
  const ProjImage out = window_to_display(img, {0.0, 6.0});
  CHECK(out.data[0] == 0.0f);
  CHECK(out.data[1] == 127.5f);
  CHECK(out.data[2] == 255.0f);
  CHECK(out.data[3] == 255.0f);  // clamped

  CHECK_THROWS_AS(window_to_display(img, {6.0, 0.0}), Error);
}

TEST_CASE("windowed bead projection shows a mid-grey cylinder and saturated beads")
{
  // Cylinder of 225 mm water-ish background integrates to ~4.7; a dense
  // 16 mm bead pushes its rays past the 6.0 window ceiling.
  Geometry g = presets::bead();
  g.det_nu = g.det_nv = 256;
  g.p_u = g.p_v = 128.0;
  VoxelVolume vol = VoxelVolume::filled(256, 256, 256, 1.25, kAirHU);
  const double r_cyl = 112.5;
  for (int k = 0; k < vol.nz; ++k)
    for (int j = 0; j < vol.ny; ++j)
      for (int i = 0; i < vol.nx; ++i) {
        const Vec3 c = vol.voxel_center(i, j, k);
        if (c.x() * c.x() + c.z() * c.z() <= r_cyl * r_cyl && std::abs(c.y()) <= 60.0)
          vol.at(i, j, k) = 50.0f;
      }
  rasterize_bead(vol, Bead{Vec3(0, 0, 0), 8.0, 6000.0f});
  const ProjImage disp = window_to_display(cone_project(vol, g, 0.0), {0.0, 6.0});
  CHECK(disp.at(128, 128) == 255.0f);                    // bead ray saturates
  CHECK(disp.at(128 + 60, 128) > 120.0f);                // cylinder body mid-grey
  CHECK(disp.at(128 + 60, 128) < 240.0f);
  CHECK(disp.at(128, 4) == 0.0f);                        // air above the cylinder
}

TEST_CASE("rmse")
{
  const ProjImage a = random_image(64, 1);
  CHECK(rmse(a, a) == 0.0);

  SECTION("constant offset")
  {
    ProjImage b = a;
    for (auto& x : b.data) x += 12.5f;
    CHECK(rmse(a, b) == Approx(12.5).epsilon(1e-6));
  }
  SECTION("checkerboard against zero")
  {
    ProjImage c = ProjImage::zeros(64, 64);
    for (int v = 0; v < 64; ++v)
      for (int u = 0; u < 64; ++u) c.at(u, v) = ((u + v) % 2) ? 255.0f : 0.0f;
    const ProjImage z = ProjImage::zeros(64, 64);
    CHECK(rmse(c, z) == Approx(180.31222920256963).epsilon(1e-9));
  }
  SECTION("symmetry and triangle inequality")
  {
    const ProjImage b = random_image(64, 2);
    const ProjImage c = random_image(64, 3);
    CHECK(rmse(a, b) == Approx(rmse(b, a)).epsilon(1e-12));
    CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-9);
  }
  SECTION("mismatched inputs are rejected")
  {
    const ProjImage small = random_image(32, 4);
    CHECK_THROWS_AS(rmse(a, small), Error);
    ProjImage pol = a;
    pol.space = Space::polar;
    CHECK_THROWS_AS(rmse(a, pol), Error);
  }
}

TEST_CASE("ssim")
{
  const ProjImage a = smooth(random_image(96, 5));

  SECTION("identity gives exactly one")
  {
    CHECK(ssim(a, a) == 1.0);
  }
  SECTION("inverted image anti-correlates")
  {
    ProjImage inv = a;
    for (auto& x : inv.data) x = 255.0f - x;
    CHECK(ssim(a, inv) < 0.0);
  }
  SECTION("small noise keeps similarity high")
  {
    ProjImage noisy = a;
    std::mt19937_64 rng(6);
    for (auto& x : noisy.data)
      x += static_cast<float>(std::sqrt(-2.0 * std::log(uniform01(rng))) *
                              std::cos(2.0 * M_PI * uniform01(rng)));
    CHECK(ssim(a, noisy) > 0.99);
  }
  SECTION("affine rescale with matching dynamic range is invariant")
  {
    ProjImage b = smooth(random_image(96, 7));
    ProjImage a2 = a, b2 = b;
    for (auto& x : a2.data) x *= 0.5f;
    for (auto& x : b2.data) x *= 0.5f;
    CHECK(ssim(a2, b2, 127.5) == Approx(ssim(a, b, 255.0)).epsilon(1e-9));
  }
  SECTION("mixed spaces are refused")
  {
    ProjImage pol = a;
    pol.space = Space::logpolar;
    CHECK_THROWS_AS(ssim(a, pol), Error);
  }
}
