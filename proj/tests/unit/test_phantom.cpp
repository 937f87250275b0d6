#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "helpers.hpp"
#include "xpd/xpd.hpp"

using namespace xpd;
using Catch::Approx;

namespace {

// Small grids keep the suite fast; the protocol defaults (512^3 at 0.625 mm)
// only change the sampling density.
BeadPhantomSpec small_spec(std::uint64_t seed)
{
  BeadPhantomSpec s;
  s.seed = seed;
  s.nx = s.ny = s.nz = 96;
  s.spacing_mm = 2.5;
  return s;
}

}  // namespace

TEST_CASE("phantom generation is deterministic")
{
  const VoxelVolume a = generate(small_spec(1234));
  const VoxelVolume b = generate(small_spec(1234));
  REQUIRE(a.data.size() == b.data.size());
  CHECK(std::equal(a.data.begin(), a.data.end(), b.data.begin()));

  const VoxelVolume c = generate(small_spec(1235));
  CHECK(!std::equal(a.data.begin(), a.data.end(), c.data.begin()));
}

TEST_CASE("pure cylinder with zero background")
{
  BeadPhantomSpec s = small_spec(7);
  s.beads_min = s.beads_max = 0;
  s.background_hu = 0.0;
  s.background_halfwidth_hu = 0.0;
  const VoxelVolume vol = generate(s);
  CHECK(vol.at(48, 48, 48) == 0.0f);
  CHECK(vol.at(0, 0, 0) == kAirHU);

  std::set<float> values(vol.data.begin(), vol.data.end());
  CHECK(values == std::set<float>{kAirHU, 0.0f});
}

TEST_CASE("beads stay inside the cylinder and set the only extra modes")
{
  const BeadPhantom ph = generate_phantom(small_spec(99));
  const double r = ph.cylinder_diameter_mm / 2.0;
  for (const Bead& b : ph.beads) {
    CHECK(std::hypot(b.center.x(), b.center.z()) + b.radius <= r + 1e-9);
    CHECK(std::abs(b.center.y()) + b.radius <= ph.cylinder_height_mm / 2.0 + 1e-9);
  }

  std::set<float> expected{kAirHU, ph.background_hu};
  for (const Bead& b : ph.beads) expected.insert(b.hu);
  std::set<float> got(ph.volume.data.begin(), ph.volume.data.end());
  for (float v : got) CHECK(expected.count(v) == 1);
}

TEST_CASE("bead count distribution")
{
  // The draw is uniform on [40, 60]; the mean over 100 phantoms sits near 50.
  double total = 0;
  for (int i = 0; i < 100; ++i) {
    BeadPhantomSpec s = small_spec(1000 + static_cast<std::uint64_t>(i));
    s.nx = s.ny = s.nz = 8;  // draws only; rasterization is clipped anyway
    total += static_cast<double>(generate_phantom(s).beads.size());
  }
  const double mean = total / 100.0;
  CHECK(mean >= 40.0);
  CHECK(mean <= 60.0);
  CHECK(mean == Approx(50.0).margin(3.0));
}

TEST_CASE("invalid specs are rejected")
{
  BeadPhantomSpec s = small_spec(1);
  s.nx = 0;
  CHECK_THROWS_AS(generate(s), Error);
  s = small_spec(1);
  s.spacing_mm = -1.0;
  CHECK_THROWS_AS(generate(s), Error);
  s = small_spec(1);
  s.cylinder_diameter_halfwidth_mm = s.cylinder_diameter_mm + 1.0;
  CHECK_THROWS_AS(generate(s), Error);
}

TEST_CASE("rotation augmentation")
{
  BeadPhantomSpec s;
  s.seed = 6;
  s.nx = s.ny = s.nz = 128;
  s.spacing_mm = 1.25;
  s.cylinder_diameter_mm = 110.0;
  s.cylinder_diameter_halfwidth_mm = 0.0;
  s.cylinder_height_mm = 110.0;
  s.cylinder_height_halfwidth_mm = 0.0;

  SECTION("angle 0 is the identity")
  {
    const VoxelVolume vol = generate(s);
    const VoxelVolume same = rotate_augment(vol, 0.0);
    double worst = 0;
    for (std::size_t i = 0; i < vol.data.size(); ++i)
      worst = std::max(worst, std::abs(static_cast<double>(same.data[i]) - vol.data[i]));
    CHECK(worst < 1e-6);
  }

  SECTION("a bead-free cylinder is rotation invariant in its interior")
  {
    BeadPhantomSpec s2 = s;
    s2.beads_min = s2.beads_max = 0;
    const VoxelVolume cyl = generate(s2);
    const VoxelVolume rot = rotate_augment(cyl, 15.0);
    const double r_in = 55.0 - 2 * 1.25, h_in = 55.0 - 2 * 1.25;
    double acc = 0;
    long n = 0;
    for (int k = 0; k < cyl.nz; ++k)
      for (int j = 0; j < cyl.ny; ++j)
        for (int i = 0; i < cyl.nx; ++i) {
          const Vec3 c = cyl.voxel_center(i, j, k);
          if (c.x() * c.x() + c.z() * c.z() > r_in * r_in || std::abs(c.y()) > h_in) continue;
          const double d = static_cast<double>(rot.at(i, j, k)) - cyl.at(i, j, k);
          acc += d * d;
          ++n;
        }
    REQUIRE(n > 0);
    CHECK(std::sqrt(acc / n) < 1.0);
  }

  SECTION("15 then -15 degrees stays within the double-interpolation bound")
  {
    // Bead edges carry ~3500 HU contrast; two trilinear passes blur them.
    // Oracle run on this spec measured 196 HU interior RMSE.
    const VoxelVolume vol = generate(s);
    const VoxelVolume back = rotate_augment(rotate_augment(vol, 15.0), -15.0);
    const double r_in = 55.0 - 2 * 1.25, h_in = 55.0 - 2 * 1.25;
    double acc = 0;
    long n = 0;
    for (int k = 0; k < vol.nz; ++k)
      for (int j = 0; j < vol.ny; ++j)
        for (int i = 0; i < vol.nx; ++i) {
          const Vec3 c = vol.voxel_center(i, j, k);
          if (c.x() * c.x() + c.z() * c.z() > r_in * r_in || std::abs(c.y()) > h_in) continue;
          const double d = static_cast<double>(back.at(i, j, k)) - vol.at(i, j, k);
          acc += d * d;
          ++n;
        }
    CHECK(std::sqrt(acc / n) < 250.0);
  }
}
