#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "xpd/xpd.hpp"

using namespace xpd;
using Catch::Approx;

TEST_CASE("alpha bounds")
{
  const auto [lo600, hi600] = alpha_bounds(160.0, 600.0);
  CHECK(lo600 == Approx(0.36666666666666666).epsilon(1e-12));
  CHECK(hi600 == Approx(0.63333333333333333).epsilon(1e-12));

  const auto [lo750, hi750] = alpha_bounds(160.0, 750.0);
  CHECK(lo750 == Approx(0.39333333333333333).epsilon(1e-12));
  CHECK(hi750 == Approx(0.60666666666666666).epsilon(1e-12));

  const auto [lo0, hi0] = alpha_bounds(0.0, 600.0);
  CHECK(lo0 == 0.5);
  CHECK(hi0 == 0.5);

  CHECK_THROWS_AS(alpha_bounds(600.0, 600.0), Error);
}

TEST_CASE("distance distributions on a small cylinder")
{
  const Geometry g = presets::head();
  const double diameter = 100.0, height = 100.0, step = 4.0;
  const auto hists = distance_distributions(diameter, height, g, step);
  REQUIRE(hists.size() == 4);

  // Brute-force maxima over the same grid as the independent oracle.
  double mx_pd = 0, mx_90 = 0, mx_180 = 0, mx_a = 0, mn_a = 1;
  std::size_t count = 0;
  const double r = diameter / 2.0;
  for (double z = -r; z <= r + 1e-9; z += step)
    for (double x = -r; x <= r + 1e-9; x += step) {
      if (x * x + z * z > r * r + 1e-9) continue;
      for (double y = -height / 2; y <= height / 2 + 1e-9; y += step) {
        ++count;
        const Vec4 a(x, y, z, 1.0);
        mx_pd = std::max(mx_pd, d_pd(a, g));
        mx_90 = std::max(mx_90, d_90(a, g));
        mx_180 = std::max(mx_180, d_180(a, g));
        if (z != 0.0 && std::hypot(x, y) > 0.0) {
          mx_a = std::max(mx_a, alpha(a, g));
          mn_a = std::min(mn_a, alpha(a, g));
        }
      }
    }

  const auto& h_pd = hists[0];
  const auto& h_90 = hists[1];
  const auto& h_180 = hists[2];
  const auto& h_a = hists[3];
  CHECK(h_pd.summary.count == count);
  CHECK(h_pd.summary.max == Approx(mx_pd).epsilon(1e-6));
  CHECK(h_90.summary.max == Approx(mx_90).epsilon(1e-6));
  CHECK(h_180.summary.max == Approx(mx_180).epsilon(1e-6));
  CHECK(h_a.summary.max == Approx(mx_a).epsilon(1e-6));
  CHECK(h_a.summary.min == Approx(mn_a).epsilon(1e-6));

  SECTION("histogram counts cover every sample")
  {
    for (const auto& h : hists) {
      std::uint64_t total = 0;
      for (auto c : h.counts) total += c;
      CHECK(total == h.summary.count);
      CHECK(h.counts.size() == 128);
    }
  }
  SECTION("complementary distances stay below twice the deformation bound")
  {
    CHECK(h_180.summary.max < 2.0 * h_pd.summary.max);
  }
  SECTION("alpha samples respect the closed-form bounds")
  {
    const auto [lo, hi] = alpha_bounds(r, g.d_si);
    CHECK(h_a.summary.min >= lo - 1e-9);
    CHECK(h_a.summary.max <= hi + 1e-9);
  }
}

TEST_CASE("distance distribution error paths")
{
  const Geometry g = presets::head();
  CHECK_THROWS_AS(distance_distributions(0.0, 100.0, g, 2.0), Error);
  CHECK_THROWS_AS(distance_distributions(100.0, 100.0, g, 0.0), Error);
  CHECK_THROWS_AS(distance_distributions(1300.0, 100.0, g, 2.0), Error);
}

TEST_CASE("perturbations")
{
  const Geometry g = presets::bead();

  SECTION("zero magnitude is the identity")
  {
    for (auto kind : {PerturbationKind::rotation_error_deg, PerturbationKind::dsi_error_mm,
                      PerturbationKind::principal_shift_mm}) {
      const Geometry p = perturb(g, {kind, 0.0});
      CHECK(p.theta_y == g.theta_y);
      CHECK(p.d_si == g.d_si);
      CHECK(p.p_u == g.p_u);
    }
  }
  SECTION("rotation error moves the complementary view")
  {
    const Geometry p = perturb(g, {PerturbationKind::rotation_error_deg, 0.5});
    const ProjMatrix a = compose_perspective(p, M_PI);
    const ProjMatrix b = compose_perspective(g, M_PI + 0.5 * M_PI / 180.0);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * a.cwiseAbs().maxCoeff());
  }
  SECTION("principal shift moves the world-origin projection")
  {
    const Geometry p = perturb(g, {PerturbationKind::principal_shift_mm, 3.2});
    const Vec2 o0 = project(compose_perspective(g, M_PI), Vec4(0, 0, 0, 1));
    const Vec2 o1 = project(compose_perspective(p, M_PI), Vec4(0, 0, 0, 1));
    CHECK((o1 - o0).norm() == Approx(3.2 / g.virtual_spacing_u()).epsilon(1e-9));
  }
  SECTION("dsi error keeps the nominal consumer geometry intact")
  {
    const Geometry p = perturb(g, {PerturbationKind::dsi_error_mm, -25.0});
    CHECK(p.d_si == g.d_si - 25.0);
    CHECK(p.d_sd == g.d_sd);
  }
  SECTION("rotation and shift perturbations invert")
  {
    for (auto [kind, mag] : {std::pair{PerturbationKind::rotation_error_deg, 0.5},
                             std::pair{PerturbationKind::principal_shift_mm, 3.2}}) {
      const Geometry fwd = perturb(g, {kind, mag});
      const Geometry back = perturb(fwd, {kind, -mag});
      CHECK(std::abs(back.theta_y - g.theta_y) < 1e-12);
      CHECK(std::abs(back.p_u - g.p_u) < 1e-12);
    }
  }
  SECTION("invalid results are rejected")
  {
    CHECK_THROWS_AS(perturb(g, {PerturbationKind::dsi_error_mm, 1e6}), Error);
    CHECK_THROWS_AS(perturb(g, {PerturbationKind::principal_shift_mm, 1e9}), Error);
  }
}

TEST_CASE("complementary alignment from matrices")
{
  const Geometry g = presets::bead();
  const ProjMatrix p0 = compose_perspective(g, 0.0);

  SECTION("an ideal pair needs no shift")
  {
    const AlignResult r = align_complementary(p0, compose_perspective(g, M_PI), g);
    CHECK(std::abs(r.shift_u) < 1e-9);
    CHECK(std::abs(r.shift_v) < 1e-9);
    CHECK(r.residual_mm < 1e-9);
  }
  SECTION("injected principal shifts are recovered exactly")
  {
    for (double px : {1.0, 10.0, 16.0}) {
      const Geometry p = perturb(g, {PerturbationKind::principal_shift_mm,
                                     px * g.virtual_spacing_u()});
      const AlignResult r = align_complementary(p0, compose_perspective(p, M_PI), g);
      CHECK(std::abs(r.shift_u - px) < 1e-6);
      CHECK(std::abs(r.shift_v) < 1e-6);
    }
  }
  SECTION("rank-deficient input is rejected")
  {
    ProjMatrix bad = p0;
    bad.row(0).setZero();
    CHECK_THROWS_AS(align_complementary(bad, p0, g), Error);
  }
}
