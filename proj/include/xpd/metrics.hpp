#pragma once

#include <cmath>
#include <vector>

#include "xpd/core.hpp"
#include "xpd/image.hpp"

namespace xpd {

/// Linear display window mapping [lo, hi] line-integral units onto [0, 255].
struct DisplayWindow {
  double lo = 0.0;
  double hi = 6.0;

  void validate() const
  {
    require(hi > lo, ErrorCode::invalid_spec, "display window needs hi > lo");
  }
};

/// Clamps and rescales to the [0, 255] display range, kept as float.
inline ProjImage window_to_display(const ProjImage& img, const DisplayWindow& w)
{
  img.validate();
  w.validate();
  ProjImage out = img;
  const double scale = 255.0 / (w.hi - w.lo);
  for (float& x : out.data) {
    double t = (x - w.lo) * scale;
    if (t < 0.0) t = 0.0;
    if (t > 255.0) t = 255.0;
    x = static_cast<float>(t);
  }
  return out;
}

namespace detail {
inline void check_comparable(const ProjImage& a, const ProjImage& b)
{
  a.validate();
  b.validate();
  require(a.nu == b.nu && a.nv == b.nv, ErrorCode::dimension_mismatch,
          "metric inputs differ in size");
  require(a.space == b.space, ErrorCode::space_mismatch,
          "metric inputs live in different coordinate spaces");
}
}  // namespace detail

inline double rmse(const ProjImage& a, const ProjImage& b)
{
  detail::check_comparable(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.data.size()));
}

/// Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, averaged over pixels whose window fits entirely.
inline double ssim(const ProjImage& a, const ProjImage& b, double dynamic_range = 255.0)
{
  detail::check_comparable(a, b);
  constexpr int kRadius = 5;
  constexpr double kSigma = 1.5;
  require(a.nu > 2 * kRadius && a.nv > 2 * kRadius, ErrorCode::dimension_mismatch,
          "image smaller than the SSIM window");

  double w[2 * kRadius + 1];
  double wsum = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    w[i + kRadius] = std::exp(-0.5 * i * i / (kSigma * kSigma));
    wsum += w[i + kRadius];
  }
  for (double& x : w) x /= wsum;

  const int nu = a.nu, nv = a.nv;
  const auto blur = [&](const std::vector<double>& src) {
    std::vector<double> tmp(src.size(), 0.0), dst(src.size(), 0.0);
    for (int v = 0; v < nv; ++v)
      for (int u = kRadius; u < nu - kRadius; ++u) {
        double s = 0.0;
        for (int i = -kRadius; i <= kRadius; ++i)
          s += w[i + kRadius] * src[static_cast<std::size_t>(v) * nu + u + i];
        tmp[static_cast<std::size_t>(v) * nu + u] = s;
      }
    for (int v = kRadius; v < nv - kRadius; ++v)
      for (int u = kRadius; u < nu - kRadius; ++u) {
        double s = 0.0;
        for (int i = -kRadius; i <= kRadius; ++i)
          s += w[i + kRadius] * tmp[static_cast<std::size_t>(v + i) * nu + u];
        dst[static_cast<std::size_t>(v) * nu + u] = s;
      }
    return dst;
  };

  const std::size_t n = a.data.size();
  std::vector<double> xa(n), xb(n), xaa(n), xbb(n), xab(n);
  for (std::size_t i = 0; i < n; ++i) {
    xa[i] = a.data[i];
    xb[i] = b.data[i];
    xaa[i] = xa[i] * xa[i];
    xbb[i] = xb[i] * xb[i];
    xab[i] = xa[i] * xb[i];
  }
  const std::vector<double> mu_a = blur(xa), mu_b = blur(xb);
  const std::vector<double> m_aa = blur(xaa), m_bb = blur(xbb), m_ab = blur(xab);

  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  double acc = 0.0;
  std::size_t count = 0;
  for (int v = kRadius; v < nv - kRadius; ++v)
    for (int u = kRadius; u < nu - kRadius; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * nu + u;
      const double va = m_aa[i] - mu_a[i] * mu_a[i];
      const double vb = m_bb[i] - mu_b[i] * mu_b[i];
      const double cov = m_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
      acc += num / den;
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace xpd
