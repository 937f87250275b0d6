#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>
#include <json.hpp>

#include "xpd/analysis.hpp"
#include "xpd/core.hpp"
#include "xpd/geometry.hpp"
#include "xpd/image.hpp"
#include "xpd/metrics.hpp"
#include "xpd/phantom.hpp"
#include "xpd/views.hpp"

namespace xpd {

using json = nlohmann::json;

// File pairs use a stem: <stem>.raw holds little-endian float32 samples and
// <stem>.json the descriptive sidecar.

namespace detail {

inline std::string strip_raw_suffix(const std::string& path)
{
  const std::string suffix = ".raw";
  if (path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return path.substr(0, path.size() - suffix.size());
  return path;
}

inline void write_bytes(const std::string& path, const void* data, std::size_t bytes)
{
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorCode::io_error, "cannot open '" + path + "' for writing");
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  require(f.good(), ErrorCode::io_error, "short write to '" + path + "'");
}

inline std::vector<float> read_floats(const std::string& path, std::size_t expected_count)
{
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  require(f.good(), ErrorCode::io_error, "cannot open '" + path + "'");
  const auto bytes = static_cast<std::size_t>(f.tellg());
  require(bytes == expected_count * sizeof(float), ErrorCode::format_error,
          "'" + path + "' holds " + std::to_string(bytes) + " bytes, sidecar expects " +
              std::to_string(expected_count * sizeof(float)));
  std::vector<float> out(expected_count);
  f.seekg(0);
  f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  require(f.good(), ErrorCode::io_error, "short read from '" + path + "'");
  return out;
}

inline void write_text(const std::string& path, const std::string& text)
{
  write_bytes(path, text.data(), text.size());
}

inline json load_json(const std::string& path)
{
  std::ifstream f(path);
  require(f.good(), ErrorCode::io_error, "cannot open '" + path + "'");
  json j = json::parse(f, nullptr, false);
  require(!j.is_discarded(), ErrorCode::format_error, "'" + path + "' is not valid JSON");
  return j;
}

template <class T>
T json_get(const json& j, const std::string& key, const std::string& path)
{
  require(j.contains(key), ErrorCode::format_error, "'" + path + "' lacks key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::format_error, "'" + path + "' key '" + key + "' has the wrong type");
  }
}

inline Vec3 json_vec3(const json& j, const std::string& key, const std::string& path)
{
  require(j.contains(key), ErrorCode::format_error, "'" + path + "' lacks key '" + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return Vec3::Constant(v.get<double>());
  require(v.is_array() && v.size() == 3, ErrorCode::format_error,
          "'" + path + "' key '" + key + "' must be a number or 3-array");
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Voxel volumes

inline void write_volume(const VoxelVolume& vol, const std::string& stem)
{
  vol.validate();
  detail::write_bytes(stem + ".raw", vol.data.data(), vol.data.size() * sizeof(float));
  json j;
  j["nx"] = vol.nx;
  j["ny"] = vol.ny;
  j["nz"] = vol.nz;
  j["spacing_mm"] = {vol.spacing.x(), vol.spacing.y(), vol.spacing.z()};
  j["origin_mm"] = {vol.origin.x(), vol.origin.y(), vol.origin.z()};
  detail::write_text(stem + ".json", j.dump(2) + "\n");
}

inline VoxelVolume load_volume(const std::string& path)
{
  const std::string stem = detail::strip_raw_suffix(path);
  const json j = detail::load_json(stem + ".json");
  VoxelVolume vol;
  vol.nx = detail::json_get<int>(j, "nx", stem + ".json");
  vol.ny = detail::json_get<int>(j, "ny", stem + ".json");
  vol.nz = detail::json_get<int>(j, "nz", stem + ".json");
  require(vol.nx > 0 && vol.ny > 0 && vol.nz > 0, ErrorCode::format_error,
          "volume dims in '" + stem + ".json' must be positive");
  vol.spacing = detail::json_vec3(j, "spacing_mm", stem + ".json");
  vol.origin = detail::json_vec3(j, "origin_mm", stem + ".json");
  vol.data = detail::read_floats(stem + ".raw",
                                 static_cast<std::size_t>(vol.nx) * vol.ny * vol.nz);
  vol.validate();
  return vol;
}

// ---------------------------------------------------------------------------
// Projection images

inline json image_header_json(const ProjImage& img)
{
  json j;
  j["nu"] = img.nu;
  j["nv"] = img.nv;
  j["spacing_u"] = img.spacing_u;
  j["spacing_v"] = img.spacing_v;
  j["space"] = to_string(img.space);
  j["view_angle_deg"] = img.view_angle_deg;
  j["kind"] = to_string(img.kind);
  if (img.polar) {
    const PolarSpec& s = *img.polar;
    j["polar"] = {{"n_rho", s.n_rho},         {"n_phi", s.n_phi},
                  {"rho_spacing", s.rho_spacing}, {"phi_spacing", s.phi_spacing},
                  {"log_initial_rho", s.log_initial_rho}, {"log_k", s.log_k},
                  {"center_u", s.center_u},   {"center_v", s.center_v}};
  }
  return j;
}

inline void parse_image_header(const json& j, const std::string& path, ProjImage& img)
{
  img.nu = detail::json_get<int>(j, "nu", path);
  img.nv = detail::json_get<int>(j, "nv", path);
  require(img.nu > 0 && img.nv > 0, ErrorCode::format_error,
          "image dims in '" + path + "' must be positive");
  img.spacing_u = detail::json_get<double>(j, "spacing_u", path);
  img.spacing_v = detail::json_get<double>(j, "spacing_v", path);
  img.space = space_from_string(detail::json_get<std::string>(j, "space", path));
  img.view_angle_deg = detail::json_get<double>(j, "view_angle_deg", path);
  img.kind = kind_from_string(detail::json_get<std::string>(j, "kind", path));
  if (j.contains("polar")) {
    const json& p = j.at("polar");
    PolarSpec s;
    s.n_rho = detail::json_get<int>(p, "n_rho", path);
    s.n_phi = detail::json_get<int>(p, "n_phi", path);
    s.rho_spacing = detail::json_get<double>(p, "rho_spacing", path);
    s.phi_spacing = detail::json_get<double>(p, "phi_spacing", path);
    s.log_initial_rho = detail::json_get<double>(p, "log_initial_rho", path);
    s.log_k = detail::json_get<double>(p, "log_k", path);
    s.center_u = detail::json_get<double>(p, "center_u", path);
    s.center_v = detail::json_get<double>(p, "center_v", path);
    img.polar = s;
  }
}

inline void write_image(const ProjImage& img, const std::string& stem)
{
  img.validate();
  detail::write_bytes(stem + ".raw", img.data.data(), img.data.size() * sizeof(float));
  detail::write_text(stem + ".json", image_header_json(img).dump(2) + "\n");
}

inline ProjImage load_image(const std::string& path)
{
  const std::string stem = detail::strip_raw_suffix(path);
  const json j = detail::load_json(stem + ".json");
  ProjImage img;
  parse_image_header(j, stem + ".json", img);
  img.data = detail::read_floats(stem + ".raw", static_cast<std::size_t>(img.nu) * img.nv);
  img.validate();
  return img;
}

// ---------------------------------------------------------------------------
// Geometry config: flat "key = value" lines.

inline void write_geometry(const Geometry& g, const std::string& path)
{
  g.validate();
  std::ostringstream os;
  os.precision(17);
  os << "d_sd_mm = " << g.d_sd << "\n"
     << "d_si_mm = " << g.d_si << "\n"
     << "det_nu = " << g.det_nu << "\n"
     << "det_nv = " << g.det_nv << "\n"
     << "s_u_mm = " << g.s_u << "\n"
     << "s_v_mm = " << g.s_v << "\n"
     << "p_u_px = " << g.p_u << "\n"
     << "p_v_px = " << g.p_v << "\n"
     << "theta_x_rad = " << g.theta_x << "\n"
     << "theta_y_rad = " << g.theta_y << "\n"
     << "theta_z_rad = " << g.theta_z << "\n";
  detail::write_text(path, os.str());
}

inline Geometry load_geometry(const std::string& path)
{
  std::ifstream f(path);
  require(f.good(), ErrorCode::io_error, "cannot open '" + path + "'");
  std::map<std::string, double> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    require(eq != std::string::npos, ErrorCode::format_error,
            path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      kv[key] = std::stod(val);
    } catch (const std::exception&) {
      fail(ErrorCode::format_error, path + ":" + std::to_string(lineno) + ": bad number '" + val + "'");
    }
  }
  const auto get = [&](const char* key) {
    const auto it = kv.find(key);
    require(it != kv.end(), ErrorCode::format_error, path + ": missing key '" + std::string(key) + "'");
    return it->second;
  };
  Geometry g;
  g.d_sd = get("d_sd_mm");
  g.d_si = get("d_si_mm");
  g.det_nu = static_cast<int>(get("det_nu"));
  g.det_nv = static_cast<int>(get("det_nv"));
  g.s_u = get("s_u_mm");
  g.s_v = get("s_v_mm");
  g.p_u = get("p_u_px");
  g.p_v = get("p_v_px");
  g.theta_x = get("theta_x_rad");
  g.theta_y = get("theta_y_rad");
  g.theta_z = get("theta_z_rad");
  static const char* known[] = {"d_sd_mm", "d_si_mm", "det_nu", "det_nv", "s_u_mm", "s_v_mm",
                                "p_u_px", "p_v_px", "theta_x_rad", "theta_y_rad", "theta_z_rad"};
  for (const auto& [key, _] : kv) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    require(ok, ErrorCode::format_error, path + ": unknown key '" + key + "'");
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// PNG export (8-bit, lossless). Inputs must already be in display range.

namespace detail {

inline void write_png(const std::string& path, int w, int h, int channels,
                      const std::vector<unsigned char>& bytes)
{
  FILE* fp = std::fopen(path.c_str(), "wb");
  require(fp != nullptr, ErrorCode::io_error, "cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    fail(ErrorCode::io_error, "libpng failed writing '" + path + "'");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y)
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * w * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

inline unsigned char quantize_display(float x)
{
  double t = std::lround(static_cast<double>(x));
  if (t < 0.0) t = 0.0;
  if (t > 255.0) t = 255.0;
  return static_cast<unsigned char>(t);
}

}  // namespace detail

inline void write_png_gray(const ProjImage& display_img, const std::string& path)
{
  display_img.validate();
  std::vector<unsigned char> bytes(display_img.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = detail::quantize_display(display_img.data[i]);
  detail::write_png(path, display_img.nu, display_img.nv, 1, bytes);
}

inline void write_png_rgb(const ViewStack& display_stack, const std::string& path)
{
  display_stack.validate();
  const std::size_t n = display_stack.r.data.size();
  std::vector<unsigned char> bytes(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    bytes[3 * i + 0] = detail::quantize_display(display_stack.r.data[i]);
    bytes[3 * i + 1] = detail::quantize_display(display_stack.g.data[i]);
    bytes[3 * i + 2] = detail::quantize_display(display_stack.b.data[i]);
  }
  detail::write_png(path, display_stack.r.nu, display_stack.r.nv, 3, bytes);
}

// ---------------------------------------------------------------------------
// Histograms and metric reports

inline void write_histograms_csv(const std::vector<DistanceHistogram>& hists,
                                 const std::string& path)
{
  std::ostringstream os;
  os.precision(12);
  os << "metric,bin_lo,bin_hi,count\n";
  for (const auto& h : hists)
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      os << to_string(h.metric) << ',' << h.bin_lo + i * h.bin_width << ','
         << h.bin_lo + (i + 1) * h.bin_width << ',' << h.counts[i] << '\n';
  detail::write_text(path, os.str());
}

inline json summary_json(const std::vector<DistanceHistogram>& hists)
{
  json j;
  for (const auto& h : hists) {
    j[to_string(h.metric)] = {{"min", h.summary.min}, {"max", h.summary.max},
                              {"mean", h.summary.mean}, {"p50", h.summary.p50},
                              {"p99", h.summary.p99}, {"count", h.summary.count}};
  }
  return j;
}

inline json metrics_report_json(const DisplayWindow& w, double rmse_value, double ssim_value,
                                bool has_rmse, bool has_ssim)
{
  json j;
  if (has_rmse) j["rmse"] = rmse_value;
  if (has_ssim) j["ssim"] = ssim_value;
  j["window_lo"] = w.lo;
  j["window_hi"] = w.hi;
  return j;
}

}  // namespace xpd
