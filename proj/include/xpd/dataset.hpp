#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xpd/core.hpp"
#include "xpd/geometry.hpp"
#include "xpd/image.hpp"
#include "xpd/io.hpp"
#include "xpd/metrics.hpp"
#include "xpd/phantom.hpp"
#include "xpd/presets.hpp"
#include "xpd/projector.hpp"
#include "xpd/resample.hpp"
#include "xpd/views.hpp"

namespace xpd {

/// Everything needed to produce one training pair set: system geometry, the
/// view combination, the output coordinate space, augmentation view angles,
/// the display window for PNG export, and either a phantom count or a list of
/// volume stems to ingest.
struct DatasetRecipe {
  Geometry geom = presets::bead();
  Combo combo = Combo::comp_dup;
  Space space = Space::cartesian;
  std::vector<double> angles_deg{0, 15, 30, 45, 60, 75};
  DisplayWindow window{0.0, 6.0};
  std::string out_dir;
  std::uint64_t seed = 0;
  int phantom_count = 0;               ///< generated inputs when `volumes` is empty
  std::vector<std::string> volumes;    ///< raw/sidecar stems to ingest instead
  BeadPhantomSpec phantom;             ///< template; seed is overridden per phantom
  PolarSpec polar;                     ///< grid for polar/logpolar spaces
  bool export_png = true;

  void validate() const
  {
    geom.validate();
    window.validate();
    require(!angles_deg.empty(), ErrorCode::invalid_spec, "recipe needs at least one view angle");
    require(phantom_count > 0 || !volumes.empty(), ErrorCode::invalid_spec,
            "recipe needs a phantom count or input volumes");
  }

  /// Perspective views the combo consumes, relative to the base angle.
  std::vector<double> view_offsets_deg() const
  {
    switch (combo) {
      case Combo::single: return {0.0};
      case Combo::comp_dup:
      case Combo::comp_diff: return {0.0, 180.0};
      case Combo::ortho_naive:
      case Combo::ortho_opbp: return {0.0, 90.0};
      case Combo::triple: return {0.0, 90.0, 180.0};
    }
    return {0.0};
  }
};

namespace detail {

inline PolarSpec recipe_polar(const DatasetRecipe& r)
{
  PolarSpec s = r.polar;
  if (s.center_u < 0.0) s.center_u = r.geom.p_u;
  if (s.center_v < 0.0) s.center_v = r.geom.p_v;
  return s;
}

inline ProjImage to_recipe_space(const ProjImage& img, const DatasetRecipe& r)
{
  if (r.space == Space::cartesian) return img;
  const PolarSpec s = recipe_polar(r);
  return r.space == Space::polar ? to_polar(img, s) : to_log_polar(img, s);
}

}  // namespace detail

/// One training pair: the stacked network input and the orthogonal-projection
/// target, both in the recipe's coordinate space.
struct DatasetPair {
  ViewStack input;
  ProjImage target;
};

/// Projects the volume at the given base view angle and assembles the input
/// stack and target. Complementary views are flipped about the principal
/// point; the 90 deg auxiliary is used as-is or as an OPBP rendering.
inline DatasetPair generate_pair(const VoxelVolume& vol, const DatasetRecipe& recipe,
                                 double view_angle_deg)
{
  recipe.validate();
  const Geometry& g = recipe.geom;

  const ProjImage img0 = cone_project(vol, g, view_angle_deg);
  ProjImage target = parallel_project(vol, g, view_angle_deg, ParallelMode::exact);

  DatasetPair pair;
  if (recipe.combo == Combo::triple) {
    const ProjImage img90 = cone_project(vol, g, view_angle_deg + 90.0);
    const ProjImage img180 = cone_project(vol, g, view_angle_deg + 180.0);
    pair.input = stack_triple(detail::to_recipe_space(img0, recipe),
                              detail::to_recipe_space(img90, recipe),
                              detail::to_recipe_space(img180, recipe));
  } else {
    ProjImage aux;
    switch (recipe.combo) {
      case Combo::single:
        aux = img0;
        break;
      case Combo::comp_dup:
      case Combo::comp_diff:
        aux = flip_image(cone_project(vol, g, view_angle_deg + 180.0), g.p_u);
        break;
      case Combo::ortho_naive:
        aux = cone_project(vol, g, view_angle_deg + 90.0);
        break;
      case Combo::ortho_opbp:
        aux = render_opbp(cone_project(vol, g, view_angle_deg + 90.0), g, view_angle_deg);
        break;
      case Combo::triple:
        break;
    }
    pair.input = stack(detail::to_recipe_space(img0, recipe),
                       detail::to_recipe_space(aux, recipe), recipe.combo);
  }
  pair.target = detail::to_recipe_space(target, recipe);
  return pair;
}

namespace detail {

struct EntryFiles {
  std::string stem_input;   // + .r.raw/.g.raw/.b.raw/.json/.png
  std::string stem_target;  // + .raw/.json/.png
};

inline bool file_has_size(const std::filesystem::path& p, std::uintmax_t bytes)
{
  std::error_code ec;
  return std::filesystem::exists(p, ec) && std::filesystem::file_size(p, ec) == bytes;
}

inline bool entry_complete(const EntryFiles& f, std::size_t pixels, bool png)
{
  namespace fs = std::filesystem;
  const std::uintmax_t raw_bytes = pixels * sizeof(float);
  bool ok = file_has_size(f.stem_input + ".r.raw", raw_bytes) &&
            file_has_size(f.stem_input + ".g.raw", raw_bytes) &&
            file_has_size(f.stem_input + ".b.raw", raw_bytes) &&
            file_has_size(f.stem_target + ".raw", raw_bytes);
  std::error_code ec;
  ok = ok && fs::exists(f.stem_input + ".json", ec) && fs::exists(f.stem_target + ".json", ec);
  if (png)
    ok = ok && fs::exists(f.stem_input + ".png", ec) && fs::exists(f.stem_target + ".png", ec);
  return ok;
}

inline void write_stack(const ViewStack& stack, const DatasetRecipe& recipe,
                        const std::string& stem, const std::vector<double>& source_views)
{
  stack.validate();
  write_bytes(stem + ".r.raw", stack.r.data.data(), stack.r.data.size() * sizeof(float));
  write_bytes(stem + ".g.raw", stack.g.data.data(), stack.g.data.size() * sizeof(float));
  write_bytes(stem + ".b.raw", stack.b.data.data(), stack.b.data.size() * sizeof(float));
  json j = image_header_json(stack.r);
  j["combo"] = to_string(stack.combo);
  j["source_views_deg"] = source_views;
  j["window"] = {{"lo", recipe.window.lo}, {"hi", recipe.window.hi}};
  write_text(stem + ".json", j.dump(2) + "\n");
  if (recipe.export_png) {
    ViewStack disp;
    disp.combo = stack.combo;
    disp.r = window_to_display(stack.r, recipe.window);
    disp.g = window_to_display(stack.g, recipe.window);
    disp.b = window_to_display(stack.b, recipe.window);
    write_png_rgb(disp, stem + ".png");
  }
}

// Writes `text` only when the file is missing or differs, keeping reruns
// byte- and mtime-stable.
inline void write_text_if_changed(const std::string& path, const std::string& text)
{
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (f.good()) {
    const auto size = static_cast<std::size_t>(f.tellg());
    if (size == text.size()) {
      std::string existing(size, '\0');
      f.seekg(0);
      f.read(existing.data(), static_cast<std::streamsize>(size));
      if (f.good() && existing == text) return;
    }
  }
  write_text(path, text);
}

}  // namespace detail

/// Generates the full batch (inputs x view angles), writing every pair and a
/// manifest.json describing it. Reruns skip entries whose files already exist
/// with the right sizes, so a completed output directory is never rewritten.
inline json batch_generate(const DatasetRecipe& recipe)
{
  recipe.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(recipe.out_dir, ec);
  require(fs::is_directory(recipe.out_dir, ec), ErrorCode::io_error,
          "cannot create output directory '" + recipe.out_dir + "'");

  const bool from_phantoms = recipe.volumes.empty();
  const int n_inputs = from_phantoms ? recipe.phantom_count : static_cast<int>(recipe.volumes.size());
  const std::size_t pixels = static_cast<std::size_t>(recipe.geom.det_nu) * recipe.geom.det_nv;
  const std::size_t out_pixels =
      recipe.space == Space::cartesian
          ? pixels
          : static_cast<std::size_t>(recipe.polar.n_rho) * recipe.polar.n_phi;

  json manifest;
  manifest["combo"] = to_string(recipe.combo);
  manifest["space"] = to_string(recipe.space);
  manifest["seed"] = recipe.seed;
  manifest["angles_deg"] = recipe.angles_deg;
  manifest["window"] = {{"lo", recipe.window.lo}, {"hi", recipe.window.hi}};
  manifest["entries"] = json::array();

  for (int idx = 0; idx < n_inputs; ++idx) {
    const std::uint64_t seed = recipe.seed + static_cast<std::uint64_t>(idx);
    char tag[32];
    std::snprintf(tag, sizeof(tag), "ph%04d", idx);
    const std::string input_tag =
        from_phantoms ? tag : fs::path(recipe.volumes[static_cast<std::size_t>(idx)]).stem().string();

    // Probe completeness first so finished inputs cost nothing on rerun.
    std::vector<std::pair<double, detail::EntryFiles>> pending;
    for (double angle : recipe.angles_deg) {
      char stem[128];
      std::snprintf(stem, sizeof(stem), "%s_a%03d", input_tag.c_str(),
                    static_cast<int>(std::lround(angle)));
      detail::EntryFiles files;
      files.stem_input = (fs::path(recipe.out_dir) / (std::string(stem) + "_input")).string();
      files.stem_target = (fs::path(recipe.out_dir) / (std::string(stem) + "_target")).string();

      json entry;
      entry["index"] = idx;
      entry["angle_deg"] = angle;
      entry["combo"] = to_string(recipe.combo);
      if (from_phantoms)
        entry["seed"] = seed;
      else
        entry["source"] = recipe.volumes[static_cast<std::size_t>(idx)];
      entry["input_stem"] = fs::path(files.stem_input).filename().string();
      entry["target_stem"] = fs::path(files.stem_target).filename().string();
      manifest["entries"].push_back(entry);

      if (!detail::entry_complete(files, out_pixels, recipe.export_png))
        pending.emplace_back(angle, files);
    }
    if (pending.empty()) continue;

    VoxelVolume vol;
    if (from_phantoms) {
      BeadPhantomSpec spec = recipe.phantom;
      spec.seed = seed;
      vol = generate(spec);
    } else {
      vol = load_volume(recipe.volumes[static_cast<std::size_t>(idx)]);
    }

    for (const auto& [angle, files] : pending) {
      DatasetPair pair = generate_pair(vol, recipe, angle);
      std::vector<double> sources;
      for (double off : recipe.view_offsets_deg()) sources.push_back(angle + off);
      detail::write_stack(pair.input, recipe, files.stem_input, sources);
      write_image(pair.target, files.stem_target);
      if (recipe.export_png)
        write_png_gray(window_to_display(pair.target, recipe.window), files.stem_target + ".png");
    }
  }

  detail::write_text_if_changed((fs::path(recipe.out_dir) / "manifest.json").string(),
                                manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace xpd
