// Command-line front end: phantom generation, projection, resampling, view
// stacking, geometric analysis, metrics, and batch dataset generation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xpd/xpd.hpp"

namespace fs = std::filesystem;
using namespace xpd;

namespace {

Geometry load_geometry_arg(const std::string& arg)
{
  if (presets::is_preset_name(arg) && !fs::exists(arg)) return presets::by_name(arg);
  return load_geometry(arg);
}

DisplayWindow parse_window(const std::string& arg)
{
  const auto comma = arg.find(',');
  require(comma != std::string::npos, ErrorCode::invalid_spec,
          "--window expects 'lo,hi', got '" + arg + "'");
  try {
    return DisplayWindow{std::stod(arg.substr(0, comma)), std::stod(arg.substr(comma + 1))};
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_spec, "--window expects numbers 'lo,hi', got '" + arg + "'");
  }
}

std::string out_path(const std::string& out_dir, const std::string& name)
{
  if (out_dir.empty()) return name;
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / name).string();
}

void export_image(const ProjImage& img, const std::string& stem, bool png,
                  const DisplayWindow& window)
{
  write_image(img, stem);
  if (png) write_png_gray(window_to_display(img, window), stem + ".png");
  std::cout << stem << ".raw\n";
}

struct GlobalOpts {
  std::string geometry;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string window = "0,6";
};

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"cone-beam perspective deformation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts opt;
  app.add_option("--geometry", opt.geometry,
                 "geometry config file or preset name (bead, chest, head)")
      ->envname("XPD_GEOMETRY");
  app.add_option("--seed", opt.seed, "base random seed");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--window", opt.window, "display window 'lo,hi' for PNG export and metrics");

  const auto geometry_or_default = [&]() {
    return opt.geometry.empty() ? presets::bead() : load_geometry_arg(opt.geometry);
  };

  // ---- phantom gen
  auto* phantom_cmd = app.add_subcommand("phantom", "bead phantom generation");
  auto* phantom_gen = phantom_cmd->add_subcommand("gen", "generate a random bead phantom");
  struct {
    std::string name = "phantom";
    int size = 512;
    double spacing = 0.625;
    int beads_min = 40, beads_max = 60;
  } ph;
  phantom_gen->add_option("--name", ph.name, "output stem");
  phantom_gen->add_option("--size", ph.size, "voxels per axis");
  phantom_gen->add_option("--spacing", ph.spacing, "voxel size in mm");
  phantom_gen->add_option("--beads-min", ph.beads_min, "minimum bead count");
  phantom_gen->add_option("--beads-max", ph.beads_max, "maximum bead count");
  phantom_gen->callback([&]() {
    BeadPhantomSpec spec;
    spec.seed = opt.seed;
    spec.nx = spec.ny = spec.nz = ph.size;
    spec.spacing_mm = ph.spacing;
    spec.beads_min = ph.beads_min;
    spec.beads_max = ph.beads_max;
    const VoxelVolume vol = generate(spec);
    const std::string stem = out_path(opt.out_dir, ph.name);
    write_volume(vol, stem);
    std::cout << stem << ".raw\n";
  });

  // ---- project cone|parallel
  auto* project_cmd = app.add_subcommand("project", "forward projection");
  struct {
    std::string volume;
    double angle = 0.0;
    double mu_water = 0.02;
    std::string name;
    std::string mode = "exact";
    bool png = false;
  } pr;
  for (const char* sub : {"cone", "parallel"}) {
    auto* cmd = project_cmd->add_subcommand(
        sub, sub == std::string("cone") ? "cone-beam projection onto the virtual detector"
                                        : "parallel-beam projection onto the virtual detector");
    cmd->add_option("--volume", pr.volume, "input volume stem or .raw path")->required();
    cmd->add_option("--angle", pr.angle, "view angle in degrees");
    cmd->add_option("--mu-water", pr.mu_water, "attenuation of water in 1/mm");
    cmd->add_option("--name", pr.name, "output stem");
    cmd->add_flag("--png", pr.png, "also write a windowed 8-bit PNG");
    if (sub == std::string("parallel"))
      cmd->add_option("--mode", pr.mode, "'exact' or 'far-source' (distant-source cone approximation)");
    cmd->callback([&, sub]() {
      const Geometry g = geometry_or_default();
      const VoxelVolume vol = load_volume(pr.volume);
      const bool cone = sub == std::string("cone");
      ProjImage img;
      if (cone) {
        img = cone_project(vol, g, pr.angle, pr.mu_water);
      } else {
        require(pr.mode == "exact" || pr.mode == "far-source", ErrorCode::invalid_spec,
                "--mode must be 'exact' or 'far-source'");
        img = parallel_project(vol, g, pr.angle,
                               pr.mode == "far-source" ? ParallelMode::far_source
                                                  : ParallelMode::exact,
                               pr.mu_water);
      }
      char def_name[64];
      std::snprintf(def_name, sizeof(def_name), "%s_a%03d", cone ? "cone" : "parallel",
                    static_cast<int>(std::lround(pr.angle)));
      const std::string stem = out_path(opt.out_dir, pr.name.empty() ? def_name : pr.name);
      export_image(img, stem, pr.png, parse_window(opt.window));
    });
  }

  // ---- resample polar|logpolar|inverse
  auto* resample_cmd = app.add_subcommand("resample", "coordinate-space conversions");
  struct {
    std::string input;
    std::string name;
    int n_rho = 512, n_phi = 512;
    double rho_spacing = 0.375;
    double log_initial_rho = 0.0075;
    double center_u = -1.0, center_v = -1.0;
    int nu = 512, nv = 512;
    double spacing = 0.625;
    bool png = false;
  } rs;
  for (const char* sub : {"polar", "logpolar", "inverse"}) {
    auto* cmd = resample_cmd->add_subcommand(sub, sub == std::string("inverse")
                                                      ? "polar/log-polar back to cartesian"
                                                      : "cartesian to polar space");
    cmd->add_option("--in", rs.input, "input image stem or .raw path")->required();
    cmd->add_option("--name", rs.name, "output stem");
    cmd->add_flag("--png", rs.png, "also write a windowed 8-bit PNG");
    if (sub != std::string("inverse")) {
      cmd->add_option("--nrho", rs.n_rho, "radial samples");
      cmd->add_option("--nphi", rs.n_phi, "angular samples");
      cmd->add_option("--rho-spacing", rs.rho_spacing, "radial spacing in mm (polar)");
      cmd->add_option("--log-initial-rho", rs.log_initial_rho,
                      "radius of the first log-polar column in mm");
      cmd->add_option("--center-u", rs.center_u, "transform origin u (px)");
      cmd->add_option("--center-v", rs.center_v, "transform origin v (px)");
    } else {
      cmd->add_option("--nu", rs.nu, "output width");
      cmd->add_option("--nv", rs.nv, "output height");
      cmd->add_option("--spacing", rs.spacing, "output pixel spacing in mm");
    }
    cmd->callback([&, sub]() {
      const ProjImage input = load_image(rs.input);
      ProjImage out;
      if (sub == std::string("inverse")) {
        CartesianGridSpec tgt;
        tgt.nu = rs.nu;
        tgt.nv = rs.nv;
        tgt.spacing_u = tgt.spacing_v = rs.spacing;
        out = from_polar(input, tgt);
      } else {
        PolarSpec spec;
        spec.n_rho = rs.n_rho;
        spec.n_phi = rs.n_phi;
        spec.phi_spacing = 360.0 / rs.n_phi;
        spec.rho_spacing = rs.rho_spacing;
        spec.log_initial_rho = rs.log_initial_rho;
        spec.center_u = rs.center_u;
        spec.center_v = rs.center_v;
        if (spec.center_u < 0.0 && !opt.geometry.empty()) {
          const Geometry g = geometry_or_default();
          spec.center_u = g.p_u;
          spec.center_v = g.p_v;
        }
        out = sub == std::string("polar") ? to_polar(input, spec) : to_log_polar(input, spec);
      }
      const std::string stem =
          out_path(opt.out_dir, rs.name.empty() ? std::string("resample_") + sub : rs.name);
      export_image(out, stem, rs.png, parse_window(opt.window));
    });
  }

  // ---- views flip|stack|opbp|diff
  auto* views_cmd = app.add_subcommand("views", "view combination building blocks");
  struct {
    std::string in0, aux, third;
    std::string combo = "comp_dup";
    double base_angle = 0.0;
    double p_u = -1.0;
    std::string name;
    bool png = false;
  } vw;
  {
    auto* cmd = views_cmd->add_subcommand("flip", "mirror about the principal-point column");
    cmd->add_option("--in", vw.in0, "input image")->required();
    cmd->add_option("--pu", vw.p_u, "flip axis in px (default: geometry principal point)");
    cmd->add_option("--name", vw.name, "output stem");
    cmd->add_flag("--png", vw.png, "also write a windowed PNG");
    cmd->callback([&]() {
      const double axis = vw.p_u >= 0.0 ? vw.p_u : geometry_or_default().p_u;
      const ProjImage out = flip_image(load_image(vw.in0), axis);
      export_image(out, out_path(opt.out_dir, vw.name.empty() ? "flipped" : vw.name), vw.png,
                   parse_window(opt.window));
    });
  }
  {
    auto* cmd = views_cmd->add_subcommand("stack", "RGB stack of two (or three) views");
    cmd->add_option("--in0", vw.in0, "reference view image")->required();
    cmd->add_option("--aux", vw.aux, "auxiliary view image (already flipped/aligned)");
    cmd->add_option("--third", vw.third, "180 deg image for the triple combo");
    cmd->add_option("--combo", vw.combo,
                    "single | comp_dup | comp_diff | ortho_naive | ortho_opbp | triple");
    cmd->add_option("--name", vw.name, "output stem");
    cmd->callback([&]() {
      const Combo combo = combo_from_string(vw.combo);
      const ProjImage img0 = load_image(vw.in0);
      ViewStack st;
      if (combo == Combo::triple) {
        require(!vw.aux.empty() && !vw.third.empty(), ErrorCode::invalid_spec,
                "triple needs --aux (90 deg) and --third (180 deg)");
        st = stack_triple(img0, load_image(vw.aux), load_image(vw.third));
      } else {
        const ProjImage aux = vw.aux.empty() ? img0 : load_image(vw.aux);
        st = stack(img0, aux, combo);
      }
      const std::string stem = out_path(opt.out_dir, vw.name.empty() ? "stack" : vw.name);
      const DisplayWindow w = parse_window(opt.window);
      detail::write_bytes(stem + ".r.raw", st.r.data.data(), st.r.data.size() * sizeof(float));
      detail::write_bytes(stem + ".g.raw", st.g.data.data(), st.g.data.size() * sizeof(float));
      detail::write_bytes(stem + ".b.raw", st.b.data.data(), st.b.data.size() * sizeof(float));
      json j = image_header_json(st.r);
      j["combo"] = to_string(st.combo);
      detail::write_text(stem + ".json", j.dump(2) + "\n");
      ViewStack disp{window_to_display(st.r, w), window_to_display(st.g, w),
                     window_to_display(st.b, w), st.combo};
      write_png_rgb(disp, stem + ".png");
      std::cout << stem << ".png\n";
    });
  }
  {
    auto* cmd = views_cmd->add_subcommand("opbp",
                                          "rasterize OPBP stripes of a 90 deg view onto the "
                                          "base-view detector");
    cmd->add_option("--in90", vw.in0, "90 deg perspective image")->required();
    cmd->add_option("--base-angle", vw.base_angle, "base view angle in degrees");
    cmd->add_option("--name", vw.name, "output stem");
    cmd->add_flag("--png", vw.png, "also write a windowed PNG");
    cmd->callback([&]() {
      const ProjImage out =
          render_opbp(load_image(vw.in0), geometry_or_default(), vw.base_angle);
      export_image(out, out_path(opt.out_dir, vw.name.empty() ? "opbp" : vw.name), vw.png,
                   parse_window(opt.window));
    });
  }
  {
    auto* cmd = views_cmd->add_subcommand("diff", "signed difference of two images");
    cmd->add_option("--a", vw.in0, "first image")->required();
    cmd->add_option("--b", vw.aux, "second image")->required();
    cmd->add_option("--name", vw.name, "output stem");
    cmd->callback([&]() {
      const ProjImage out = difference_image(load_image(vw.in0), load_image(vw.aux));
      export_image(out, out_path(opt.out_dir, vw.name.empty() ? "diff" : vw.name), false,
                   parse_window(opt.window));
    });
  }

  // ---- analyze distances|alpha|perturb|align
  auto* analyze_cmd = app.add_subcommand("analyze", "deformation and calibration analysis");
  struct {
    double diameter = 320.0, height = 320.0, step = 2.0;
    double dsi = 600.0, half_depth = 160.0;
    std::string kind = "rotation";
    double magnitude = 0.0;
    std::string name = "perturbed.geom";
    std::string geometry2;
    double angle0 = 0.0;
  } an;
  {
    auto* cmd = analyze_cmd->add_subcommand(
        "distances", "d_PD / d_90 / d_180 / alpha distributions over a cylinder");
    cmd->add_option("--diameter", an.diameter, "cylinder diameter in mm");
    cmd->add_option("--height", an.height, "cylinder height in mm");
    cmd->add_option("--step", an.step, "grid step in mm");
    cmd->callback([&]() {
      const auto hists =
          distance_distributions(an.diameter, an.height, geometry_or_default(), an.step);
      const json summary = summary_json(hists);
      if (!opt.out_dir.empty()) {
        write_histograms_csv(hists, out_path(opt.out_dir, "histograms.csv"));
        detail::write_text(out_path(opt.out_dir, "summary.json"), summary.dump(2) + "\n");
      }
      std::cout << summary.dump(2) << "\n";
    });
  }
  {
    auto* cmd = analyze_cmd->add_subcommand("alpha", "closed-form alpha range for a half depth");
    cmd->add_option("--dsi", an.dsi, "source-to-isocenter distance in mm");
    cmd->add_option("--half-depth", an.half_depth, "object half depth in mm");
    cmd->callback([&]() {
      const auto [lo, hi] = alpha_bounds(an.half_depth, an.dsi);
      json j{{"alpha_min", lo}, {"alpha_max", hi}, {"d_si_mm", an.dsi},
             {"half_depth_mm", an.half_depth}};
      std::cout << j.dump(2) << "\n";
    });
  }
  {
    auto* cmd = analyze_cmd->add_subcommand("perturb", "apply a geometric acquisition error");
    cmd->add_option("--kind", an.kind, "rotation | dsi | shift");
    cmd->add_option("--magnitude", an.magnitude, "deg for rotation, mm otherwise")->required();
    cmd->add_option("--name", an.name, "output config name");
    cmd->callback([&]() {
      PerturbationKind kind;
      if (an.kind == "rotation")
        kind = PerturbationKind::rotation_error_deg;
      else if (an.kind == "dsi")
        kind = PerturbationKind::dsi_error_mm;
      else if (an.kind == "shift")
        kind = PerturbationKind::principal_shift_mm;
      else
        fail(ErrorCode::invalid_spec, "--kind must be rotation, dsi, or shift");
      const Geometry out = perturb(geometry_or_default(), {kind, an.magnitude});
      const std::string path = out_path(opt.out_dir, an.name);
      write_geometry(out, path);
      std::cout << path << "\n";
    });
  }
  {
    auto* cmd = analyze_cmd->add_subcommand(
        "align", "complementary-view shift from world-origin projections");
    cmd->add_option("--geometry2", an.geometry2,
                    "geometry of the second (complementary) view; defaults to --geometry");
    cmd->add_option("--angle0", an.angle0, "base view angle in degrees");
    cmd->callback([&]() {
      const Geometry g = geometry_or_default();
      const Geometry g2 = an.geometry2.empty() ? g : load_geometry_arg(an.geometry2);
      const double base = an.angle0 * M_PI / 180.0;
      const AlignResult r = align_complementary(compose_perspective(g, base),
                                                compose_perspective(g2, base + M_PI), g);
      json j{{"shift_u_px", r.shift_u}, {"shift_v_px", r.shift_v},
             {"residual_mm", r.residual_mm}};
      std::cout << j.dump(2) << "\n";
    });
  }

  // ---- metrics rmse|ssim
  auto* metrics_cmd = app.add_subcommand("metrics", "image-quality metrics on windowed images");
  struct {
    std::string a, b, report;
  } mt;
  for (const char* sub : {"rmse", "ssim"}) {
    auto* cmd = metrics_cmd->add_subcommand(sub, sub == std::string("rmse")
                                                     ? "root-mean-square error"
                                                     : "structural similarity");
    cmd->add_option("--a", mt.a, "first image")->required();
    cmd->add_option("--b", mt.b, "second image")->required();
    cmd->add_option("--report", mt.report, "also write the JSON report to this file");
    cmd->callback([&, sub]() {
      const DisplayWindow w = parse_window(opt.window);
      const ProjImage a = window_to_display(load_image(mt.a), w);
      const ProjImage b = window_to_display(load_image(mt.b), w);
      const bool is_rmse = sub == std::string("rmse");
      const double value = is_rmse ? rmse(a, b) : ssim(a, b);
      const json j = metrics_report_json(w, value, value, is_rmse, !is_rmse);
      if (!mt.report.empty()) detail::write_text(mt.report, j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
    });
  }

  // ---- dataset generate
  auto* dataset_cmd = app.add_subcommand("dataset", "batch training-pair generation");
  auto* dataset_gen = dataset_cmd->add_subcommand("generate", "phantoms x angles x views");
  struct {
    int count = 0;
    std::vector<std::string> volumes;
    std::string combo = "comp_dup";
    std::string space = "cartesian";
    std::vector<double> angles{0, 15, 30, 45, 60, 75};
    int phantom_size = 512;
    double phantom_spacing = 0.625;
    int n_rho = 512, n_phi = 512;
    double rho_spacing = 0.375;
    bool no_png = false;
  } ds;
  dataset_gen->add_option("--count", ds.count, "number of generated phantoms");
  dataset_gen->add_option("--volume", ds.volumes, "input volume stem (repeatable)");
  dataset_gen->add_option("--combo", ds.combo,
                          "single | comp_dup | comp_diff | ortho_naive | ortho_opbp | triple");
  dataset_gen->add_option("--space", ds.space, "cartesian | polar | logpolar");
  dataset_gen->add_option("--angles", ds.angles, "augmentation view angles in degrees");
  dataset_gen->add_option("--phantom-size", ds.phantom_size, "phantom voxels per axis");
  dataset_gen->add_option("--phantom-spacing", ds.phantom_spacing, "phantom voxel size in mm");
  dataset_gen->add_option("--nrho", ds.n_rho, "polar radial samples");
  dataset_gen->add_option("--nphi", ds.n_phi, "polar angular samples");
  dataset_gen->add_option("--rho-spacing", ds.rho_spacing, "polar radial spacing in mm");
  dataset_gen->add_flag("--no-png", ds.no_png, "skip PNG export");
  dataset_gen->callback([&]() {
    DatasetRecipe r;
    r.geom = geometry_or_default();
    r.combo = combo_from_string(ds.combo);
    r.space = space_from_string(ds.space);
    r.angles_deg = ds.angles;
    r.window = parse_window(opt.window);
    r.out_dir = opt.out_dir.empty() ? "dataset_out" : opt.out_dir;
    r.seed = opt.seed;
    r.phantom_count = ds.count;
    r.volumes = ds.volumes;
    r.phantom.nx = r.phantom.ny = r.phantom.nz = ds.phantom_size;
    r.phantom.spacing_mm = ds.phantom_spacing;
    r.polar = presets::default_polar(r.geom);
    r.polar.n_rho = ds.n_rho;
    r.polar.n_phi = ds.n_phi;
    r.polar.phi_spacing = 360.0 / ds.n_phi;
    r.polar.rho_spacing = ds.rho_spacing;
    r.export_png = !ds.no_png;
    const json manifest = batch_generate(r);
    std::cout << (fs::path(r.out_dir) / "manifest.json").string() << " ("
              << manifest["entries"].size() << " entries)\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "xpd: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "xpd: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
