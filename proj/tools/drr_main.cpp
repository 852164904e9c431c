// Command-line front end: phantom generation, raw import, rendering,
// registration, landscape sweeps, gradient checks and render benchmarks.
//
// Angles are given in degrees on the command line and converted to radians
// immediately; lengths are millimeters.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <drr/drr.hpp>

namespace fs = std::filesystem;
using namespace drr;

namespace {

struct PoseFlags {
  double rho = 400.0;
  double theta = 90.0;
  double phi = 90.0;
  double gamma = 0.0;
  double bx = 0.0, by = 0.0, bz = 0.0;

  PoseParameters to_pose() const {
    auto require_finite = [](double v, const char* flag) {
      if (!std::isfinite(v)) throw CLI::ValidationError(flag, "must be finite");
    };
    require_finite(theta, "--theta");
    require_finite(phi, "--phi");
    require_finite(gamma, "--gamma");
    require_finite(bx, "--bx");
    require_finite(by, "--by");
    require_finite(bz, "--bz");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw CLI::ValidationError("--rho", "must be a positive number of mm");
    return {rho, degrees(theta), degrees(phi), degrees(gamma), {bx, by, bz}};
  }
};

struct SpecFlags {
  int height = 100;
  int width = 100;
  double pitch = 8.0;

  DetectorSpec to_spec(const Volume& volume) const {
    if (height < 1) throw CLI::ValidationError("--height", "must be >= 1");
    if (width < 1) throw CLI::ValidationError("--width", "must be >= 1");
    if (!(pitch > 0.0)) throw CLI::ValidationError("--pitch", "must be positive");
    DetectorSpec spec = DetectorSpec::centered_on(volume, height, width, pitch);
    return spec;
  }
};

void add_pose_flags(CLI::App* app, PoseFlags& f) {
  app->add_option("--rho", f.rho, "half source-to-detector distance (mm)")->capture_default_str();
  app->add_option("--theta", f.theta, "azimuth (deg)")->capture_default_str();
  app->add_option("--phi", f.phi, "polar angle (deg)")->capture_default_str();
  app->add_option("--gamma", f.gamma, "detector roll (deg)")->capture_default_str();
  app->add_option("--bx", f.bx, "x shift (mm)")->capture_default_str();
  app->add_option("--by", f.by, "y shift (mm)")->capture_default_str();
  app->add_option("--bz", f.bz, "z shift (mm)")->capture_default_str();
}

void add_spec_flags(CLI::App* app, SpecFlags& f) {
  app->add_option("--height", f.height, "detector rows")->capture_default_str();
  app->add_option("--width", f.width, "detector columns")->capture_default_str();
  app->add_option("--pitch", f.pitch, "detector pixel pitch (mm)")->capture_default_str();
}

std::string json_line(const nlohmann::ordered_json& j) { return j.dump() + "\n"; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  detail::write_file(path, text);
}

// --- phantom -----------------------------------------------------------------

struct PhantomArgs {
  std::string kind;
  int size = 64;
  double density = 1.0;
  double spacing = 1.0;
  std::string out;
};

void run_phantom(const PhantomArgs& a) {
  if (a.size < 1) throw CLI::ValidationError("size", "must be >= 1");
  const auto volume = make_phantom(parse_phantom_kind(a.kind), {a.size, a.size, a.size},
                                   {a.spacing, a.spacing, a.spacing}, a.density);
  save_volume(volume, a.out);
}

// --- import ------------------------------------------------------------------

struct ImportArgs {
  std::string raw, out, type = "f32";
  std::vector<int> dims;
  std::vector<double> spacing{1.0, 1.0, 1.0};
  std::vector<double> origin{0.0, 0.0, 0.0};
  bool clamp_negative = false;
};

void run_import(const ImportArgs& a) {
  const auto volume = import_raw(a.raw, {a.dims[0], a.dims[1], a.dims[2]}, {a.spacing[0], a.spacing[1], a.spacing[2]},
                                 {a.origin[0], a.origin[1], a.origin[2]}, parse_raw_element(a.type), a.clamp_negative);
  save_volume(volume, a.out);
}

// --- render ------------------------------------------------------------------

struct RenderArgs {
  std::string volume, out;
  PoseFlags pose;
  SpecFlags spec;
  bool iterative = false;
};

void run_render(const RenderArgs& a) {
  const auto volume = load_volume(a.volume);
  const auto spec = a.spec.to_spec(volume);
  const auto pose = a.pose.to_pose();
  const Image image = a.iterative ? render_iterative(volume, pose, spec) : render(volume, pose, spec);
  const fs::path stem(a.out);
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  write_pgm16(image, stem.string() + ".pgm");
  write_image_f64(image, stem.string() + ".f64");
}

// --- register ----------------------------------------------------------------

struct RegisterArgs {
  std::string volume, out, fixed, loss = "zncc";
  PoseFlags pose;
  SpecFlags spec;
  std::vector<double> init;  // theta, phi, gamma (deg), bx, by, bz (mm)
  int sample = -1;
  std::uint64_t seed = 0;
  bool wide = false;
  OptimizerConfig config;
};

void run_register(const RegisterArgs& a) {
  const auto volume = load_volume(a.volume);
  const auto truth = a.pose.to_pose();
  DetectorSpec spec = a.spec.to_spec(volume);
  Image fixed;
  if (!a.fixed.empty()) {
    fixed = read_image_f64(a.fixed);
    spec.height = fixed.height;
    spec.width = fixed.width;
  } else {
    fixed = render(volume, truth, spec);
  }
  OptimizerConfig config = a.config;
  config.loss_kind = parse_loss_kind(a.loss);
  validate(config);

  std::vector<PoseParameters> inits;
  if (a.sample >= 0) {
    inits = sample_initializations(truth, a.wide ? wide_half_widths() : basin_half_widths(), a.sample, a.seed);
  } else if (!a.init.empty()) {
    PoseParameters p = truth;
    p.theta = degrees(a.init[0]);
    p.phi = degrees(a.init[1]);
    p.gamma = degrees(a.init[2]);
    p.shift = {a.init[3], a.init[4], a.init[5]};
    inits.push_back(p);
  } else {
    inits.push_back(truth);
  }

  std::vector<RegistrationTrace> traces(inits.size());
  RenderOptions serial;
  serial.threads = 1;
  parallel_blocks(static_cast<int>(inits.size()), 0, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) traces[i] = register_pose(fixed, volume, inits[i], spec, config, serial);
  });

  const fs::path dir(a.out);
  fs::create_directories(dir);
  nlohmann::ordered_json summary;
  summary["n_runs"] = traces.size();
  int converged = 0;
  double iters = 0.0;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    char name[32];
    std::snprintf(name, sizeof name, "trace_%03zu.jsonl", i);
    write_trace(t, dir / name);
    if (t.converged) {
      ++converged;
      iters += t.iterations_used;
    }
    nlohmann::ordered_json run;
    run["index"] = i;
    run["status"] = to_string(t.status);
    run["converged"] = t.converged;
    run["iterations"] = t.iterations_used;
    run["initial_pose"] = registration_vector(inits[i]);
    run["final_pose"] = registration_vector(t.final_pose);
    run["final_loss"] = t.entries.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(t.entries.back().loss);
    runs.push_back(run);
  }
  summary["n_converged"] = converged;
  summary["mean_iters"] = converged > 0 ? nlohmann::ordered_json(iters / converged) : nlohmann::ordered_json(nullptr);
  summary["runs"] = runs;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "converged " << converged << "/" << traces.size() << "\n";
}

// --- landscape ---------------------------------------------------------------

PoseParam parse_param(const std::string& name) {
  for (std::size_t i = 0; i < kPoseParamCount; ++i)
    if (name == kPoseParamNames[i]) return static_cast<PoseParam>(i);
  throw CLI::ValidationError("--axes", "unknown parameter '" + name + "'");
}

bool is_angle(PoseParam p) { return p == kTheta || p == kPhi || p == kGamma; }

struct LandscapeArgs {
  std::string volume, out, loss = "zncc";
  PoseFlags pose;
  SpecFlags spec;
  std::vector<std::string> axes{"theta"};
  std::vector<double> half_widths{45.0};
  int samples = 41;
};

void run_landscape(const LandscapeArgs& a) {
  if (a.axes.size() != a.half_widths.size())
    throw CLI::ValidationError("--half-widths", "needs one value per entry of --axes");
  const auto volume = load_volume(a.volume);
  std::vector<LandscapeAxis> axes;
  for (std::size_t i = 0; i < a.axes.size(); ++i) {
    const PoseParam p = parse_param(a.axes[i]);
    axes.push_back({p, is_angle(p) ? degrees(a.half_widths[i]) : a.half_widths[i], a.samples});
  }
  const auto land = loss_landscape(volume, a.pose.to_pose(), a.spec.to_spec(volume), parse_loss_kind(a.loss), axes);
  write_text(a.out, encode_landscape_csv(land));
}

// --- gradcheck ---------------------------------------------------------------

struct GradcheckArgs {
  std::string volume, out, loss = "zncc";
  PoseFlags pose;
  SpecFlags spec;
  int sample = 20;
  std::uint64_t seed = 0;
};

void run_gradcheck(const GradcheckArgs& a) {
  const auto volume = load_volume(a.volume);
  const auto truth = a.pose.to_pose();
  const auto spec = a.spec.to_spec(volume);
  const Image fixed = render(volume, truth, spec);
  const auto kind = parse_loss_kind(a.loss);

  std::string text;
  std::mt19937_64 rng(a.seed);
  int produced = 0;
  while (produced < a.sample) {
    auto candidates = sample_initializations(truth, basin_half_widths(), 1, rng());
    const auto& pose = candidates.front();
    if (std::abs(std::sin(pose.phi)) <= 0.1) continue;
    const auto c = check_gradient(volume, pose, spec, fixed, kind);
    nlohmann::ordered_json j;
    j["pose"] = to_vector(pose);
    j["value"] = c.value;
    j["grad"] = c.grad;
    j["fd"] = c.fd;
    j["rel_err"] = c.rel_err;
    j["boundary"] = c.boundary;
    j["passed"] = c.passed;
    text += json_line(j);
    ++produced;
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
  std::string volume, out;
  PoseFlags pose;
  SpecFlags spec;
  std::vector<int> sizes{100, 200, 300, 400, 500};
  int repeats = 20;
  bool gradient = false;
};

void run_bench(const BenchArgs& a) {
  const auto volume = load_volume(a.volume);
  const auto pose = a.pose.to_pose();
  const auto base = a.spec.to_spec(volume);
  if (a.repeats < 1) throw CLI::ValidationError("--repeats", "must be >= 1");
  std::string text;
  for (int size : a.sizes) {
    if (size < 1) throw CLI::ValidationError("--sizes", "sizes must be >= 1");
    // Same field of view at every size.
    DetectorSpec spec = base;
    spec.height = spec.width = size;
    spec.pitch_x = base.pitch_x * base.width / size;
    spec.pitch_y = base.pitch_y * base.height / size;
    const Timing t = time_render(volume, pose, spec, a.repeats);
    nlohmann::ordered_json j;
    j["size"] = size;
    j["repeats"] = a.repeats;
    j["mean_ms"] = t.mean_ms;
    j["stdev_ms"] = t.stdev_ms;
    if (a.gradient) {
      const Timing g = time_render(volume, pose, spec, a.repeats, true);
      j["gradient_mean_ms"] = g.mean_ms;
      j["gradient_stdev_ms"] = g.stdev_ms;
    }
    text += json_line(j);
    std::cout << json_line(j) << std::flush;
  }
  if (!a.out.empty()) write_text(a.out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable digitally reconstructed radiographs"};
  app.require_subcommand(1);

  PhantomArgs phantom;
  auto* sub_phantom = app.add_subcommand("phantom", "write a synthetic volume");
  sub_phantom->add_option("kind", phantom.kind, "uniform|sphere|off_center_cube|single_voxel|sphere_cube|torso")
      ->required();
  sub_phantom->add_option("size", phantom.size, "voxels per axis")->required();
  sub_phantom->add_option("density", phantom.density, "density scale")->required();
  sub_phantom->add_option("--spacing", phantom.spacing, "voxel size (mm)")->capture_default_str();
  sub_phantom->add_option("--out", phantom.out, "output .dvol")->required();

  ImportArgs import;
  auto* sub_import = app.add_subcommand("import", "convert headerless raw voxels to .dvol");
  sub_import->add_option("--raw", import.raw, "raw input file")->required();
  sub_import->add_option("--dims", import.dims, "nx,ny,nz")->delimiter(',')->expected(3)->required();
  sub_import->add_option("--spacing", import.spacing, "dx,dy,dz (mm)")->delimiter(',')->expected(3);
  sub_import->add_option("--origin", import.origin, "bx,by,bz (mm)")->delimiter(',')->expected(3);
  sub_import->add_option("--type", import.type, "f32|i16|u8")->capture_default_str();
  sub_import->add_flag("--clamp-negative", import.clamp_negative, "replace negative values with 0");
  sub_import->add_option("--out", import.out, "output .dvol")->required();

  RenderArgs rend;
  auto* sub_render = app.add_subcommand("render", "render a DRR to <out>.pgm and <out>.f64");
  sub_render->add_option("--volume", rend.volume, "input .dvol")->required();
  sub_render->add_option("--out", rend.out, "output stem")->required();
  add_pose_flags(sub_render, rend.pose);
  add_spec_flags(sub_render, rend.spec);
  sub_render->add_flag("--iterative", rend.iterative, "use the plane-walking reference renderer");

  RegisterArgs reg;
  auto* sub_register = app.add_subcommand("register", "recover the pose of a fixed DRR by gradient descent");
  sub_register->add_option("--volume", reg.volume, "input .dvol")->required();
  sub_register->add_option("--out", reg.out, "output directory")->required();
  sub_register->add_option("--fixed", reg.fixed, "fixed image (.f64 with sidecar); default renders the pose flags");
  add_pose_flags(sub_register, reg.pose);
  add_spec_flags(sub_register, reg.spec);
  sub_register->add_option("--init", reg.init, "theta,phi,gamma (deg),bx,by,bz (mm)")->delimiter(',')->expected(6);
  sub_register->add_option("--sample", reg.sample, "number of random initializations");
  sub_register->add_option("--seed", reg.seed, "sampling seed")->capture_default_str();
  sub_register->add_flag("--wide", reg.wide, "sample from the wide ranges (120 deg, 60 mm)");
  sub_register->add_option("--loss", reg.loss, "zncc|l2")->capture_default_str();
  sub_register->add_option("--lr-rot", reg.config.lr_rotation, "rotation learning rate")->capture_default_str();
  sub_register->add_option("--lr-xyz", reg.config.lr_translation, "translation learning rate")->capture_default_str();
  sub_register->add_option("--momentum", reg.config.momentum, "momentum")->capture_default_str();
  sub_register->add_option("--max-iters", reg.config.max_iters, "iteration cap")->capture_default_str();
  sub_register->add_option("--threshold", reg.config.converged_threshold, "convergence threshold on the loss")
      ->capture_default_str();

  LandscapeArgs land;
  auto* sub_landscape = app.add_subcommand("landscape", "sweep the loss around a pose, CSV output");
  sub_landscape->add_option("--volume", land.volume, "input .dvol")->required();
  sub_landscape->add_option("--out", land.out, "output .csv")->required();
  add_pose_flags(sub_landscape, land.pose);
  add_spec_flags(sub_landscape, land.spec);
  sub_landscape->add_option("--loss", land.loss, "zncc|l2")->capture_default_str();
  sub_landscape->add_option("--axes", land.axes, "one or two of rho,theta,phi,gamma,bx,by,bz")->delimiter(',');
  sub_landscape->add_option("--half-widths", land.half_widths, "per axis, deg or mm")->delimiter(',');
  sub_landscape->add_option("--samples", land.samples, "grid points per axis")->capture_default_str();

  GradcheckArgs grad;
  auto* sub_grad = app.add_subcommand("gradcheck", "exact gradients vs central differences at random poses");
  sub_grad->add_option("--volume", grad.volume, "input .dvol")->required();
  sub_grad->add_option("--out", grad.out, "output .jsonl (default stdout)");
  add_pose_flags(sub_grad, grad.pose);
  add_spec_flags(sub_grad, grad.spec);
  sub_grad->add_option("--loss", grad.loss, "zncc|l2")->capture_default_str();
  sub_grad->add_option("--sample", grad.sample, "number of poses")->capture_default_str();
  sub_grad->add_option("--seed", grad.seed, "pose seed")->capture_default_str();

  BenchArgs bench;
  auto* sub_bench = app.add_subcommand("bench", "time renders across detector sizes");
  sub_bench->add_option("--volume", bench.volume, "input .dvol")->required();
  sub_bench->add_option("--out", bench.out, "output .jsonl");
  add_pose_flags(sub_bench, bench.pose);
  add_spec_flags(sub_bench, bench.spec);
  sub_bench->add_option("--sizes", bench.sizes, "square detector sizes")->delimiter(',');
  sub_bench->add_option("--repeats", bench.repeats, "renders per size")->capture_default_str();
  sub_bench->add_flag("--gradient", bench.gradient, "also time renders that carry pose derivatives");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_phantom->parsed()) run_phantom(phantom);
    if (sub_import->parsed()) run_import(import);
    if (sub_render->parsed()) run_render(rend);
    if (sub_register->parsed()) run_register(reg);
    if (sub_landscape->parsed()) run_landscape(land);
    if (sub_grad->parsed()) run_gradcheck(grad);
    if (sub_bench->parsed()) run_bench(bench);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "drr: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
