#include "morph/harness/scenario.hpp"

#include "morph/fem/mesh_io.hpp"
#include "morph/vision/observation.hpp"

#include <cmath>
#include <filesystem>

namespace morph::harness {

namespace {

const char* kCantilever = R"({
  "name": "cantilever",
  "seed": 1,
  "mesh": {"generator": "cantilever", "length": 10.0, "height": 2.0, "nx": 20, "ny": 4},
  "material": {"law": "linear", "E": 1000.0, "nu": 0.3},
  "problem": {"kind": "moving-load", "force": -1.0, "width": 0.0},
  "parameters": [{"name": "s", "lower": 0.0, "upper": 10.0, "grid_size": 21}],
  "rom": {"method": "pgd", "max_rank": 50, "enrich_tol": 1e-4},
  "gates": {"curve_error_at_rank_15": 0.01},
  "output_dir": "out/cantilever"
}
)";

const char* kBootseal = R"({
  "name": "bootseal-desk",
  "seed": 7,
  "mesh": {"generator": "twisted-column", "width": 0.04, "height": 0.1, "n_side": 4, "n_height": 8, "twist_deg": 30.0},
  "material": {"law": "neo-hookean", "E": 1.0e6, "nu": 0.3},
  "problem": {"kind": "top-rotation"},
  "parameters": [
    {"name": "theta_deg", "lower": 0.0, "upper": 52.0, "grid_size": 11},
    {"name": "alpha_z_deg", "lower": 0.0, "upper": 90.0, "grid_size": 7}
  ],
  "rom": {"method": "sparse-pgd", "rank": 30},
  "camera": {"fx": 900.0, "fy": 900.0, "cx": 320.0, "cy": 240.0, "width": 640, "height": 480},
  "camera_path": {"orbit": {"target": [0.1, 0.05, 0.05], "radius": 0.3, "elevation_deg": 30.0,
                            "azimuth_start_deg": -60.0, "azimuth_end_deg": -30.0}},
  "object_pose": {"rotation_quaternion": [0.9848077530122080, 0.0, 0.0, 0.1736481776669303], "translation": [0.1, 0.05, 0.0]},
  "trajectory": {"frames": 100, "start": [0.0, 35.0], "end": [52.0, 35.0]},
  "observations": {"surface_samples": 600, "noise_px": 0.5, "outlier_fraction": 0.0},
  "registration": {"model_samples": 6000, "cloud_samples": 1500, "background_points": 400, "cloud_noise": 0.0002, "trim_fraction": 0.7,
                   "init_rotation_deg": 5.0, "init_translation": 0.005},
  "tracker": {"huber_delta": 2.0, "lambda0": 1e-3, "lambda_up": 10.0, "lambda_down": 0.1, "max_iterations": 50,
              "step_tol": 1e-9, "slow_params": [1], "slow_window": 15, "initial": [0.0, 45.0]},
  "stress_frames": [99],
  "gates": {"theta_median_error_fraction": 0.01, "failed_frame_fraction": 0.5},
  "output_dir": "out/bootseal-desk"
}
)";

// Best-effort line of a key, searched after the line of its section.
int key_line(const std::string& text, const std::string& section, const std::string& key) {
  size_t from = 0;
  if (!section.empty()) {
    const size_t s = text.find("\"" + section + "\"");
    if (s != std::string::npos) from = s;
  }
  size_t pos = text.find("\"" + key + "\"", from);
  if (pos == std::string::npos) pos = from;
  if (pos == 0 && section.empty()) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    const int line = key_line(text_, section, key);
    const std::string where = section.empty() ? key : section + "." + key;
    throw ParseError(source_ + ": " + where + ": " + msg, line, line > 0 ? 1 : 0);
  }

  const Json& section(const Json& doc, const std::string& name) const {
    if (!doc.contains(name)) fail("", name, "missing section");
    if (!doc.at(name).is_object()) fail("", name, "expected an object");
    return doc.at(name);
  }

  template <typename T>
  T get(const Json& obj, const std::string& section, const std::string& key) const {
    if (!obj.contains(key)) fail(section, key, "missing field");
    try {
      return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(section, key, "wrong type");
    }
  }

  template <typename T>
  T get_or(const Json& obj, const std::string& section, const std::string& key, T fallback) const {
    return obj.contains(key) ? get<T>(obj, section, key) : fallback;
  }

  Vec3 vec3(const Json& obj, const std::string& section, const std::string& key) const {
    const auto v = get<std::vector<double>>(obj, section, key);
    if (v.size() != 3) fail(section, key, "expected three numbers");
    return Vec3(v[0], v[1], v[2]);
  }

  VecX vecx(const Json& obj, const std::string& section, const std::string& key, int n) const {
    const auto v = get<std::vector<double>>(obj, section, key);
    if (static_cast<int>(v.size()) != n) fail(section, key, "expected " + std::to_string(n) + " numbers");
    return Eigen::Map<const VecX>(v.data(), n);
  }

 private:
  const std::string& text_;
  std::string source_;
};

mor::BuildMethod method_from(const Reader& rd, const std::string& s) {
  if (s == "pgd") return mor::BuildMethod::Pgd;
  if (s == "sparse-pgd") return mor::BuildMethod::SparsePgd;
  if (s == "pod") return mor::BuildMethod::Pod;
  rd.fail("rom", "method", "unknown method '" + s + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  const Json doc = parse_json_text(text, source);
  const Reader rd(text, source);
  if (!doc.is_object()) throw ParseError(source + ": scenario must be a JSON object", 1, 1);

  Scenario sc;
  sc.name = rd.get<std::string>(doc, "", "name");
  sc.seed = rd.get_or<std::uint64_t>(doc, "", "seed", 0);
  sc.mesh = rd.section(doc, "mesh");
  if (sc.mesh.contains("path")) {
    // Relative mesh paths are taken from the scenario file's directory.
    std::filesystem::path p = rd.get<std::string>(sc.mesh, "mesh", "path");
    const auto base = std::filesystem::path(source).parent_path();
    if (p.is_relative() && !base.empty()) p = base / p;
    if (!std::filesystem::is_regular_file(p)) rd.fail("mesh", "path", "no such file '" + p.string() + "'");
    sc.mesh["path"] = p.string();
  }
  try {
    sc.law = fem::law_from_json(rd.section(doc, "material"), source + ": material");
    sc.law.validate();
  } catch (const ParseError& e) {
    throw ParseError(e.what(), key_line(text, "", "material"), 1);
  } catch (const ArgumentError& e) {
    throw ParseError(source + ": material: " + e.what(), key_line(text, "", "material"), 1);
  }
  sc.problem = rd.section(doc, "problem");
  rd.get<std::string>(sc.problem, "problem", "kind");

  if (!doc.contains("parameters") || !doc["parameters"].is_array() || doc["parameters"].empty()) {
    rd.fail("", "parameters", "expected a non-empty array");
  }
  std::vector<mor::Parameter> params;
  for (const auto& p : doc["parameters"]) {
    const auto name = rd.get<std::string>(p, "parameters", "name");
    const double lo = rd.get<double>(p, "parameters", "lower");
    const double hi = rd.get<double>(p, "parameters", "upper");
    const int n = rd.get<int>(p, "parameters", "grid_size");
    try {
      params.push_back(mor::ParameterSpace::uniform(name, lo, hi, n));
    } catch (const ArgumentError& e) {
      rd.fail("parameters", "grid_size", e.what());
    }
  }
  sc.space = mor::ParameterSpace(params);
  const int np = sc.space.size();

  const Json& rom = rd.section(doc, "rom");
  sc.rom.method = method_from(rd, rd.get<std::string>(rom, "rom", "method"));
  sc.rom.rank = rd.get_or<int>(rom, "rom", "rank", 0);
  sc.rom.max_rank = rd.get_or<int>(rom, "rom", "max_rank", 50);
  sc.rom.enrich_tol = rd.get_or<double>(rom, "rom", "enrich_tol", 1e-4);
  sc.rom.energy = rd.get_or<double>(rom, "rom", "energy", 0.9999);
  sc.rom.samples = rd.get_or<int>(rom, "rom", "samples", 0);
  if (sc.rom.method == mor::BuildMethod::SparsePgd && sc.rom.rank < 1) rd.fail("rom", "rank", "must be positive");

  if (doc.contains("camera")) {
    sc.has_tracking = true;
    const Json& cam = rd.section(doc, "camera");
    sc.camera.fx = rd.get<double>(cam, "camera", "fx");
    sc.camera.fy = rd.get<double>(cam, "camera", "fy");
    sc.camera.cx = rd.get<double>(cam, "camera", "cx");
    sc.camera.cy = rd.get<double>(cam, "camera", "cy");
    sc.camera.width = rd.get<int>(cam, "camera", "width");
    sc.camera.height = rd.get<int>(cam, "camera", "height");
    try {
      sc.camera.validate();
    } catch (const ArgumentError& e) {
      rd.fail("", "camera", e.what());
    }

    const Json& traj = rd.section(doc, "trajectory");
    if (traj.contains("mu")) {
      for (const auto& row : traj["mu"]) {
        std::vector<double> v;
        try {
          v = row.get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
          rd.fail("trajectory", "mu", "rows must be number arrays");
        }
        if (static_cast<int>(v.size()) != np) rd.fail("trajectory", "mu", "row size differs from the parameter count");
        sc.trajectory.push_back(Eigen::Map<const VecX>(v.data(), np));
      }
    } else {
      const int frames = rd.get<int>(traj, "trajectory", "frames");
      if (frames < 1) rd.fail("trajectory", "frames", "must be positive");
      const VecX a = rd.vecx(traj, "trajectory", "start", np), b = rd.vecx(traj, "trajectory", "end", np);
      for (int t = 0; t < frames; ++t) {
        const double s = frames == 1 ? 0.0 : static_cast<double>(t) / (frames - 1);
        sc.trajectory.push_back(a + s * (b - a));
      }
    }
    for (const auto& mu : sc.trajectory)
      if (!sc.space.contains(mu, 1e-9)) rd.fail("", "trajectory", "leaves the parameter box");
    const int frames = static_cast<int>(sc.trajectory.size());

    const Json& path = rd.section(doc, "camera_path");
    if (path.contains("orbit")) {
      const Json& o = path["orbit"];
      const Vec3 target = rd.vec3(o, "orbit", "target");
      const double r = rd.get<double>(o, "orbit", "radius");
      const double el = rd.get<double>(o, "orbit", "elevation_deg") * M_PI / 180.0;
      const double a0 = rd.get<double>(o, "orbit", "azimuth_start_deg") * M_PI / 180.0;
      const double a1 = rd.get<double>(o, "orbit", "azimuth_end_deg") * M_PI / 180.0;
      if (!(r > 0.0)) rd.fail("orbit", "radius", "must be positive");
      for (int t = 0; t < frames; ++t) {
        const double s = frames == 1 ? 0.0 : static_cast<double>(t) / (frames - 1);
        const double az = a0 + s * (a1 - a0);
        const Vec3 eye = target + r * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
        sc.camera_path.push_back(vision::look_at(eye, target));
      }
    } else if (path.contains("poses")) {
      for (const auto& p : path["poses"]) {
        const auto q = rd.get<std::vector<double>>(p, "poses", "rotation_quaternion");
        if (q.size() != 4) rd.fail("poses", "rotation_quaternion", "expected four numbers");
        try {
          sc.camera_path.push_back(
              vision::RigidTransform::from_quaternion(q[0], q[1], q[2], q[3], rd.vec3(p, "poses", "translation")));
        } catch (const ArgumentError& e) {
          rd.fail("poses", "rotation_quaternion", e.what());
        }
      }
      if (sc.camera_path.size() != 1 && static_cast<int>(sc.camera_path.size()) != frames) {
        rd.fail("camera_path", "poses", "needs one pose or one per frame");
      }
    } else {
      rd.fail("", "camera_path", "expected 'orbit' or 'poses'");
    }

    const Json& pose = rd.section(doc, "object_pose");
    const auto q = rd.get<std::vector<double>>(pose, "object_pose", "rotation_quaternion");
    if (q.size() != 4) rd.fail("object_pose", "rotation_quaternion", "expected four numbers");
    try {
      sc.wTo = vision::RigidTransform::from_quaternion(q[0], q[1], q[2], q[3],
                                                       rd.vec3(pose, "object_pose", "translation"));
    } catch (const ArgumentError& e) {
      rd.fail("object_pose", "rotation_quaternion", e.what());
    }

    const Json& obs = rd.section(doc, "observations");
    sc.observations.surface_samples = rd.get<int>(obs, "observations", "surface_samples");
    sc.observations.noise_px = rd.get<double>(obs, "observations", "noise_px");
    sc.observations.outlier_fraction = rd.get<double>(obs, "observations", "outlier_fraction");
    if (sc.observations.surface_samples < 1) rd.fail("observations", "surface_samples", "must be positive");

    if (doc.contains("registration")) {
      const Json& reg = rd.section(doc, "registration");
      auto& r = sc.registration;
      r.model_samples = rd.get_or<int>(reg, "registration", "model_samples", r.model_samples);
      r.cloud_samples = rd.get_or<int>(reg, "registration", "cloud_samples", r.cloud_samples);
      r.background_points = rd.get_or<int>(reg, "registration", "background_points", r.background_points);
      r.cloud_noise = rd.get_or<double>(reg, "registration", "cloud_noise", r.cloud_noise);
      r.trim_fraction = rd.get_or<double>(reg, "registration", "trim_fraction", r.trim_fraction);
      r.init_rotation_deg = rd.get_or<double>(reg, "registration", "init_rotation_deg", r.init_rotation_deg);
      r.init_translation = rd.get_or<double>(reg, "registration", "init_translation", r.init_translation);
      r.accept_rms = rd.get_or<double>(reg, "registration", "accept_rms", r.accept_rms);
    }

    const Json& tr = rd.section(doc, "tracker");
    auto& c = sc.tracker;
    c.robust = rd.get_or<bool>(tr, "tracker", "robust", c.robust);
    c.huber_delta = rd.get_or<double>(tr, "tracker", "huber_delta", c.huber_delta);
    c.lambda0 = rd.get_or<double>(tr, "tracker", "lambda0", c.lambda0);
    c.lambda_up = rd.get_or<double>(tr, "tracker", "lambda_up", c.lambda_up);
    c.lambda_down = rd.get_or<double>(tr, "tracker", "lambda_down", c.lambda_down);
    c.max_iterations = rd.get_or<int>(tr, "tracker", "max_iterations", c.max_iterations);
    c.step_tol = rd.get_or<double>(tr, "tracker", "step_tol", c.step_tol);
    c.slow_params = rd.get_or<std::vector<int>>(tr, "tracker", "slow_params", {});
    c.slow_window = rd.get_or<int>(tr, "tracker", "slow_window", c.slow_window);
    c.slow_max_std = rd.get_or<double>(tr, "tracker", "slow_max_std", c.slow_max_std);
    try {
      c.validate(np);
    } catch (const ArgumentError& e) {
      rd.fail("", "tracker", e.what());
    }
    sc.mu_initial = tr.contains("initial") ? rd.vecx(tr, "tracker", "initial", np) : sc.trajectory.front();
    sc.stress_frames = rd.get_or<std::vector<int>>(doc, "", "stress_frames", {});
    for (int f : sc.stress_frames)
      if (f < 0 || f >= frames) rd.fail("", "stress_frames", "frame out of range");
  }

  if (doc.contains("gates")) {
    if (!doc["gates"].is_object()) rd.fail("", "gates", "expected an object");
    for (const auto& [k, v] : doc["gates"].items()) {
      if (!v.is_number()) rd.fail("gates", k, "expected a number");
      sc.gates[k] = v.get<double>();
    }
  }
  sc.output_dir = rd.get_or<std::string>(doc, "", "output_dir", "out/" + sc.name);
  return sc;
}

std::vector<std::string> preset_names() {
  return {"cantilever", "bootseal-desk", "bootseal-desk-clean", "bootseal-desk-outliers"};
}

std::string preset_text(const std::string& name) {
  if (name == "cantilever") return kCantilever;
  if (name == "bootseal-desk") return kBootseal;
  if (name == "bootseal-desk-clean" || name == "bootseal-desk-outliers") {
    // Variants differ only in the observation model and gates, so they share the ROM.
    Json doc = Json::parse(kBootseal);
    doc["name"] = name;
    doc["output_dir"] = "out/" + name;
    if (name == "bootseal-desk-clean") {
      doc["observations"]["noise_px"] = 0.0;
      doc["registration"]["cloud_noise"] = 0.0;
      doc["gates"] = {{"theta_max_error_fraction", 1e-3}, {"failed_frame_fraction", 0.5}};
    } else {
      doc["observations"]["outlier_fraction"] = 0.2;
      doc["gates"] = {{"huber_beats_least_squares", 0.0}, {"failed_frame_fraction", 0.5}};
    }
    return doc.dump(2) + "\n";
  }
  throw ArgumentError("unknown preset '" + name + "'");
}

Scenario load_scenario(const std::string& name_or_path) {
  if (!std::filesystem::is_regular_file(name_or_path)) {
    for (const auto& p : preset_names())
      if (p == name_or_path) return parse_scenario(preset_text(p), p);
  }
  return parse_scenario(read_text_file(name_or_path), name_or_path);
}

}  // namespace morph::harness
