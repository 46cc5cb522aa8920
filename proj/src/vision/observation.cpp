#include "morph/vision/observation.hpp"

#include "morph/rom/evaluator.hpp"

#include <array>
#include <random>

namespace morph::vision {

namespace {

Vec3 bilinear(const std::array<Vec3, 4>& c, double a, double b) {
  return (1 - a) * (1 - b) * c[0] + a * (1 - b) * c[1] + a * b * c[2] + (1 - a) * b * c[3];
}

std::mt19937_64 frame_stream(std::uint64_t seed, int frame) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(frame)};
  return std::mt19937_64(seq);
}

}  // namespace

std::vector<SurfaceSample> sample_surface(const fem::Mesh& mesh, int count, std::uint64_t seed) {
  if (mesh.kind() != fem::ElementKind::Hex8) throw ArgumentError("surface sampling needs a hex8 mesh");
  if (count < 1) throw ArgumentError("sample count must be positive");
  const auto faces = fem::boundary_faces(mesh);
  std::vector<double> area;
  for (const auto& f : faces) {
    const Vec3 d1 = mesh.node(f.nodes[2]) - mesh.node(f.nodes[0]);
    const Vec3 d2 = mesh.node(f.nodes[3]) - mesh.node(f.nodes[1]);
    area.push_back(0.5 * d1.cross(d2).norm());
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(area.begin(), area.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  rom::MeshLocator locator(mesh);
  std::vector<SurfaceSample> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    const int fi = pick(rng);
    const auto& f = faces[fi];
    std::array<Vec3, 4> c;
    for (int i = 0; i < 4; ++i) c[i] = mesh.node(f.nodes[i]);
    const double a = unit(rng), b = unit(rng);
    SurfaceSample s;
    s.position = bilinear(c, a, b);
    // Local normal of the bilinear patch.
    const Vec3 da = (1 - b) * (c[1] - c[0]) + b * (c[2] - c[3]);
    const Vec3 db = (1 - a) * (c[3] - c[0]) + a * (c[2] - c[1]);
    s.normal = da.cross(db).normalized();
    if (s.normal.dot(f.normal) < 0) s.normal = -s.normal;
    s.face = fi;
    s.binding = locator.bind(s.position);
    if (s.binding.status != rom::BindingStatus::Inside) continue;
    out.push_back(s);
  }
  return out;
}

std::vector<std::array<Vec3, 4>> boundary_patches(const fem::Mesh& mesh) {
  std::vector<std::array<Vec3, 4>> out;
  for (const auto& f : fem::boundary_faces(mesh)) {
    std::array<Vec3, 4> c;
    for (int i = 0; i < 4; ++i) c[i] = mesh.node(f.nodes[i]);
    out.push_back(c);
  }
  return out;
}

std::vector<int> faces_of(const std::vector<SurfaceSample>& samples) {
  std::vector<int> out;
  for (const auto& s : samples) out.push_back(s.face);
  return out;
}

std::vector<rom::PointBinding> bindings_of(const std::vector<SurfaceSample>& samples) {
  std::vector<rom::PointBinding> out;
  for (const auto& s : samples) out.push_back(s.binding);
  return out;
}

std::vector<Vec3> positions_of(const std::vector<SurfaceSample>& samples) {
  std::vector<Vec3> out;
  for (const auto& s : samples) out.push_back(s.position);
  return out;
}

std::vector<ObservationFrame> synthesize_sequence(const fem::Mesh& mesh, const mor::SeparatedSolution& sol,
                                                  const std::vector<SurfaceSample>& samples,
                                                  const CameraModel& camera, const SequenceSpec& spec) {
  camera.validate();
  if (spec.camera.empty()) throw ArgumentError("camera path is empty");
  if (spec.camera.size() != 1 && spec.camera.size() != spec.mu.size()) {
    throw ArgumentError("camera path and parameter trajectory differ in length");
  }
  if (!(spec.noise_px >= 0.0) || !(spec.outlier_fraction >= 0.0 && spec.outlier_fraction <= 1.0)) {
    throw ArgumentError("noise must be non-negative and outlier fraction within [0, 1]");
  }
  for (const auto& mu : spec.mu) {
    if (!sol.parameter_space.contains(mu, 1e-9)) throw ArgumentError("trajectory leaves the parameter box");
  }
  const rom::ReducedEvaluator eval(sol, mesh, bindings_of(samples));

  std::vector<ObservationFrame> frames;
  for (size_t t = 0; t < spec.mu.size(); ++t) {
    ObservationFrame fr;
    fr.index = static_cast<int>(t);
    fr.wTc = spec.camera.size() == 1 ? spec.camera[0] : spec.camera[t];
    const Vec3 eye = fr.wTc.t;
    const VecX u = eval.displacement(spec.mu[t]);

    for (int p = 0; p < static_cast<int>(samples.size()); ++p) {
      const Vec3 x_obj = samples[p].position + u.segment<3>(3 * p);
      const Vec3 x_w = spec.wTo.apply(x_obj);
      if ((spec.wTo.R * samples[p].normal).dot(eye - x_w) <= 0.0) continue;
      const Vec3 x_c = to_camera(fr.wTc, spec.wTo, x_obj);
      if (x_c.z() <= kDepthEpsilon) continue;
      const Vec2 px = project_camera(camera, x_c);
      if (!camera.in_image(px)) continue;
      fr.measurements.push_back({p, px, false});
    }
    if (fr.measurements.empty()) {
      throw ScenarioError("frame " + std::to_string(t) + " has no visible surface points");
    }

    auto rng = frame_stream(spec.seed, fr.index);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> uu(0.0, camera.width), vv(0.0, camera.height);
    std::bernoulli_distribution outlier(spec.outlier_fraction);
    for (auto& m : fr.measurements) {
      // Draw every variate for every measurement so the stream layout does
      // not depend on the settings.
      const Vec2 n(noise(rng), noise(rng));
      const bool is_out = outlier(rng);
      const Vec2 junk(uu(rng), vv(rng));
      if (is_out) {
        m.px = junk;
        m.is_outlier = true;
      } else {
        m.px += spec.noise_px * n;
      }
    }
    frames.push_back(std::move(fr));
  }
  return frames;
}

CsvTable observations_to_csv(const std::vector<ObservationFrame>& frames) {
  CsvTable t;
  t.header = {"frame", "point_id", "u", "v", "is_outlier"};
  for (const auto& fr : frames) {
    for (const auto& m : fr.measurements) {
      t.rows.push_back({std::to_string(fr.index), std::to_string(m.point_id), format_double(m.px.x()),
                        format_double(m.px.y()), m.is_outlier ? "1" : "0"});
    }
  }
  return t;
}

std::vector<ObservationFrame> observations_from_csv(const CsvTable& table, const std::vector<RigidTransform>& camera,
                                                    const std::string& source) {
  const int cf = table.column("frame"), cp = table.column("point_id"), cu = table.column("u"),
            cv = table.column("v"), co = table.column("is_outlier");
  if (cf < 0 || cp < 0 || cu < 0 || cv < 0 || co < 0) {
    throw ParseError(source + ": expected columns frame,point_id,u,v,is_outlier", 1, 1);
  }
  std::vector<ObservationFrame> frames;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const double f = csv_number(table, r, cf, source);
    const double p = csv_number(table, r, cp, source);
    if (f < 0 || p < 0 || f != static_cast<int>(f) || p != static_cast<int>(p)) {
      throw ParseError(source + ": frame and point_id must be non-negative integers", static_cast<int>(r) + 2, 1);
    }
    const int fi = static_cast<int>(f);
    if (frames.empty() || frames.back().index != fi) {
      if (!frames.empty() && fi < frames.back().index) {
        throw ParseError(source + ": frames must be time-ordered", static_cast<int>(r) + 2, 1);
      }
      ObservationFrame fr;
      fr.index = fi;
      if (camera.size() == 1) {
        fr.wTc = camera[0];
      } else if (fi < static_cast<int>(camera.size())) {
        fr.wTc = camera[fi];
      } else {
        throw ParseError(source + ": no camera pose for frame " + std::to_string(fi), static_cast<int>(r) + 2, 1);
      }
      frames.push_back(fr);
    }
    frames.back().measurements.push_back({static_cast<int>(p),
                                          Vec2(csv_number(table, r, cu, source), csv_number(table, r, cv, source)),
                                          csv_number(table, r, co, source) != 0.0});
  }
  return frames;
}

RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 x = z.cross(up);
  if (x.norm() < 1e-12) throw ArgumentError("viewing direction parallel to the up vector");
  RigidTransform T;
  T.R.col(0) = x.normalized();
  T.R.col(2) = z;
  T.R.col(1) = z.cross(T.R.col(0));
  T.t = eye;
  return T;
}

}  // namespace morph::vision
