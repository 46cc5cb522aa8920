// Serial reference vs OpenMP kernels: timing and bitwise agreement.

#include "morph/fem/assembly.hpp"
#include "morph/harness/pipeline.hpp"
#include "morph/mor/snapshots.hpp"
#include "morph/registration/icp.hpp"
#include "morph/rom/evaluator.hpp"
#include "morph/tracking/tracker.hpp"

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

using namespace morph;

namespace {

double median_ms(int reps, const std::function<void()>& f) {
  std::vector<double> t;
  for (int i = 0; i < reps; ++i) {
    const auto a = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - a).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

struct Row {
  std::string kernel, size;
  double serial_ms, parallel_ms;
  bool identical;
};

void print(const std::vector<Row>& rows, int threads) {
  std::printf("threads: %d\n%-22s %-26s %12s %12s %8s %s\n", threads, "kernel", "size", "serial ms", "omp ms", "speedup",
              "bitwise");
  for (const auto& r : rows) {
    std::printf("%-22s %-26s %12.3f %12.3f %8.2f %s\n", r.kernel.c_str(), r.size.c_str(), r.serial_ms, r.parallel_ms,
                r.serial_ms / r.parallel_ms, r.identical ? "yes" : "NO");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP kernel benchmark"};
  int threads = 0, reps = 5;
  app.add_option("--threads", threads, "OpenMP threads (default: runtime choice)");
  app.add_option("--reps", reps, "Repetitions per measurement")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);
  spdlog::set_level(spdlog::level::err);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Row> rows;

  // FE assembly at a random state.
  {
    const auto mesh = fem::make_twisted_column(0.04, 0.1, 6, 12, 0.5);
    const auto law = fem::MaterialLaw::neo_hookean_from_young(1e6, 0.3);
    VecX v(mesh.num_dofs());
    for (int i = 0; i < v.size(); ++i) v[i] = 1e-4 * unit(rng);
    const fem::NodalField u(v, 3);
    const fem::Loads loads;
    fem::AssemblyResult s, p;
    const double ts = median_ms(reps, [&] { s = fem::assemble_serial(mesh, law, u, loads); });
    const double tp = median_ms(reps, [&] { p = fem::assemble(mesh, law, u, loads); });
    const bool same = s.residual.values == p.residual.values && MatX(s.tangent) == MatX(p.tangent);
    rows.push_back({"assembly", std::to_string(mesh.num_elements()) + " hex8", ts, tp, same});
  }

  // Full-order snapshots of the desk scenario.
  {
    const auto sc = harness::load_scenario("bootseal-desk");
    const auto pb = harness::make_problem(sc);
    mor::SamplingPlan plan;
    plan.kind = mor::SamplingPlan::Kind::RandomSubset;
    plan.count = 8;
    plan.seed = 3;
    mor::SnapshotSet s, p;
    const int r = std::max(1, reps / 3);
    const double ts = median_ms(r, [&] { s = mor::generate_snapshots_serial(pb.mesh, pb.law, pb.family, pb.space, plan); });
    const double tp = median_ms(r, [&] { p = mor::generate_snapshots(pb.mesh, pb.law, pb.family, pb.space, plan); });
    bool same = s.size() == p.size();
    for (int i = 0; same && i < s.size(); ++i) same = s.samples[i].u.values == p.samples[i].u.values;
    rows.push_back({"snapshots", "8 Neo-Hookean solves", ts, tp, same});
  }

  // Reduced evaluation on many points.
  const auto column = fem::make_twisted_column(0.04, 0.1, 4, 8, 0.5);
  const mor::ParameterSpace space({mor::ParameterSpace::uniform("theta", 0, 52, 11),
                                   mor::ParameterSpace::uniform("alpha", 0, 90, 7)});
  auto sol = mor::SeparatedSolution::zero(column.num_nodes(), 3, space);
  for (int i = 0; i < 30; ++i) {
    VecX f(sol.num_space_dofs()), g(11), h(7);
    for (int j = 0; j < f.size(); ++j) f[j] = 1e-3 * unit(rng);
    for (int j = 0; j < 11; ++j) g[j] = unit(rng);
    for (int j = 0; j < 7; ++j) h[j] = unit(rng);
    sol.append_term(f, {g, h});
  }
  {
    const auto pts = vision::sample_surface(column, 20000, 5);
    const rom::ReducedEvaluator ev(sol, column, vision::bindings_of(pts));
    VecX mu(2);
    mu << 23.0, 41.0;
    VecX ds, dp;
    MatX ss, sp;
    const double ts = median_ms(reps, [&] {
      ds = ev.displacement_serial(mu);
      ss = ev.sensitivities_serial(mu);
    });
    const double tp = median_ms(reps, [&] {
      dp = ev.displacement(mu);
      sp = ev.sensitivities(mu);
    });
    rows.push_back({"rom evaluation", "20000 points, rank 30", ts, tp, ds == dp && ss == sp});
  }

  // ICP correspondence search.
  {
    const registration::SurfaceModel model(vision::positions_of(vision::sample_surface(column, 6000, 6)));
    std::vector<Vec3> q;
    for (int i = 0; i < 20000; ++i) q.push_back(Vec3(0.03 * unit(rng), 0.03 * unit(rng), 0.05 + 0.06 * unit(rng)));
    std::vector<spatial::KdTree::Hit> hs, hp;
    const double ts = median_ms(reps, [&] { hs = registration::match_points_serial(q, model); });
    const double tp = median_ms(reps, [&] { hp = registration::match_points(q, model); });
    bool same = true;
    for (size_t i = 0; i < hs.size(); ++i) same = same && hs[i].index == hp[i].index && hs[i].dist2 == hp[i].dist2;
    rows.push_back({"icp matching", "20000 queries, 6000 samples", ts, tp, same});
  }

  // Tracker residuals and Jacobian.
  {
    const auto samples = vision::sample_surface(column, 3000, 7);
    vision::CameraModel cam;
    cam.fx = cam.fy = 900;
    cam.cx = 320;
    cam.cy = 240;
    cam.width = 640;
    cam.height = 480;
    const auto wTc = vision::look_at(Vec3(0.25, -0.2, 0.15), Vec3(0, 0, 0.05));
    vision::SequenceSpec spec;
    VecX mu(2);
    mu << 30.0, 35.0;
    spec.mu = {mu};
    spec.camera = {wTc};
    spec.noise_px = 0.5;
    spec.seed = 8;
    const auto frames = vision::synthesize_sequence(column, sol, samples, cam, spec);
    const tracking::TrackingModel tm(sol, column, samples, cam, vision::RigidTransform::identity());
    tracking::TrackerConfig cfg;
    tracking::ResidualSet s, p;
    const double ts = median_ms(reps, [&] { s = tracking::robust_residuals_serial(frames[0], tm, mu, cfg); });
    const double tp = median_ms(reps, [&] { p = tracking::robust_residuals(frames[0], tm, mu, cfg); });
    rows.push_back({"tracker residuals", std::to_string(s.kept.size()) + " measurements", ts, tp,
                    s.r == p.r && s.J == p.J && s.w == p.w});
  }

  print(rows, omp_get_max_threads());
  for (const auto& r : rows)
    if (!r.identical) return 1;
  return 0;
}
