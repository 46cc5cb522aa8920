#include "morph/csv.hpp"
#include "morph/harness/pipeline.hpp"
#include "morph/mor/solution_io.hpp"

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>

using namespace morph;

namespace {

// 0: every gate passed, 1: a gate failed, 2: error.
int report_gates(const std::vector<harness::GateOutcome>& gates) {
  bool ok = true;
  for (const auto& g : gates) {
    std::printf("gate %s: %s (value %.6g, threshold %.6g)\n", g.name.c_str(), g.pass ? "PASS" : "FAIL", g.value,
                g.threshold);
    ok = ok && g.pass;
  }
  return ok ? 0 : 1;
}

int run_metrics(const std::string& est_path, const std::string& truth_path) {
  const CsvTable est = load_csv(est_path), truth = load_csv(truth_path);
  std::vector<double> values;
  if (!est.header.empty() && est.header[0] == "id") {
    // Point sets, matched by id.
    std::map<long, Vec3> t;
    for (size_t r = 0; r < truth.rows.size(); ++r) {
      t[static_cast<long>(csv_number(truth, r, 0, truth_path))] =
          Vec3(csv_number(truth, r, 1, truth_path), csv_number(truth, r, 2, truth_path), csv_number(truth, r, 3, truth_path));
    }
    std::vector<Vec3> a, b;
    for (size_t r = 0; r < est.rows.size(); ++r) {
      const auto it = t.find(static_cast<long>(csv_number(est, r, 0, est_path)));
      if (it == t.end()) continue;
      a.emplace_back(csv_number(est, r, 1, est_path), csv_number(est, r, 2, est_path), csv_number(est, r, 3, est_path));
      b.push_back(it->second);
    }
    values = harness::compute_error_metrics(a, b).distances;
  } else {
    // Parameter tables keyed by frame: Euclidean error of the mu columns.
    const size_t n = std::min(est.rows.size(), truth.rows.size());
    for (size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (size_t c = 1; c < truth.header.size(); ++c) {
        const double d = csv_number(est, r, static_cast<int>(c), est_path) - csv_number(truth, r, static_cast<int>(c), truth_path);
        s += d * d;
      }
      values.push_back(std::sqrt(s));
    }
  }
  const auto m = harness::summarize(values);
  std::printf("count %zu\nmean %.9g\nmedian %.9g\nq1 %.9g\nq3 %.9g\nmax %.9g\n", m.distances.size(), m.mean, m.median,
              m.q1, m.q3, m.max);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric reduced-order deformation models: offline build and online tracking"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--out-dir", out_dir, "Override the scenario output directory");
  app.add_option("--threads", threads, "OpenMP thread count")->check(CLI::NonNegativeNumber);

  std::string scenario, solution, est, truth;
  bool paired = false;
  auto* build = app.add_subcommand("build", "Build the reduced model of a scenario");
  build->add_option("scenario", scenario, "Preset name or scenario file")->required();
  auto* track = app.add_subcommand("track", "Synthesize a sequence, register and track it");
  track->add_option("scenario", scenario, "Preset name or scenario file")->required();
  track->add_option("--solution", solution, "Solution file from build")->required();
  track->add_flag("--paired-ls", paired, "Also run plain least squares on the same frames");
  auto* metrics = app.add_subcommand("metrics", "Error statistics of estimates against ground truth");
  metrics->add_option("est", est)->required();
  metrics->add_option("truth", truth)->required();

  std::string preset;
  auto* show = app.add_subcommand("preset", "Print a built-in scenario, or list them");
  show->add_option("name", preset);

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (metrics->parsed()) return run_metrics(est, truth);
    if (show->parsed()) {
      if (preset.empty()) {
        for (const auto& n : harness::preset_names()) std::printf("%s\n", n.c_str());
      } else {
        std::fputs(harness::preset_text(preset).c_str(), stdout);
      }
      return 0;
    }

    harness::Scenario sc = harness::load_scenario(scenario);
    if (seed) sc.seed = *seed;
    const std::string dir = out_dir.empty() ? sc.output_dir : out_dir;
    if (build->parsed()) {
      const auto r = harness::cmd_build(sc, dir);
      std::printf("rank %d, compression %.4f %%, written to %s\n", r.solution.rank(), r.compression, dir.c_str());
      return report_gates(harness::evaluate_build_gates(sc, r));
    }
    const auto sol = mor::load_solution(solution);
    const auto r = harness::cmd_track(sc, sol, dir, paired);
    const int frames = static_cast<int>(r.theta_error.size());
    std::printf("frames %d, failed %d, registration rms %.3g, surface error median %.4g mean %.4g\n", frames,
                r.failed_frames, r.registration.rms, r.surface.median, r.surface.mean);
    const int gates = report_gates(harness::evaluate_track_gates(sc, r));
    if (2 * r.failed_frames > frames) {
      std::fprintf(stderr, "error: %d of %d frames unusable\n", r.failed_frames, frames);
      return 1;
    }
    return gates;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
