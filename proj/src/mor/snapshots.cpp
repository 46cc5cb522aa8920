#include "morph/mor/snapshots.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>

namespace morph::mor {

MatX SnapshotSet::matrix() const {
  MatX m(mesh.num_dofs(), size());
  for (int i = 0; i < size(); ++i) m.col(i) = samples[i].u.values;
  return m;
}

std::vector<VecX> SamplingPlan::resolve(const ParameterSpace& space) const {
  switch (kind) {
    case Kind::FullGrid:
      return space.full_grid();
    case Kind::RandomSubset: {
      const int total = space.full_grid_count();
      if (count < 1 || count > total) throw ArgumentError("random subset size out of range");
      std::vector<int> idx(total);
      std::iota(idx.begin(), idx.end(), 0);
      std::mt19937_64 rng(seed);
      // Partial Fisher-Yates with explicit draws keeps the result independent
      // of the standard library's shuffle implementation.
      for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(total - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(count);
      std::sort(idx.begin(), idx.end());
      const auto grid = space.full_grid();
      std::vector<VecX> out;
      for (int i : idx) out.push_back(grid[i]);
      return out;
    }
    case Kind::Explicit:
      for (const auto& p : points) {
        if (!space.contains(p)) throw ArgumentError("explicit sample outside the parameter box");
      }
      return points;
  }
  return {};
}

namespace {

SnapshotSet run(const fem::Mesh& mesh, const fem::MaterialLaw& law, const LoadFamily& family,
                const ParameterSpace& space, const SamplingPlan& plan,
                const fem::SolverOptions& options, bool parallel) {
  const std::vector<VecX> mus = plan.resolve(space);
  const int n = static_cast<int>(mus.size());
  if (n == 0) throw ArgumentError("sampling plan is empty");
  std::vector<fem::NodalField> results(n);
  std::vector<std::string> failures(n);

  auto solve_one = [&](int i) {
    try {
      results[i] = fem::solve_static(mesh, law, family(mus[i]), options);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) solve_one(i);
  } else {
    for (int i = 0; i < n; ++i) solve_one(i);
  }

  std::vector<VecX> failed;
  std::ostringstream msg;
  for (int i = 0; i < n; ++i) {
    if (failures[i].empty()) continue;
    failed.push_back(mus[i]);
    msg << "\n  mu = [" << mus[i].transpose() << "]: " << failures[i];
  }
  if (!failed.empty()) {
    throw SnapshotError(std::to_string(failed.size()) + " of " + std::to_string(n) +
                            " snapshots failed:" + msg.str(),
                        failed);
  }

  SnapshotSet set;
  set.mesh = mesh;
  set.law = law;
  for (int i = 0; i < n; ++i) set.samples.push_back({mus[i], std::move(results[i])});
  return set;
}

}  // namespace

SnapshotSet generate_snapshots(const fem::Mesh& mesh, const fem::MaterialLaw& law,
                               const LoadFamily& family, const ParameterSpace& space,
                               const SamplingPlan& plan, const fem::SolverOptions& options) {
  return run(mesh, law, family, space, plan, options, true);
}

SnapshotSet generate_snapshots_serial(const fem::Mesh& mesh, const fem::MaterialLaw& law,
                                      const LoadFamily& family, const ParameterSpace& space,
                                      const SamplingPlan& plan, const fem::SolverOptions& options) {
  return run(mesh, law, family, space, plan, options, false);
}

}  // namespace morph::mor
