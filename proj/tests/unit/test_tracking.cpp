#include "morph/tracking/tracker.hpp"
#include "rom_fixtures.hpp"

#include <doctest.h>

#include <algorithm>

using namespace morph;
using namespace morph::tracking;
using morph::testing::mu2;

namespace {

struct Scene {
  mor::SeparatedSolution sol;
  std::vector<vision::SurfaceSample> samples;
  vision::CameraModel cam = testing::desk_camera();
  RigidTransform wTo{Eigen::AngleAxisd(0.3, Vec3::UnitZ()).toRotationMatrix(), Vec3(0.01, -0.02, 0.0)};
  RigidTransform wTc = vision::look_at(Vec3(0.22, -0.18, 0.14), Vec3(0.01, -0.02, 0.05));

  explicit Scene(int n_samples = 300, std::uint64_t seed = 3)
      : sol(testing::random_small_solution(testing::small_column(), 4, seed, 6e-3)),
        samples(vision::sample_surface(testing::small_column(), n_samples, seed + 1)) {}

  TrackingModel model() const { return {sol, testing::small_column(), samples, cam, wTo}; }

  std::vector<ObservationFrame> frames(const std::vector<VecX>& mu, double noise, double outliers,
                                       std::uint64_t seed) const {
    vision::SequenceSpec spec;
    spec.mu = mu;
    spec.camera = {wTc};
    spec.wTo = wTo;
    spec.noise_px = noise;
    spec.outlier_fraction = outliers;
    spec.seed = seed;
    return vision::synthesize_sequence(testing::small_column(), sol, samples, cam, spec);
  }
};

double range_error(const VecX& a, const VecX& b, const mor::ParameterSpace& s) {
  double e = 0.0;
  for (int k = 0; k < s.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]) / s[k].range());
  return e;
}

VecX centre(const mor::ParameterSpace& s) {
  VecX c(s.size());
  for (int k = 0; k < s.size(); ++k) c[k] = 0.5 * (s[k].lower + s[k].upper);
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("huber weight and cost") {
  CHECK(huber_weight(50.0, 2.0) == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(huber_weight(1.5, 2.0) == 1.0);
  CHECK(huber_weight(2.0, 2.0) == 1.0);
  // Quadratic inside, linear outside, continuous with matching slope at delta.
  CHECK(huber_rho(1.5, 2.0) == doctest::Approx(2.25));
  CHECK(huber_rho(2.0 + 1e-9, 2.0) == doctest::Approx(4.0));
  const double h = 1e-6;
  CHECK((huber_rho(2.0 + h, 2.0) - huber_rho(2.0, 2.0)) / h == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(huber_rho(10.0, 2.0) == doctest::Approx(36.0));
}

TEST_CASE("residuals vanish at the truth and weight a 50 px offset by 0.04") {
  const Scene sc;
  const auto tm = sc.model();
  const VecX truth = mu2(0.45, 0.1);
  auto frames = sc.frames({truth}, 0.0, 0.0, 1);
  TrackerConfig cfg;
  auto rs = robust_residuals(frames[0], tm, truth, cfg);
  REQUIRE(rs.kept.size() > 100);
  CHECK(rs.r.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(rs.w.minCoeff() == 1.0);

  frames[0].measurements[7].px += Vec2(30.0, 40.0);
  rs = robust_residuals(frames[0], tm, truth, cfg);
  const auto at = std::find(rs.kept.begin(), rs.kept.end(), 7) - rs.kept.begin();
  CHECK(rs.w[at] == doctest::Approx(0.04).epsilon(1e-9));
  CHECK(rs.inliers() == static_cast<int>(rs.kept.size()) - 1);
}

TEST_CASE("stacked jacobian against finite differences") {
  const Scene sc;
  const auto tm = sc.model();
  const auto& space = tm.parameter_space();
  auto rng = testing::make_rng(21);
  TrackerConfig cfg;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // Stay away from grid nodes, where the hat interpolation has kinks.
    VecX mu(2);
    for (int k = 0; k < 2; ++k) {
      const auto& g = space[k].grid;
      const int cell = static_cast<int>(testing::uniform(rng, 0, g.size() - 1 - 1e-9));
      mu[k] = g[cell] + testing::uniform(rng, 0.2, 0.8) * (g[cell + 1] - g[cell]);
    }
    const auto frames = sc.frames({mu}, 0.5, 0.0, trial);
    const auto rs = robust_residuals(frames[0], tm, mu, cfg);
    MatX fd(rs.r.size(), 2);
    for (int k = 0; k < 2; ++k) {
      const double h = 1e-6 * space[k].range();
      VecX a = mu, b = mu;
      a[k] += h;
      b[k] -= h;
      // r = measured - predicted, so the prediction derivative is -dr/dmu.
      fd.col(k) = -(robust_residuals(frames[0], tm, a, cfg).r - robust_residuals(frames[0], tm, b, cfg).r) / (2 * h);
    }
    worst = std::max(worst, (rs.J - fd).norm() / fd.norm());
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("lm step limits") {
  auto rng = testing::make_rng(5);
  MatX J(40, 3);
  VecX r(40), w = VecX::Ones(20);
  for (int i = 0; i < J.size(); ++i) J.data()[i] = testing::uniform(rng, -1, 1);
  for (int i = 0; i < r.size(); ++i) r[i] = testing::uniform(rng, -1, 1);
  for (int i = 0; i < 20; ++i) w[i] = testing::uniform(rng, 0.2, 1.0);
  VecX wr(40);
  for (int i = 0; i < 40; ++i) wr[i] = w[i / 2];
  const MatX A = J.transpose() * wr.asDiagonal() * J;
  const VecX g = J.transpose() * wr.asDiagonal() * r;

  SUBCASE("vanishing damping gives the gauss-newton step") {
    const VecX gn = A.ldlt().solve(g);
    CHECK((lm_iterate(J, r, w, 1e-14).delta - gn).norm() / gn.norm() < 1e-10);
  }
  SUBCASE("heavy damping gives the scaled gradient") {
    const double lambda = 1e10;
    const VecX step = lm_iterate(J, r, w, lambda).delta;
    for (int k = 0; k < 3; ++k) CHECK(step[k] == doctest::Approx(g[k] / (lambda * A(k, k))).epsilon(1e-8));
  }
  SUBCASE("a zero column is floored") {
    MatX Z = J;
    Z.col(1).setZero();
    const auto s = lm_iterate(Z, r, w, 1e-3);
    CHECK(s.floored);
    CHECK(s.delta.allFinite());
    CHECK(std::abs(s.delta[1]) < 1e-12);
  }
}

TEST_CASE("linear least squares converges in at most three accepted steps") {
  auto rng = testing::make_rng(9);
  MatX J(60, 4);
  VecX b(60);
  for (int i = 0; i < J.size(); ++i) J.data()[i] = testing::uniform(rng, -2, 2);
  for (int i = 0; i < b.size(); ++i) b[i] = testing::uniform(rng, -5, 5);
  const VecX w = VecX::Ones(30);
  const VecX exact = (J.transpose() * J).ldlt().solve(J.transpose() * b);

  // Residual r = b - J x, the same convention as the tracker.
  VecX x = VecX::Zero(4);
  double lambda = 1e-3;
  int accepted = 0;
  auto cost = [&](const VecX& v) { return (b - J * v).squaredNorm(); };
  while (accepted < 10 && (x - exact).norm() > 1e-9 * exact.norm()) {
    const VecX trial = x + lm_iterate(J, b - J * x, w, lambda).delta;
    if (cost(trial) < cost(x)) {
      x = trial;
      lambda *= 0.1;
      ++accepted;
    } else {
      lambda *= 10;
    }
  }
  CHECK(accepted <= 3);
  CHECK((x - exact).norm() <= 1e-9 * exact.norm());
}

TEST_CASE("noise-free frames: exact start and offset start") {
  const Scene sc;
  const auto tm = sc.model();
  const auto& space = tm.parameter_space();
  const VecX truth = mu2(0.5, 0.15);
  const auto frames = sc.frames({truth}, 0.0, 0.0, 2);
  TrackerConfig cfg;

  const auto at = estimate_frame(frames[0], tm, truth, cfg);
  CHECK(at.iterations <= 2);
  CHECK(at.cost < 1e-18);
  CHECK(at.converged);

  VecX start = truth;
  start[0] += 0.2 * space[0].range();
  start[1] -= 0.2 * space[1].range();
  const auto est = estimate_frame(frames[0], tm, start, cfg);
  CHECK(std::abs(est.mu[0] - truth[0]) / space[0].range() < 1e-3);
  CHECK(range_error(est.mu, truth, space) < 1e-3);
  CHECK(est.cost >= 0.0);
  CHECK(space.contains(est.mu, 0.0));

  // Cold and warm starts agree at convergence.
  const auto cold = estimate_frame(frames[0], tm, centre(space), cfg);
  CHECK(range_error(cold.mu, est.mu, space) < 1e-6);
}

TEST_CASE("estimates stay in the box; bound components are clamped") {
  const Scene sc;
  const auto tm = sc.model();
  const auto& space = tm.parameter_space();
  const VecX truth = mu2(space[0].lower, 0.0);
  auto frames = sc.frames({truth}, 0.3, 0.0, 4);
  const auto est = estimate_frame(frames[0], tm, mu2(0.3, 0.2), TrackerConfig{});
  CHECK(space.contains(est.mu, 0.0));
  CHECK(est.mu[0] >= space[0].lower);
  CHECK(range_error(est.mu, truth, space) < 0.02);
}

TEST_CASE("accepted steps strictly decrease the robust cost") {
  const Scene sc;
  const auto tm = sc.model();
  const auto& space = tm.parameter_space();
  const auto frames = sc.frames({mu2(0.6, -0.3)}, 1.0, 0.1, 6);
  TrackerConfig cfg;
  // Cost after each additional iteration never increases; it strictly drops
  // whenever the estimate moves.
  double prev = robust_residuals(frames[0], tm, centre(space), cfg).cost(cfg.huber_delta, true);
  VecX prev_mu = centre(space);
  for (int it = 1; it <= 8; ++it) {
    cfg.max_iterations = it;
    const auto e = estimate_frame(frames[0], tm, centre(space), cfg);
    if ((e.mu - prev_mu).norm() > 0) CHECK(e.cost < prev);
    CHECK(e.cost <= prev);
    prev = e.cost;
    prev_mu = e.mu;
  }
}

TEST_CASE("huber beats least squares under gross outliers") {
  const Scene sc(500, 8);
  const auto tm = sc.model();
  const auto& space = tm.parameter_space();
  auto rng = testing::make_rng(31);
  std::vector<VecX> mu;
  for (int i = 0; i < 50; ++i) mu.push_back(mu2(testing::uniform(rng, 0.1, 0.8), testing::uniform(rng, -0.4, 0.4)));
  const auto frames = sc.frames(mu, 1.0, 0.2, 12);
  TrackerConfig robust, plain;
  plain.robust = false;
  std::vector<double> er, el;
  for (size_t i = 0; i < frames.size(); ++i) {
    er.push_back(range_error(estimate_frame(frames[i], tm, mu[i], robust).mu, mu[i], space));
    el.push_back(range_error(estimate_frame(frames[i], tm, mu[i], plain).mu, mu[i], space));
  }
  CHECK(median(er) < median(el));
}

TEST_CASE("bounded influence of a single measurement") {
  const Scene sc;
  const auto tm = sc.model();
  const VecX truth = mu2(0.4, 0.2);
  const auto base = sc.frames({truth}, 0.0, 0.0, 3);
  const int victim = 11;

  auto shift = [&](bool robust, double px) {
    auto f = base;
    f[0].measurements[victim].px += Vec2(px, 0.0);
    TrackerConfig cfg;
    cfg.robust = robust;
    return (estimate_frame(f[0], tm, truth, cfg).mu - truth).norm();
  };
  const double delta = TrackerConfig{}.huber_delta;
  const double small_r = shift(true, delta);
  REQUIRE(small_r > 0.0);
  for (double px : {50.0, 500.0, 5000.0}) CHECK(shift(true, px) <= 5.0 * small_r);
  // Without weighting the same perturbation keeps pulling.
  CHECK(shift(false, 5000.0) > 20.0 * shift(false, delta));
}

TEST_CASE("parallel and serial residual assembly agree bitwise") {
  const Scene sc(900, 13);
  const auto tm = sc.model();
  const auto frames = sc.frames({mu2(0.3, 0.1)}, 0.5, 0.1, 5);
  TrackerConfig cfg;
  const auto a = robust_residuals(frames[0], tm, mu2(0.35, 0.05), cfg);
  const auto b = robust_residuals_serial(frames[0], tm, mu2(0.35, 0.05), cfg);
  CHECK(a.kept == b.kept);
  CHECK(a.r == b.r);
  CHECK(a.w == b.w);
  CHECK(a.J == b.J);
}

TEST_CASE("sequence tracking") {
  const Scene sc;
  const auto tm = sc.model();
  const auto& space = tm.parameter_space();

  SUBCASE("constant sequence without noise") {
    const VecX truth = mu2(0.55, -0.1);
    const auto frames = sc.frames(std::vector<VecX>(6, truth), 0.0, 0.0, 1);
    TrackerConfig cfg;
    cfg.slow_params = {1};
    const auto res = track_sequence(frames, tm, centre(space), cfg);
    REQUIRE(res.estimates.size() == 6);
    CHECK(res.failed == 0);
    for (const auto& e : res.estimates) CHECK(range_error(e.mu, truth, space) < 1e-6);
  }

  SUBCASE("slow parameter settles while the fast one follows a ramp") {
    std::vector<VecX> mu;
    for (int i = 0; i < 30; ++i) mu.push_back(mu2(0.1 + 0.02 * i, 0.25));
    const auto frames = sc.frames(mu, 0.5, 0.0, 7);
    TrackerConfig cfg;
    cfg.slow_params = {1};
    const auto res = track_sequence(frames, tm, mu2(0.1, 0.0), cfg);
    const double early = std::abs(res.estimates[2].mu[1] - 0.25), late = std::abs(res.estimates.back().mu[1] - 0.25);
    CHECK(late <= early);
    CHECK(late / space[1].range() < 0.01);
    for (size_t i = 0; i < mu.size(); ++i) CHECK(std::abs(res.estimates[i].mu[0] - mu[i][0]) / space[0].range() < 0.02);
  }

  SUBCASE("dropping frames only changes warm starts") {
    std::vector<VecX> mu;
    for (int i = 0; i < 20; ++i) mu.push_back(mu2(0.2 + 0.025 * i, -0.2 + 0.02 * i));
    const auto frames = sc.frames(mu, 0.5, 0.0, 9);
    std::vector<ObservationFrame> kept;
    auto rng = testing::make_rng(2);
    for (const auto& f : frames)
      if (testing::uniform(rng, 0, 1) > 0.1 || f.index == 0) kept.push_back(f);
    REQUIRE(kept.size() < frames.size());
    TrackerConfig cfg;
    const auto all = track_sequence(frames, tm, centre(space), cfg);
    const auto some = track_sequence(kept, tm, centre(space), cfg);
    for (size_t i = 0; i < kept.size(); ++i) {
      CHECK(range_error(some.estimates[i].mu, all.estimates[kept[i].index].mu, space) < 1e-6);
    }
  }

  SUBCASE("frames must be time-ordered") {
    auto frames = sc.frames({mu2(0.3, 0), mu2(0.3, 0)}, 0.0, 0.0, 1);
    std::swap(frames[0], frames[1]);
    CHECK_THROWS_AS(track_sequence(frames, tm, centre(space), TrackerConfig{}), ArgumentError);
  }
}

TEST_CASE("config validation and unusable frames") {
  TrackerConfig c;
  c.huber_delta = 0;
  CHECK_THROWS_AS(c.validate(2), ArgumentError);
  c = {};
  c.lambda_down = 1.5;
  CHECK_THROWS_AS(c.validate(2), ArgumentError);
  c = {};
  c.slow_params = {2};
  CHECK_THROWS_AS(c.validate(2), ArgumentError);

  const Scene sc;
  const auto tm = sc.model();
  ObservationFrame empty;
  empty.wTc = sc.wTc;
  CHECK_THROWS_AS(robust_residuals(empty, tm, mu2(0.3, 0), TrackerConfig{}), FrameUnusableError);
  // Camera turned around: every point is behind it.
  ObservationFrame behind = sc.frames({mu2(0.3, 0)}, 0.0, 0.0, 1)[0];
  behind.wTc.R = behind.wTc.R * Eigen::AngleAxisd(M_PI, Vec3::UnitY()).toRotationMatrix();
  CHECK_THROWS_AS(robust_residuals(behind, tm, mu2(0.3, 0), TrackerConfig{}), FrameUnusableError);
}

TEST_CASE("estimate csv columns") {
  FrameEstimate e;
  e.frame = 3;
  e.mu = mu2(0.25, -1.5);
  e.cost = 2.0;
  e.iterations = 4;
  e.converged = true;
  e.inliers = 17;
  const auto t = estimates_to_csv({e}, 2);
  CHECK(t.to_string() == "frame,mu_0,mu_1,cost,iters,converged,inliers\n3,0.25,-1.5,2,4,1,17\n");
}
