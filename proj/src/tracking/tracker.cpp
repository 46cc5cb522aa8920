#include "morph/tracking/tracker.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace morph::tracking {

void TrackerConfig::validate(int num_params) const {
  if (!(huber_delta > 0.0)) throw ArgumentError("huber_delta must be positive");
  if (!(lambda0 > 0.0)) throw ArgumentError("lambda0 must be positive");
  if (!(lambda_up > 1.0 && lambda_down > 0.0 && lambda_down < 1.0)) {
    throw ArgumentError("damping factors must satisfy up > 1 > down > 0");
  }
  if (max_iterations < 1) throw ArgumentError("max_iterations must be positive");
  if (!(step_tol > 0.0)) throw ArgumentError("step_tol must be positive");
  if (slow_window < 1) throw ArgumentError("slow_window must be positive");
  if (!(slow_max_std > 0.0)) throw ArgumentError("slow_max_std must be positive");
  for (int k : slow_params)
    if (k < 0 || k >= num_params) throw ArgumentError("slow parameter id out of range");
}

TrackingModel::TrackingModel(const mor::SeparatedSolution& sol, const fem::Mesh& mesh,
                             const std::vector<vision::SurfaceSample>& samples, const vision::CameraModel& camera,
                             const RigidTransform& wTo)
    : eval_(sol, mesh, vision::bindings_of(samples)), positions_(vision::positions_of(samples)), camera_(camera),
      wTo_(wTo) {
  camera_.validate();
}

double huber_weight(double norm, double delta) { return norm <= delta ? 1.0 : delta / norm; }

double huber_rho(double norm, double delta) {
  return norm <= delta ? norm * norm : 2.0 * delta * norm - delta * delta;
}

double ResidualSet::cost(double huber_delta, bool robust) const {
  double c = 0.0;
  for (int i = 0; i < static_cast<int>(kept.size()); ++i) {
    const double n = r.segment<2>(2 * i).norm();
    c += robust ? huber_rho(n, huber_delta) : n * n;
  }
  return c;
}

int ResidualSet::inliers() const {
  int n = 0;
  for (int i = 0; i < w.size(); ++i) n += w[i] == 1.0;
  return n;
}

namespace {

struct PerMeasurement {
  bool ok = false;
  Vec2 r;
  Eigen::Matrix<double, 2, Eigen::Dynamic> J;
};

void evaluate_one(const vision::Measurement& m, const TrackingModel& model, const RigidTransform& wTc, const VecX& u,
                  const MatX& sens, PerMeasurement& out) {
  const int p = m.point_id;
  const Vec3 x_c = vision::to_camera(wTc, model.wTo(), model.position(p) + u.segment<3>(3 * p));
  if (x_c.z() <= vision::kDepthEpsilon) return;
  out.ok = true;
  out.r = m.px - vision::project_camera(model.camera(), x_c);
  const auto jac = vision::image_jacobian(model.camera(), x_c);
  out.J.resize(2, sens.cols());
  for (int k = 0; k < sens.cols(); ++k) {
    out.J.col(k) = vision::project_sensitivity(jac, wTc, model.wTo(), sens.block<3, 1>(3 * p, k));
  }
}

ResidualSet assemble(const ObservationFrame& frame, const TrackingModel& model, const VecX& mu_in,
                     const TrackerConfig& config, bool parallel) {
  VecX mu = mu_in;
  model.parameter_space().clamp(mu);
  const auto& eval = model.evaluator();
  const VecX u = parallel ? eval.displacement(mu) : eval.displacement_serial(mu);
  const MatX sens = parallel ? eval.sensitivities(mu) : eval.sensitivities_serial(mu);

  const int m = static_cast<int>(frame.measurements.size());
  for (const auto& meas : frame.measurements) {
    if (meas.point_id < 0 || meas.point_id >= model.num_points()) {
      throw ArgumentError("measurement refers to unknown point " + std::to_string(meas.point_id));
    }
  }
  std::vector<PerMeasurement> per(m);
  if (parallel) {
#pragma omp parallel for schedule(static) if (m >= 256)
    for (int i = 0; i < m; ++i) evaluate_one(frame.measurements[i], model, frame.wTc, u, sens, per[i]);
  } else {
    for (int i = 0; i < m; ++i) evaluate_one(frame.measurements[i], model, frame.wTc, u, sens, per[i]);
  }

  ResidualSet rs;
  for (int i = 0; i < m; ++i) {
    if (per[i].ok) rs.kept.push_back(i);
  }
  rs.dropped = m - static_cast<int>(rs.kept.size());
  if (rs.kept.empty()) throw FrameUnusableError("frame " + std::to_string(frame.index) + " has no usable measurement");
  const int n = static_cast<int>(rs.kept.size());
  rs.r.resize(2 * n);
  rs.w.resize(n);
  rs.J.resize(2 * n, sens.cols());
  for (int c = 0; c < n; ++c) {
    const auto& pm = per[rs.kept[c]];
    rs.r.segment<2>(2 * c) = pm.r;
    rs.J.middleRows<2>(2 * c) = pm.J;
    rs.w[c] = config.robust ? huber_weight(pm.r.norm(), config.huber_delta) : 1.0;
  }
  return rs;
}

// Normal equations over the columns in `cols`, summed in measurement order.
void normal_equations(const MatX& J, const VecX& r, const VecX& w, const std::vector<int>& cols, MatX& A, VecX& b) {
  const int n = static_cast<int>(cols.size());
  A.setZero(n, n);
  b.setZero(n);
  for (int i = 0; i < w.size(); ++i) {
    for (int row = 2 * i; row < 2 * i + 2; ++row) {
      for (int a = 0; a < n; ++a) {
        const double ja = w[i] * J(row, cols[a]);
        b[a] += ja * r[row];
        for (int c = 0; c < n; ++c) A(a, c) += ja * J(row, cols[c]);
      }
    }
  }
}

// Absolute floor on the diagonal, relative to its largest entry.
bool floor_diagonal(MatX& A) {
  const double floor = 1e-12 * std::max(A.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  bool floored = false;
  for (int k = 0; k < A.rows(); ++k) {
    if (A(k, k) <= floor) {
      A(k, k) = floor;
      floored = true;
    }
  }
  return floored;
}

VecX damped_solve(MatX A, const VecX& b, double lambda, bool& floored) {
  floored = floor_diagonal(A);
  A.diagonal() *= 1.0 + lambda;
  return A.ldlt().solve(b);
}

std::vector<int> all_columns(int n) {
  std::vector<int> c(n);
  for (int k = 0; k < n; ++k) c[k] = k;
  return c;
}

}  // namespace

ResidualSet robust_residuals(const ObservationFrame& frame, const TrackingModel& model, const VecX& mu,
                             const TrackerConfig& config) {
  return assemble(frame, model, mu, config, true);
}

ResidualSet robust_residuals_serial(const ObservationFrame& frame, const TrackingModel& model, const VecX& mu,
                                    const TrackerConfig& config) {
  return assemble(frame, model, mu, config, false);
}

LmStep lm_iterate(const MatX& J, const VecX& r, const VecX& w, double lambda) {
  if (J.rows() != r.size() || r.size() != 2 * w.size()) throw ArgumentError("inconsistent least-squares sizes");
  if (!J.allFinite() || !r.allFinite()) throw ArgumentError("non-finite Jacobian or residual");
  MatX A;
  VecX b;
  normal_equations(J, r, w, all_columns(static_cast<int>(J.cols())), A, b);
  LmStep s;
  s.delta = damped_solve(A, b, lambda, s.floored);
  if (s.floored) spdlog::warn("damped normal equations are singular; added an absolute floor");
  return s;
}

FrameEstimate estimate_frame(const ObservationFrame& frame, const TrackingModel& model, const VecX& mu_init,
                             const TrackerConfig& config, const std::vector<bool>& fixed) {
  const auto& space = model.parameter_space();
  const int np = space.size();
  config.validate(np);
  if (mu_init.size() != np) throw ArgumentError("initial parameters have the wrong size");
  if (!fixed.empty() && static_cast<int>(fixed.size()) != np) throw ArgumentError("fixed mask has the wrong size");

  FrameEstimate est;
  est.frame = frame.index;
  est.mu = mu_init;
  space.clamp(est.mu);
  ResidualSet rs = robust_residuals(frame, model, est.mu, config);
  double cost = rs.cost(config.huber_delta, config.robust);
  double lambda = config.lambda0;
  bool warned_floor = false;

  while (est.iterations < config.max_iterations) {
    if (cost == 0.0) {
      est.converged = true;
      break;
    }
    ++est.iterations;

    // Clamp-and-freeze: free parameters sitting on a bound whose step points
    // outward are dropped and the step is recomputed.
    std::vector<int> cols;
    for (int k = 0; k < np; ++k)
      if (fixed.empty() || !fixed[k]) cols.push_back(k);
    VecX delta = VecX::Zero(np);
    bool floored = false;
    for (;;) {
      MatX A;
      VecX b;
      normal_equations(rs.J, rs.r, rs.w, cols, A, b);
      const VecX d = cols.empty() ? VecX() : damped_solve(A, b, lambda, floored);
      delta.setZero();
      for (size_t c = 0; c < cols.size(); ++c) delta[cols[c]] = d[c];
      std::vector<int> keep;
      for (int k : cols) {
        const bool at_lo = est.mu[k] <= space[k].lower && delta[k] < 0;
        const bool at_hi = est.mu[k] >= space[k].upper && delta[k] > 0;
        if (!at_lo && !at_hi) keep.push_back(k);
      }
      if (keep.size() == cols.size()) break;
      cols = std::move(keep);
    }
    if (floored && !warned_floor) {
      est.warnings.push_back("singular damped system at frame " + std::to_string(frame.index) + "; floor added");
      warned_floor = true;
    }

    VecX trial = est.mu + delta;
    space.clamp(trial);
    double step = 0.0;
    for (int k = 0; k < np; ++k) step = std::max(step, std::abs(trial[k] - est.mu[k]) / space[k].range());
    if (step < config.step_tol) {
      est.converged = true;
      break;
    }

    double trial_cost = std::numeric_limits<double>::infinity();
    ResidualSet trial_rs;
    try {
      trial_rs = robust_residuals(frame, model, trial, config);
      trial_cost = trial_rs.cost(config.huber_delta, config.robust);
    } catch (const FrameUnusableError&) {
    }
    if (trial_cost < cost) {
      est.mu = trial;
      rs = std::move(trial_rs);
      cost = trial_cost;
      lambda = std::max(lambda * config.lambda_down, 1e-15);
    } else {
      lambda *= config.lambda_up;
      if (lambda > config.lambda_max) {
        est.warnings.push_back("damping overflow at frame " + std::to_string(frame.index));
        break;
      }
    }
  }

  est.cost = cost;
  est.inliers = rs.inliers();
  est.measurements = static_cast<int>(rs.kept.size());
  est.variance = VecX::Zero(np);
  std::vector<int> cols;
  for (int k = 0; k < np; ++k)
    if (fixed.empty() || !fixed[k]) cols.push_back(k);
  if (!cols.empty()) {
    MatX A;
    VecX b;
    normal_equations(rs.J, rs.r, rs.w, cols, A, b);
    floor_diagonal(A);
    const MatX inv = A.ldlt().solve(MatX::Identity(A.rows(), A.cols()));
    for (size_t c = 0; c < cols.size(); ++c) est.variance[cols[c]] = inv(c, c);
  }
  for (const auto& w : est.warnings) spdlog::warn("{}", w);
  return est;
}

namespace {

// Weighted median of (value, weight) pairs; midpoint when the cumulative
// weight hits one half exactly.
double weighted_median(std::vector<std::pair<double, double>> v) {
  std::sort(v.begin(), v.end());
  double total = 0.0;
  for (const auto& e : v) total += e.second;
  double acc = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    acc += v[i].second;
    if (acc > 0.5 * total) return v[i].first;
    if (acc == 0.5 * total && i + 1 < v.size()) return 0.5 * (v[i].first + v[i + 1].first);
  }
  return v.back().first;
}

}  // namespace

SequenceResult track_sequence(const std::vector<ObservationFrame>& frames, const TrackingModel& model,
                              const VecX& mu_init, const TrackerConfig& config) {
  const int np = model.num_params();
  config.validate(np);
  for (size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].index <= frames[i - 1].index) throw ArgumentError("frames must be time-ordered");
  }
  SequenceResult out;
  VecX mu = mu_init;
  model.parameter_space().clamp(mu);
  std::vector<bool> fixed(np, false);
  for (int k : config.slow_params) fixed[k] = true;
  std::vector<std::deque<std::pair<double, double>>> window(np);

  for (const auto& frame : frames) {
    try {
      FrameEstimate est;
      if (config.slow_params.empty()) {
        est = estimate_frame(frame, model, mu, config);
        out.per_frame.push_back(est.mu);
      } else {
        const FrameEstimate free = estimate_frame(frame, model, mu, config);
        out.per_frame.push_back(free.mu);
        VecX start = free.mu;
        for (int k : config.slow_params) {
          const double limit = config.slow_max_std * model.parameter_space()[k].range();
          if (std::sqrt(free.variance[k]) <= limit) {
            window[k].push_back({free.mu[k], 1.0 / std::max(free.variance[k], 1e-300)});
            if (static_cast<int>(window[k].size()) > config.slow_window) window[k].pop_front();
          }
          start[k] = window[k].empty() ? mu[k] : weighted_median({window[k].begin(), window[k].end()});
        }
        est = estimate_frame(frame, model, start, config, fixed);
        est.iterations += free.iterations;
        est.warnings.insert(est.warnings.begin(), free.warnings.begin(), free.warnings.end());
      }
      mu = est.mu;
      out.estimates.push_back(std::move(est));
    } catch (const FrameUnusableError& e) {
      spdlog::warn("{}", e.what());
      FrameEstimate est;
      est.frame = frame.index;
      est.mu = mu;
      est.variance = VecX::Zero(np);
      est.usable = false;
      est.warnings.push_back(e.what());
      out.per_frame.push_back(mu);
      out.estimates.push_back(std::move(est));
      ++out.failed;
    }
  }
  return out;
}

CsvTable estimates_to_csv(const std::vector<FrameEstimate>& estimates, int num_params) {
  CsvTable t;
  t.header.push_back("frame");
  for (int k = 0; k < num_params; ++k) t.header.push_back("mu_" + std::to_string(k));
  for (const char* c : {"cost", "iters", "converged", "inliers"}) t.header.push_back(c);
  for (const auto& e : estimates) {
    std::vector<std::string> row{std::to_string(e.frame)};
    for (int k = 0; k < num_params; ++k) row.push_back(format_double(e.mu[k]));
    row.push_back(format_double(e.cost));
    row.push_back(std::to_string(e.iterations));
    row.push_back(e.converged ? "1" : "0");
    row.push_back(std::to_string(e.inliers));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace morph::tracking
