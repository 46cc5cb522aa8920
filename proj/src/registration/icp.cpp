#include "morph/registration/icp.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace morph::registration {

using Hit = spatial::KdTree::Hit;

SurfaceModel::SurfaceModel(std::vector<Vec3> samples) : centroid_(Vec3::Zero()), spacing_(0.0) {
  if (samples.size() < 3) throw ArgumentError("surface model needs at least three samples");
  for (const auto& p : samples) centroid_ += p;
  centroid_ /= static_cast<double>(samples.size());
  tree_ = spatial::KdTree(std::move(samples));
  for (int i = 0; i < tree_.size(); ++i) spacing_ += std::sqrt(tree_.knearest(tree_.point(i), 2)[1].dist2);
  spacing_ /= tree_.size();
}

SurfaceModel::SurfaceModel(std::vector<Vec3> samples, std::vector<int> patch_of, std::vector<Patch> patches)
    : SurfaceModel(std::move(samples)) {
  if (patch_of.size() != static_cast<size_t>(size())) throw ArgumentError("one patch index per sample expected");
  for (int f : patch_of)
    if (f < 0 || f >= static_cast<int>(patches.size())) throw ArgumentError("patch index out of range");
  patch_of_ = std::move(patch_of);
  patches_ = std::move(patches);
}

namespace {

// Closest point of a bilinear patch: projected Gauss-Newton on the unit square.
Vec3 project_patch(const SurfaceModel::Patch& c, const Vec3& p) {
  double a = 0.5, b = 0.5;
  Vec3 x;
  for (int it = 0; it < 20; ++it) {
    x = (1 - a) * (1 - b) * c[0] + a * (1 - b) * c[1] + a * b * c[2] + (1 - a) * b * c[3];
    Eigen::Matrix<double, 3, 2> J;
    J.col(0) = (1 - b) * (c[1] - c[0]) + b * (c[2] - c[3]);
    J.col(1) = (1 - a) * (c[3] - c[0]) + a * (c[2] - c[1]);
    const Eigen::Vector2d d = (J.transpose() * J).ldlt().solve(J.transpose() * (p - x));
    const double na = std::clamp(a + d[0], 0.0, 1.0), nb = std::clamp(b + d[1], 0.0, 1.0);
    const bool done = std::abs(na - a) + std::abs(nb - b) < 1e-14;
    a = na;
    b = nb;
    if (done) break;
  }
  return (1 - a) * (1 - b) * c[0] + a * (1 - b) * c[1] + a * b * c[2] + (1 - a) * b * c[3];
}

}  // namespace

std::pair<Vec3, double> SurfaceModel::closest(const Vec3& p) const {
  if (patches_.empty()) {
    const Hit h = tree_.nearest(p);
    return {tree_.point(h.index), h.dist2};
  }
  // Patches of the few nearest samples; near an edge the nearest sample can
  // sit on the neighbouring face.
  constexpr int kCandidates = 8;
  std::pair<Vec3, double> best{Vec3::Zero(), std::numeric_limits<double>::infinity()};
  std::vector<int> seen;
  for (const Hit& h : tree_.knearest(p, std::min(kCandidates, size()))) {
    const int f = patch_of_[h.index];
    if (std::find(seen.begin(), seen.end(), f) != seen.end()) continue;
    seen.push_back(f);
    const Vec3 q = project_patch(patches_[f], p);
    const double d2 = (q - p).squaredNorm();
    if (d2 < best.second) best = {q, d2};
  }
  return best;
}

std::vector<Hit> match_points_serial(const std::vector<Vec3>& pts, const SurfaceModel& model) {
  std::vector<Hit> out(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) out[i] = model.tree().nearest(pts[i]);
  return out;
}

std::vector<Hit> match_points(const std::vector<Vec3>& pts, const SurfaceModel& model) {
  std::vector<Hit> out(pts.size());
  const long n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(static) if (n >= 512)
  for (long i = 0; i < n; ++i) out[i] = model.tree().nearest(pts[i]);
  return out;
}

namespace {

struct Measure {
  std::vector<int> kept;  // cloud indices, closest first
  std::vector<Vec3> targets;  // object-frame partner of every kept point
  double rms = 0.0;
};

Measure measure(const PointCloud& cloud, const SurfaceModel& model, const RigidTransform& T, int keep) {
  const RigidTransform inv = T.inverse();
  const long n = static_cast<long>(cloud.points.size());
  std::vector<Vec3> partner(n);
  std::vector<double> dist2(n);
#pragma omp parallel for schedule(static) if (n >= 512)
  for (long i = 0; i < n; ++i) {
    auto [q, d2] = model.closest(inv.apply(cloud.points[i]));
    partner[i] = q;
    dist2[i] = d2;
  }
  Measure m;
  m.kept.resize(n);
  std::iota(m.kept.begin(), m.kept.end(), 0);
  auto closer = [&dist2](int a, int b) { return dist2[a] != dist2[b] ? dist2[a] < dist2[b] : a < b; };
  std::partial_sort(m.kept.begin(), m.kept.begin() + keep, m.kept.end(), closer);
  m.kept.resize(keep);
  double s = 0.0;
  for (int i : m.kept) {
    m.targets.push_back(partner[i]);
    s += dist2[i];
  }
  m.rms = std::sqrt(s / keep);
  return m;
}

RigidTransform fit(const PointCloud& cloud, const Measure& m) {
  Eigen::Matrix3Xd src(3, m.kept.size()), dst(3, m.kept.size());
  for (size_t c = 0; c < m.kept.size(); ++c) {
    src.col(c) = m.targets[c];
    dst.col(c) = cloud.points[m.kept[c]];
  }
  const Eigen::Matrix4d h = Eigen::umeyama(src, dst, false);
  return {h.topLeftCorner<3, 3>(), h.topRightCorner<3, 1>()};
}

void check_cloud(const PointCloud& cloud) {
  if (cloud.points.empty()) throw ArgumentError("point cloud is empty");
  if (!cloud.ids.empty() && cloud.ids.size() != cloud.points.size()) throw ArgumentError("cloud ids do not match points");
  for (const auto& p : cloud.points)
    if (!p.allFinite()) throw ArgumentError("point cloud has non-finite coordinates");
}

}  // namespace

IcpResult icp_align(const PointCloud& cloud, const SurfaceModel& model, const RigidTransform& init,
                    const IcpOptions& options) {
  check_cloud(cloud);
  if (!(options.trim_fraction > 0.0 && options.trim_fraction <= 1.0)) throw ArgumentError("trim fraction must be in (0, 1]");
  if (!init.is_proper(1e-8)) throw ArgumentError("initial rotation is not proper");
  const int keep = std::clamp(static_cast<int>(std::lround(options.trim_fraction * cloud.size())), std::min(3, cloud.size()),
                              cloud.size());

  IcpResult r;
  r.trim_fraction = options.trim_fraction;
  r.wTo = init;
  Measure m = measure(cloud, model, r.wTo, keep);
  r.history.push_back(m.rms);
  while (r.iterations < options.max_iterations) {
    ++r.iterations;
    if (m.rms == 0.0) {
      r.converged = true;
      break;
    }
    const RigidTransform next = fit(cloud, m);
    Measure mn = measure(cloud, model, next, keep);
    // The trimmed objective cannot grow; guard against round-off anyway.
    if (mn.rms > m.rms) {
      r.converged = true;
      break;
    }
    const double change = (m.rms - mn.rms) / m.rms;
    r.wTo = next;
    m = std::move(mn);
    r.history.push_back(m.rms);
    if (change < options.rel_tol) {
      r.converged = true;
      break;
    }
  }
  r.rms = m.rms;
  return r;
}

IcpResult icp_register(const PointCloud& cloud, const SurfaceModel& model, const RigidTransform& init,
                       const IcpOptions& options) {
  IcpResult best = icp_align(cloud, model, init, options);
  if (best.rms <= options.accept_rms) return best;

  Vec3 c_cloud = Vec3::Zero();
  for (const auto& p : cloud.points) c_cloud += p;
  c_cloud /= cloud.size();
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  int attempts = 1;
  for (int s = 0; s < options.restarts; ++s) {
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    q.normalize();
    const Mat3 R = q.toRotationMatrix();
    IcpResult r = icp_align(cloud, model, {R, c_cloud - R * model.centroid()}, options);
    ++attempts;
    if (r.rms < best.rms) best = std::move(r);
    if (best.rms <= options.accept_rms) break;
  }
  best.attempts = attempts;
  if (best.rms > options.accept_rms) {
    throw RegistrationError("registration rms " + format_double(best.rms) + " above threshold " +
                                format_double(options.accept_rms) + " after " + std::to_string(attempts) + " attempts",
                            best);
  }
  return best;
}

const char* to_string(Label l) {
  switch (l) {
    case Label::Static: return "static";
    case Label::Deformable: return "deformable";
    case Label::Unresolved: return "unresolved";
  }
  return "?";
}

std::vector<Label> segment_points(const PointCloud& cloud, const SurfaceModel& model, const RigidTransform& wTo,
                                  double threshold) {
  if (!(threshold > 0.0)) throw ArgumentError("segmentation threshold must be positive");
  const RigidTransform inv = wTo.inverse();
  std::vector<Label> out;
  for (const auto& p : cloud.points) {
    const double d = std::sqrt(model.closest(inv.apply(p)).second);
    out.push_back(d < threshold ? Label::Deformable : d < 2 * threshold ? Label::Unresolved : Label::Static);
  }
  return out;
}

CsvTable cloud_to_csv(const PointCloud& cloud) {
  CsvTable t;
  t.header = {"id", "x", "y", "z"};
  for (int i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    t.rows.push_back({std::to_string(cloud.id(i)), format_double(p.x()), format_double(p.y()), format_double(p.z())});
  }
  return t;
}

PointCloud cloud_from_csv(const CsvTable& table, const std::string& source) {
  const int ci = table.column("id"), cx = table.column("x"), cy = table.column("y"), cz = table.column("z");
  if (ci < 0 || cx < 0 || cy < 0 || cz < 0) throw ParseError(source + ": expected columns id,x,y,z", 1, 1);
  PointCloud c;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const double id = csv_number(table, r, ci, source);
    if (id != static_cast<int>(id)) throw ParseError(source + ": id must be an integer", static_cast<int>(r) + 2, 1);
    const Vec3 p(csv_number(table, r, cx, source), csv_number(table, r, cy, source), csv_number(table, r, cz, source));
    if (!p.allFinite()) throw ParseError(source + ": non-finite coordinate", static_cast<int>(r) + 2, 1);
    c.ids.push_back(static_cast<int>(id));
    c.points.push_back(p);
  }
  return c;
}

Json report_to_json(const IcpResult& r) {
  Json rot = Json::array();
  for (int i = 0; i < 3; ++i) rot.push_back({r.wTo.R(i, 0), r.wTo.R(i, 1), r.wTo.R(i, 2)});
  return Json{{"rotation", rot},
              {"translation", {r.wTo.t.x(), r.wTo.t.y(), r.wTo.t.z()}},
              {"rms", r.rms},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"attempts", r.attempts},
              {"trim_fraction", r.trim_fraction}};
}

}  // namespace morph::registration
