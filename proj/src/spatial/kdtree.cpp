#include "morph/spatial/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace morph::spatial {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  std::vector<int> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, static_cast<int>(idx.size()));
}

int KdTree::build(std::vector<int>& idx, int lo, int hi) {
  if (lo >= hi) return -1;
  // Split on the widest extent of this cell.
  Vec3 mn = points_[idx[lo]], mx = mn;
  for (int i = lo + 1; i < hi; ++i) {
    mn = mn.cwiseMin(points_[idx[i]]);
    mx = mx.cwiseMax(points_[idx[i]]);
  }
  int axis;
  (mx - mn).maxCoeff(&axis);
  const int mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi, [&](int a, int b) {
    const double pa = points_[a][axis], pb = points_[b][axis];
    return pa < pb || (pa == pb && a < b);
  });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[mid], axis});
  const int l = build(idx, lo, mid);
  const int r = build(idx, mid + 1, hi);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

namespace {

bool closer(const KdTree::Hit& a, const KdTree::Hit& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

void KdTree::search(int node, const Vec3& q, int k, std::vector<Hit>& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Hit h{n.point, (points_[n.point] - q).squaredNorm()};
  if (static_cast<int>(best.size()) < k || closer(h, best.back())) {
    best.insert(std::upper_bound(best.begin(), best.end(), h, closer), h);
    if (static_cast<int>(best.size()) > k) best.pop_back();
  }
  const double d = q[n.axis] - points_[n.point][n.axis];
  const int near = d < 0 ? n.left : n.right;
  const int far = d < 0 ? n.right : n.left;
  search(near, q, k, best);
  // <= keeps equal-distance candidates on the far side reachable for tie-breaking.
  if (static_cast<int>(best.size()) < k || d * d <= best.back().dist2) search(far, q, k, best);
}

KdTree::Hit KdTree::nearest(const Vec3& q) const {
  if (points_.empty()) throw ArgumentError("nearest-neighbour query on an empty tree");
  std::vector<Hit> best;
  best.reserve(2);
  search(root_, q, 1, best);
  return best.front();
}

std::vector<KdTree::Hit> KdTree::knearest(const Vec3& q, int k) const {
  std::vector<Hit> best;
  if (k <= 0 || points_.empty()) return best;
  best.reserve(k + 1);
  search(root_, q, std::min(k, size()), best);
  return best;
}

}  // namespace morph::spatial
