#pragma once

#include "morph/core.hpp"

#include <vector>

namespace morph::spatial {

/// Static 3D k-d tree. Queries are const and thread safe. Ties in distance
/// resolve to the lower point index, so results are deterministic.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  int size() const { return static_cast<int>(points_.size()); }
  const Vec3& point(int i) const { return points_[i]; }

  struct Hit {
    int index = -1;
    double dist2 = 0.0;
  };
  Hit nearest(const Vec3& q) const;
  /// The k nearest points, closest first.
  std::vector<Hit> knearest(const Vec3& q, int k) const;

 private:
  struct Node {
    int point;       // index into points_
    int axis;
    int left = -1;
    int right = -1;
  };
  int build(std::vector<int>& idx, int lo, int hi);
  void search(int node, const Vec3& q, int k, std::vector<Hit>& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace morph::spatial
