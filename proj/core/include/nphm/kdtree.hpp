#pragma once

#include <vector>

#include "nphm/common.hpp"

namespace nphm {

/// Exact nearest-neighbor search over a fixed 3D point set.
/// Immutable after construction and safe to share across threads.
class KdTree3 {
 public:
  explicit KdTree3(const MatX3& points);

  struct Hit {
    Index index = -1;
    double dist = 0.0;
  };

  Hit nearest(const Vec3& q) const;

  /// Indices of all points with ||p - q|| <= radius.
  void radius_search(const Vec3& q, double radius, std::vector<Index>& out) const;

  Index size() const { return points_.rows(); }
  const MatX3& points() const { return points_; }

 private:
  struct Node {
    int axis = -1;           // -1 marks a leaf
    double split = 0.0;
    Index left = -1, right = -1;
    Index begin = 0, end = 0;  // leaf range into order_
  };

  Index build(Index begin, Index end);
  void nearest_rec(Index node, const Vec3& q, Hit& best) const;
  void radius_rec(Index node, const Vec3& q, double r2, std::vector<Index>& out) const;

  MatX3 points_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  Index root_ = -1;
};

}  // namespace nphm
