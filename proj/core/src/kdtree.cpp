#include "nphm/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace nphm {

namespace {
constexpr Index kLeafSize = 16;
}

KdTree3::KdTree3(const MatX3& points) : points_(points) {
  require(points_.rows() > 0, "KdTree3: empty point set");
  order_.resize(points_.rows());
  std::iota(order_.begin(), order_.end(), Index{0});
  nodes_.reserve(2 * points_.rows() / kLeafSize + 4);
  root_ = build(0, points_.rows());
}

Index KdTree3::build(Index begin, Index end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<Index>(nodes_.size()) - 1;
  }

  Vec3 lo = points_.row(order_[begin]);
  Vec3 hi = lo;
  for (Index i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.row(order_[i]).transpose());
    hi = hi.cwiseMax(points_.row(order_[i]).transpose());
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) { return points_(a, axis) < points_(b, axis); });

  node.axis = axis;
  node.split = points_(order_[mid], axis);
  const Index self = static_cast<Index>(nodes_.size());
  nodes_.push_back(node);
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

KdTree3::Hit KdTree3::nearest(const Vec3& q) const {
  Hit best;
  best.dist = std::numeric_limits<double>::infinity();
  nearest_rec(root_, q, best);
  return best;
}

void KdTree3::nearest_rec(Index ni, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    for (Index i = node.begin; i < node.end; ++i) {
      const Index p = order_[i];
      const double d = (points_.row(p).transpose() - q).norm();
      if (d < best.dist) {
        best.dist = d;
        best.index = p;
      }
    }
    return;
  }
  const double diff = q(node.axis) - node.split;
  const Index near = diff < 0 ? node.left : node.right;
  const Index far = diff < 0 ? node.right : node.left;
  nearest_rec(near, q, best);
  if (std::abs(diff) < best.dist) nearest_rec(far, q, best);
}

void KdTree3::radius_search(const Vec3& q, double radius, std::vector<Index>& out) const {
  out.clear();
  radius_rec(root_, q, radius * radius, out);
}

void KdTree3::radius_rec(Index ni, const Vec3& q, double r2, std::vector<Index>& out) const {
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    for (Index i = node.begin; i < node.end; ++i) {
      const Index p = order_[i];
      if ((points_.row(p).transpose() - q).squaredNorm() <= r2) out.push_back(p);
    }
    return;
  }
  const double diff = q(node.axis) - node.split;
  const Index near = diff < 0 ? node.left : node.right;
  const Index far = diff < 0 ? node.right : node.left;
  radius_rec(near, q, r2, out);
  if (diff * diff <= r2) radius_rec(far, q, r2, out);
}

}  // namespace nphm
