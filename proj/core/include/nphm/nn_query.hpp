#pragma once

#include "nphm/kdtree.hpp"

namespace nphm {

/// Exact nearest neighbors of each query point inside `target`.
inline std::vector<KdTree3::Hit> nn_query(const MatX3& target, const MatX3& queries) {
  require(target.rows() > 0, "nn_query: empty target");
  KdTree3 tree(target);
  std::vector<KdTree3::Hit> hits(queries.rows());
  for (Index i = 0; i < queries.rows(); ++i) hits[i] = tree.nearest(queries.row(i));
  return hits;
}

}  // namespace nphm
