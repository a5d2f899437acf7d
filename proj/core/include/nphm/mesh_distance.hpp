#pragma once

#include <memory>

#include "nphm/kdtree.hpp"
#include "nphm/tri_mesh.hpp"

namespace nphm {

/// Closest point on a triangle (Ericson).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Exact point-to-mesh distance queries, accelerated by a kd-tree over
/// face centroids plus a circumradius bound.
class MeshDistance {
 public:
  explicit MeshDistance(const TriMesh& mesh);

  struct Hit {
    double dist = 0.0;
    Index face = -1;
    Vec3 closest = Vec3::Zero();
  };

  Hit closest_point(const Vec3& q) const;

  const TriMesh& mesh() const { return mesh_; }

 private:
  TriMesh mesh_;
  std::unique_ptr<KdTree3> centroids_;
  std::vector<double> circumradius_;
  double max_circumradius_ = 0.0;
};

}  // namespace nphm
