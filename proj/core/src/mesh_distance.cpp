#include "nphm/mesh_distance.hpp"

#include <algorithm>

namespace nphm {

namespace {
Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return a;
  const double t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
  return a + t * ab;
}
}  // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;

  // Needle/point triangles: the barycentric residuals below are dominated
  // by rounding, so fall back to the edge segments (their union is the
  // whole point set of a degenerate triangle).
  if (ab.cross(ac).squaredNorm() <= 1e-24 * ab.squaredNorm() * ac.squaredNorm()) {
    Vec3 best = closest_point_on_segment(p, a, b);
    const Vec3 q2 = closest_point_on_segment(p, a, c);
    if ((q2 - p).squaredNorm() < (best - p).squaredNorm()) best = q2;
    const Vec3 q3 = closest_point_on_segment(p, b, c);
    if ((q3 - p).squaredNorm() < (best - p).squaredNorm()) best = q3;
    return best;
  }
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double sum = va + vb + vc;
  if (!(sum > 1e-300)) return a;  // degenerate (zero-area) triangle
  const double denom = 1.0 / sum;
  return a + ab * (vb * denom) + ac * (vc * denom);
}

MeshDistance::MeshDistance(const TriMesh& mesh) : mesh_(mesh) {
  require(!mesh_.empty(), "MeshDistance: empty mesh");
  MatX3 cents(mesh_.face_count(), 3);
  circumradius_.resize(mesh_.face_count());
  for (Index f = 0; f < mesh_.face_count(); ++f) {
    const Vec3 c = mesh_.face_centroid(f);
    cents.row(f) = c.transpose();
    double r = 0;
    for (int k = 0; k < 3; ++k)
      r = std::max(r, (Vec3(mesh_.vertices.row(mesh_.faces(f, k))) - c).norm());
    circumradius_[f] = r;
    max_circumradius_ = std::max(max_circumradius_, r);
  }
  centroids_ = std::make_unique<KdTree3>(cents);
}

MeshDistance::Hit MeshDistance::closest_point(const Vec3& q) const {
  const auto seed = centroids_->nearest(q);
  Hit best;
  {
    const Index f = seed.index;
    const Vec3 cp = closest_point_on_triangle(q, mesh_.vertices.row(mesh_.faces(f, 0)),
                                              mesh_.vertices.row(mesh_.faces(f, 1)),
                                              mesh_.vertices.row(mesh_.faces(f, 2)));
    best.face = f;
    best.closest = cp;
    best.dist = (cp - q).norm();
  }

  // Any face whose centroid is farther than best + its circumradius cannot win.
  std::vector<Index> candidates;
  centroids_->radius_search(q, best.dist + max_circumradius_, candidates);
  for (Index f : candidates) {
    if (f == best.face) continue;
    const Vec3 cp = closest_point_on_triangle(q, mesh_.vertices.row(mesh_.faces(f, 0)),
                                              mesh_.vertices.row(mesh_.faces(f, 1)),
                                              mesh_.vertices.row(mesh_.faces(f, 2)));
    const double d = (cp - q).norm();
    if (d < best.dist) {
      best.dist = d;
      best.face = f;
      best.closest = cp;
    }
  }
  return best;
}

}  // namespace nphm
