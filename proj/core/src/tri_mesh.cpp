#include "nphm/tri_mesh.hpp"

namespace nphm {

Vec3 TriMesh::face_normal(Index f) const {
  const Vec3 a = vertices.row(faces(f, 0));
  const Vec3 b = vertices.row(faces(f, 1));
  const Vec3 c = vertices.row(faces(f, 2));
  Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3(0, 0, 1);
}

double TriMesh::face_area(Index f) const {
  const Vec3 a = vertices.row(faces(f, 0));
  const Vec3 b = vertices.row(faces(f, 1));
  const Vec3 c = vertices.row(faces(f, 2));
  return 0.5 * (b - a).cross(c - a).norm();
}

double TriMesh::total_area() const {
  double s = 0;
  for (Index f = 0; f < face_count(); ++f) s += face_area(f);
  return s;
}

Vec3 TriMesh::face_centroid(Index f) const {
  return (Vec3(vertices.row(faces(f, 0))) + Vec3(vertices.row(faces(f, 1))) +
          Vec3(vertices.row(faces(f, 2)))) /
         3.0;
}

int TriMesh::face_label(Index f) const {
  if (!has_labels()) return kLabelBack;
  const int a = labels(faces(f, 0));
  const int b = labels(faces(f, 1));
  const int c = labels(faces(f, 2));
  if (b == c) return b;
  return a;
}

MatX3 TriMesh::vertex_normals() const {
  MatX3 acc = MatX3::Zero(vertex_count(), 3);
  for (Index f = 0; f < face_count(); ++f) {
    const Vec3 a = vertices.row(faces(f, 0));
    const Vec3 b = vertices.row(faces(f, 1));
    const Vec3 c = vertices.row(faces(f, 2));
    const Vec3 n = (b - a).cross(c - a);  // area-weighted
    for (int k = 0; k < 3; ++k) acc.row(faces(f, k)) += n.transpose();
  }
  for (Index v = 0; v < acc.rows(); ++v) {
    const double len = acc.row(v).norm();
    if (len > 0) acc.row(v) /= len;
  }
  return acc;
}

Eigen::AlignedBox3d TriMesh::bounding_box() const {
  Eigen::AlignedBox3d box;
  for (Index v = 0; v < vertex_count(); ++v) box.extend(Vec3(vertices.row(v)));
  return box;
}

void TriMesh::validate() const {
  const Index n = vertex_count();
  for (Index f = 0; f < face_count(); ++f) {
    for (int k = 0; k < 3; ++k)
      require(faces(f, k) >= 0 && faces(f, k) < n, "TriMesh: face index out of range");
    require(faces(f, 0) != faces(f, 1) && faces(f, 1) != faces(f, 2) &&
                faces(f, 0) != faces(f, 2),
            "TriMesh: degenerate face with repeated indices");
  }
  if (labels.size() > 0)
    require(labels.size() == n, "TriMesh: label count must match vertex count");
}

void OrientedPointCloud::validate() const {
  require(points.rows() == normals.rows(), "OrientedPointCloud: size mismatch");
  for (Index i = 0; i < normals.rows(); ++i)
    require(std::abs(normals.row(i).norm() - 1.0) < 1e-6,
            "OrientedPointCloud: normals must be unit length");
}

}  // namespace nphm
