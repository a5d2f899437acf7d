#include "nphm/surface_sample.hpp"

#include <algorithm>

namespace nphm {

namespace {

// Draws `n` samples from the faces listed in `faces`, area-weighted.
void sample_from_faces(const TriMesh& mesh, const std::vector<Index>& faces, Index n,
                       Rng& rng, Index out_offset, OrientedPointCloud& cloud,
                       Eigen::VectorXi* faces_out) {
  std::vector<double> cdf(faces.size());
  double acc = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    acc += mesh.face_area(faces[i]);
    cdf[i] = acc;
  }
  require(acc > 0, "sample_surface: region has zero area");

  for (Index s = 0; s < n; ++s) {
    const double u = rng.uniform() * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const Index f = faces[std::min<std::size_t>(it - cdf.begin(), faces.size() - 1)];

    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double wa = 1.0 - r1, wb = r1 * (1.0 - r2), wc = r1 * r2;
    const Vec3 a = mesh.vertices.row(mesh.faces(f, 0));
    const Vec3 b = mesh.vertices.row(mesh.faces(f, 1));
    const Vec3 c = mesh.vertices.row(mesh.faces(f, 2));
    cloud.points.row(out_offset + s) = (wa * a + wb * b + wc * c).transpose();
    cloud.normals.row(out_offset + s) = mesh.face_normal(f).transpose();
    if (faces_out) (*faces_out)(out_offset + s) = static_cast<int>(f);
  }
}

}  // namespace

OrientedPointCloud sample_surface(const TriMesh& mesh, Index n,
                                  const std::optional<RegionWeights>& weights, Rng& rng,
                                  Eigen::VectorXi* labels_out, Eigen::VectorXi* faces_out) {
  require(!mesh.empty(), "sample_surface: empty mesh");
  OrientedPointCloud cloud;
  cloud.points.resize(n, 3);
  cloud.normals.resize(n, 3);
  if (labels_out) labels_out->resize(n);
  if (faces_out) faces_out->resize(n);

  if (!weights.has_value()) {
    std::vector<Index> all(mesh.face_count());
    for (Index f = 0; f < mesh.face_count(); ++f) all[f] = f;
    sample_from_faces(mesh, all, n, rng, 0, cloud, faces_out);
    if (labels_out) labels_out->setConstant(kLabelFront);
    return cloud;
  }

  require(mesh.has_labels(), "sample_surface: region weights require a labeled mesh");
  std::vector<Index> front, back;
  for (Index f = 0; f < mesh.face_count(); ++f)
    (mesh.face_label(f) == kLabelFront ? front : back).push_back(f);

  // Deterministic allocation: front gets round(n * w_front).
  const double wsum = weights->front + weights->back;
  require(wsum > 0, "sample_surface: weights must not both be zero");
  Index n_front = static_cast<Index>(std::llround(n * weights->front / wsum));
  n_front = std::clamp<Index>(n_front, 0, n);
  const Index n_back = n - n_front;
  require(n_front == 0 || !front.empty(), "sample_surface: empty front region");
  require(n_back == 0 || !back.empty(), "sample_surface: empty back region");

  if (n_front > 0) sample_from_faces(mesh, front, n_front, rng, 0, cloud, faces_out);
  if (n_back > 0) sample_from_faces(mesh, back, n_back, rng, n_front, cloud, faces_out);
  if (labels_out) {
    labels_out->head(n_front).setConstant(kLabelFront);
    labels_out->tail(n_back).setConstant(kLabelBack);
  }
  return cloud;
}

}  // namespace nphm
