#pragma once

#include <optional>

#include "nphm/rng.hpp"
#include "nphm/tri_mesh.hpp"

namespace nphm {

/// Mass split between the front (face) and back region.
struct RegionWeights {
  double front = 0.8;
  double back = 0.2;
};

/// Area-weighted surface sampling. When `weights` is set, the mesh must be
/// labeled, the sample budget is split deterministically between the two
/// regions, and sampling is area-weighted within each region. Normals come
/// from the triangle planes. `labels_out`, when non-null, receives the
/// region label of each sample.
OrientedPointCloud sample_surface(const TriMesh& mesh, Index n,
                                  const std::optional<RegionWeights>& weights, Rng& rng,
                                  Eigen::VectorXi* labels_out = nullptr,
                                  Eigen::VectorXi* faces_out = nullptr);

}  // namespace nphm
