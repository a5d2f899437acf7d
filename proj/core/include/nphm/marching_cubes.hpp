#pragma once

#include <functional>

#include "nphm/tri_mesh.hpp"

namespace nphm {

using BatchSdf = std::function<VecX(const MatX3&)>;

struct ExtractResult {
  TriMesh mesh;
  bool found_surface = false;
};

/// Zero-level-set triangulation on a regular grid with `resolution` cells
/// per axis. Each cell is decomposed into six tetrahedra sharing the main
/// diagonal, so the output is watertight for sign-clean fields; vertices
/// are linearly interpolated along lattice edges and welded.
ExtractResult extract_mesh(const BatchSdf& sdf, const Eigen::AlignedBox3d& box,
                           int resolution);

ExtractResult extract_mesh(const std::function<double(const Vec3&)>& sdf,
                           const Eigen::AlignedBox3d& box, int resolution);

/// True when every edge is shared by exactly two faces.
bool edge_manifold(const TriMesh& mesh);

}  // namespace nphm
