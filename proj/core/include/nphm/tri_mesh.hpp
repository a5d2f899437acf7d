#pragma once

#include <Eigen/Geometry>

#include "nphm/common.hpp"

namespace nphm {

/// Per-vertex region labels used across the toolkit.
inline constexpr int kLabelBack = 0;
inline constexpr int kLabelFront = 1;

struct TriMesh {
  MatX3 vertices;           // N x 3
  MatX3i faces;             // M x 3, CCW seen from outside
  Eigen::VectorXi labels;   // optional per-vertex labels (empty or N)

  Index vertex_count() const { return vertices.rows(); }
  Index face_count() const { return faces.rows(); }
  bool empty() const { return vertices.rows() == 0 || faces.rows() == 0; }
  bool has_labels() const { return labels.size() == vertices.rows() && labels.size() > 0; }

  Vec3 face_normal(Index f) const;
  double face_area(Index f) const;
  double total_area() const;
  Vec3 face_centroid(Index f) const;

  /// Majority label of a face's vertices (>= 2 agreeing), else first vertex's.
  int face_label(Index f) const;

  /// Area-weighted vertex normals, normalized.
  MatX3 vertex_normals() const;

  Eigen::AlignedBox3d bounding_box() const;

  /// Checks index ranges and rejects degenerate faces with repeated indices.
  void validate() const;
};

struct OrientedPointCloud {
  MatX3 points;   // N x 3
  MatX3 normals;  // N x 3, unit

  Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }

  /// Normal norms must be within 1e-6 of 1.
  void validate() const;
};

}  // namespace nphm
