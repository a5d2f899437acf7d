#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "nphm/tri_mesh.hpp"

namespace nphm {

struct MetricsReport {
  double l1_chamfer = 0.0;        // canonical length units
  double normal_consistency = 0.0;
  double f_score = 0.0;
  double tau = 0.0;

  std::string to_json() const;
};

struct MetricsOptions {
  Index samples = 100000;
  double tau = 1.5 * kCanonicalUnitsPerMm;
  /// Keep only samples within this distance of reference vertices carrying
  /// `eval_label` ("face region" restriction). Disabled when unset.
  std::optional<int> eval_label;
  double eval_region_radius = 10.0 * kCanonicalUnitsPerMm;  // 1 cm
  std::uint64_t seed = 0;
};

/// Samples both meshes, measures exact point-to-mesh distances in both
/// directions, and reports L1 chamfer, normal consistency (absolute cosine
/// at nearest faces) and F-score at tau.
MetricsReport evaluate_metrics(const TriMesh& reconstruction, const TriMesh& reference,
                               const MetricsOptions& opts = {});

}  // namespace nphm
