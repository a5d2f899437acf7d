#pragma once

#include <utility>
#include <vector>

#include "nphm/common.hpp"

namespace nphm {

/// Mirrors a point across the face symmetry plane (negates `axis`).
inline Vec3 flip_point(const Vec3& x, int axis = 0) {
  Vec3 y = x;
  y(axis) = -y(axis);
  return y;
}

/// Region layout of the identity ensemble: K anchors split into on-axis
/// regions M and mirror pairs (S, S*). Regions are indexed 1..K; region 0
/// is the global background field.
struct AnchorLayout {
  int k_total = 0;                          // K
  int symmetry_axis = 0;                    // coordinate negated by flip()
  std::vector<int> middle;                  // on-axis region indices
  std::vector<std::pair<int, int>> pairs;   // (k in S, k* in S*)
  MatX3 reference;                          // K x 3 reference anchors, row k-1

  int k_symm() const { return static_cast<int>(pairs.size()); }
  int distinct_nets() const { return static_cast<int>(middle.size()) + k_symm(); }

  /// Index of the shared network owning region k (1..K).
  int net_of(int k) const;
  /// True when region k evaluates through its mirror partner's network
  /// with flipped coordinates (k in S*).
  bool mirrored(int k) const;
  /// Mirror partner of region k (middle regions map to themselves).
  int mirror_partner(int k) const;
  /// True when region k lies on the symmetry axis.
  bool is_middle(int k) const;

  /// Checks the counting identity K = 2*K_symm + |M|, that on-axis
  /// reference anchors sit on the symmetry plane, and that pair references
  /// are exact mirror images.
  void validate() const;
};

/// Default full-scale layout: K=39 with 16 mirror pairs and 7 on-axis
/// anchors arranged over a head-shaped template.
AnchorLayout make_full_anchor_layout();

}  // namespace nphm
