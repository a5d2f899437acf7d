#include "nphm/anchor_layout.hpp"

#include <cmath>

namespace nphm {

int AnchorLayout::net_of(int k) const {
  require(k >= 1 && k <= k_total, "AnchorLayout: region index out of range");
  for (std::size_t i = 0; i < middle.size(); ++i)
    if (middle[i] == k) return static_cast<int>(i);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].first == k || pairs[i].second == k)
      return static_cast<int>(middle.size() + i);
  throw DimensionError("AnchorLayout: region not in any index set");
}

bool AnchorLayout::mirrored(int k) const {
  for (const auto& [l, r] : pairs)
    if (r == k) return true;
  return false;
}

int AnchorLayout::mirror_partner(int k) const {
  for (const auto& [l, r] : pairs) {
    if (l == k) return r;
    if (r == k) return l;
  }
  return k;
}

bool AnchorLayout::is_middle(int k) const {
  for (int m : middle)
    if (m == k) return true;
  return false;
}

void AnchorLayout::validate() const {
  require(k_total == 2 * k_symm() + static_cast<int>(middle.size()),
          "AnchorLayout: K != 2*K_symm + |M|");
  require(reference.rows() == k_total, "AnchorLayout: reference anchor count mismatch");
  require(symmetry_axis >= 0 && symmetry_axis < 3, "AnchorLayout: bad symmetry axis");

  std::vector<bool> seen(k_total + 1, false);
  auto mark = [&](int k) {
    require(k >= 1 && k <= k_total, "AnchorLayout: region index out of range");
    require(!seen[k], "AnchorLayout: region listed twice");
    seen[k] = true;
  };
  for (int k : middle) {
    mark(k);
    require(std::abs(reference(k - 1, symmetry_axis)) < 1e-9,
            "AnchorLayout: on-axis reference anchor off the symmetry plane");
  }
  for (const auto& [l, r] : pairs) {
    mark(l);
    mark(r);
    const Vec3 left = reference.row(l - 1);
    const Vec3 right = reference.row(r - 1);
    require((flip_point(left, symmetry_axis) - right).norm() < 1e-9,
            "AnchorLayout: pair references are not exact mirror images");
  }
  for (int k = 1; k <= k_total; ++k)
    require(seen[k], "AnchorLayout: region missing from index sets");
}

AnchorLayout make_full_anchor_layout() {
  AnchorLayout layout;
  layout.k_total = 39;
  layout.symmetry_axis = 0;
  layout.reference.resize(39, 3);

  // 7 on-axis anchors along the profile (chin to back of head), in a
  // head-like arrangement inside [-1,1]^3.
  const double mid[7][2] = {{-0.52, 0.28}, {-0.30, 0.42}, {-0.05, 0.48}, {0.22, 0.44},
                            {0.45, 0.30},  {0.55, 0.00},  {0.40, -0.38}};
  int k = 1;
  for (const auto& m : mid) {
    layout.middle.push_back(k);
    layout.reference.row(k - 1) << 0.0, m[0], m[1];
    ++k;
  }
  // 16 mirror pairs distributed over cheeks, eyes, brows, jaw and scalp.
  const double side[16][3] = {
      {0.12, -0.45, 0.30}, {0.25, -0.30, 0.32}, {0.10, -0.22, 0.44}, {0.28, -0.05, 0.36},
      {0.12, 0.02, 0.46},  {0.30, 0.12, 0.28},  {0.14, 0.20, 0.42},  {0.33, 0.28, 0.16},
      {0.18, 0.38, 0.30},  {0.38, 0.05, 0.05},  {0.40, 0.22, -0.08}, {0.20, 0.45, 0.05},
      {0.35, 0.38, -0.20}, {0.16, 0.30, -0.40}, {0.38, -0.10, -0.25}, {0.22, -0.35, -0.12}};
  for (const auto& s : side) {
    const int left = k++;
    const int right = k++;
    layout.pairs.emplace_back(left, right);
    layout.reference.row(left - 1) << s[0], s[1], s[2];
    layout.reference.row(right - 1) << -s[0], s[1], s[2];
  }
  layout.validate();
  return layout;
}

}  // namespace nphm
