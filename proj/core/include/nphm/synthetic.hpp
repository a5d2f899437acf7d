#pragma once

#include <string>
#include <vector>

#include "nphm/anchor_layout.hpp"
#include "nphm/marching_cubes.hpp"
#include "nphm/rng.hpp"
#include "nphm/tri_mesh.hpp"

namespace nphm {

/// Unit-sphere triangulation by icosahedron subdivision. The vertex set is
/// closed under mirroring across x=0.
TriMesh icosphere(int subdivisions);

/// Feature sites of the head family, as unit directions (+z is the face
/// direction, +y up, x the left-right symmetry axis).
/// Order: nose, chin, forehead, eyeL, eyeR, mouthL, mouthR, cheekL, cheekR.
inline constexpr int kNumSites = 9;
MatX3 feature_site_directions();

/// 68 landmark directions laid out like a standard face annotation
/// (jawline, brows, nose, eyes, mouth). Mirror-consistent.
MatX3 landmark_directions();

/// Indices into the 68 landmarks used for tracking supervision:
/// eye outer/inner corners, mouth corners, lip top/bottom.
std::vector<int> tracking_landmark_indices();

struct SyntheticFamilyConfig {
  int template_subdivisions = 4;
  double radius_x = 0.45, radius_y = 0.52, radius_z = 0.48;
  double radius_spread = 0.035;
  double exponent_lo = 2.0, exponent_hi = 2.4;
  double bump_amplitude = 0.035;
  double bump_width = 0.35;       // in the (1 - cos angle) kernel metric
  double front_threshold = 0.05;  // direction z above this is labeled front
};

/// One procedurally generated head: a star-shaped (radial) signed field
/// whose radius is a superellipsoid profile plus feature bumps at the
/// anchor sites. Near the surface the field is a valid distance up to the
/// tangential slope of the radius function.
class SyntheticSubject {
 public:
  SyntheticSubject(std::uint64_t seed, double asymmetry, const SyntheticFamilyConfig& cfg = {});

  std::uint64_t seed() const { return seed_; }

  double sdf(const Vec3& x) const;
  VecX sdf(const MatX3& X) const;

  /// Surface radius along a unit direction.
  double radius(const Vec3& dir) const;

  /// Correspondence mesh: icosphere directions pushed to the surface,
  /// labeled front/back. Shared topology across all subjects.
  const TriMesh& neutral_mesh() const { return neutral_; }

  /// Marching-cubes extraction of the analytic field (scan-like mesh).
  TriMesh extract_neutral(int resolution) const;

  /// Ground-truth anchor positions at the feature sites (kNumSites x 3).
  const MatX3& anchor_sites() const { return anchors_; }
  /// 68 landmark surface positions.
  const MatX3& landmarks() const { return landmarks_; }

  const SyntheticFamilyConfig& family() const { return cfg_; }

 private:
  std::uint64_t seed_;
  SyntheticFamilyConfig cfg_;
  Vec3 radii_;
  double exponent_ = 2.0;
  VecX bump_amp_;    // kNumSites
  MatX3 site_dirs_;  // kNumSites x 3
  TriMesh neutral_;
  MatX3 anchors_;
  MatX3 landmarks_;
};

/// Analytic expression deformation: compactly supported radial basis
/// displacements around mouth/eye/cheek sites plus a hinge rotation about
/// the jaw pivot. The RBF part is linear in the magnitude; the hinge angle
/// scales with it. Zero magnitude is the identity map.
class SyntheticExpression {
 public:
  explicit SyntheticExpression(std::uint64_t seed);

  /// Interpolates two expressions (RBF coefficients and hinge angle).
  static SyntheticExpression blend(const SyntheticExpression& a, const SyntheticExpression& b,
                                   double t);

  Vec3 displacement(const Vec3& x, double magnitude) const;
  MatX3 displacement(const MatX3& X, double magnitude) const;

  /// Hinge weight in [0,1]; exactly 1 on the jaw core.
  double hinge_weight(const Vec3& x) const;
  double hinge_angle() const { return hinge_angle_; }
  void disable_hinge() { hinge_angle_ = 0.0; }
  void disable_rbf() { dirs_.setZero(); }

  Vec3 hinge_pivot() const { return pivot_; }
  Vec3 hinge_axis() const { return axis_; }

 private:
  SyntheticExpression() = default;
  MatX3 sites_;  // S x 3 absolute positions
  MatX3 dirs_;   // S x 3 displacement vectors
  VecX radii_;   // support radii
  double hinge_angle_ = 0.0;
  Vec3 pivot_ = Vec3(0.0, -0.18, 0.05);
  Vec3 axis_ = Vec3(1.0, 0.0, 0.0);
};

/// Posed mesh in vertex correspondence plus the exact per-vertex offsets.
struct PosedMesh {
  TriMesh mesh;
  MatX3 delta;
};
PosedMesh apply_expression(const SyntheticSubject& subject, const SyntheticExpression& expr,
                           double magnitude);

/// Orthographic single-view "depth" observation: rays along -view_dir over
/// a regular grid, first hits kept, subsampled to n, isotropic Gaussian
/// noise of scale sigma added to the kept points.
OrientedPointCloud render_depth_cloud(const TriMesh& mesh, const Vec3& view_dir, Index n,
                                      double sigma, Rng& rng);

/// Anchor layouts over the feature sites for desk-scale models.
/// K in {1, 5, 9}; `site_map` (size K) receives the feature-site index of
/// each region k=1..K.
AnchorLayout make_desk_anchor_layout(int K, std::vector<int>* site_map = nullptr);

/// Ground-truth anchors for a layout, pulled from a subject's sites.
MatX3 layout_anchors(const AnchorLayout& layout, const std::vector<int>& site_map,
                     const MatX3& subject_sites);

}  // namespace nphm
