#include "nphm/synthetic.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <map>

namespace nphm {

// ---------------------------------------------------------------------------
// Icosphere

TriMesh icosphere(int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<Eigen::Vector3i> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f(0), f(1)), bc = mid(f(1), f(2)), ca = mid(f(2), f(0));
      next.push_back({f(0), ab, ca});
      next.push_back({f(1), bc, ab});
      next.push_back({f(2), ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriMesh mesh;
  mesh.vertices.resize(verts.size(), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i].transpose();
  mesh.faces.resize(faces.size(), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) mesh.faces.row(i) = faces[i].transpose();
  return mesh;
}

// ---------------------------------------------------------------------------
// Family geometry

MatX3 feature_site_directions() {
  MatX3 d(kNumSites, 3);
  d.row(0) << 0.00, -0.05, 1.00;  // nose
  d.row(1) << 0.00, -0.62, 0.72;  // chin
  d.row(2) << 0.00, 0.55, 0.82;   // forehead
  d.row(3) << 0.33, 0.26, 0.90;   // eyeL
  d.row(4) << -0.33, 0.26, 0.90;  // eyeR
  d.row(5) << 0.30, -0.36, 0.88;  // mouthL
  d.row(6) << -0.30, -0.36, 0.88; // mouthR
  d.row(7) << 0.62, -0.08, 0.72;  // cheekL
  d.row(8) << -0.62, -0.08, 0.72; // cheekR
  for (Index i = 0; i < d.rows(); ++i) d.row(i).normalize();
  return d;
}

MatX3 landmark_directions() {
  std::vector<Vec3> dirs;
  auto push = [&](double x, double y, double z) { dirs.emplace_back(Vec3(x, y, z).normalized()); };

  // 0-16 jawline: arc from left ear to right ear through the chin.
  for (int i = 0; i < 17; ++i) {
    const double t = i / 16.0;                  // 0 = left, 1 = right
    const double sweep = M_PI * (1.0 - t);      // around the lower face
    push(0.75 * std::cos(sweep), -0.35 - 0.35 * std::sin(sweep) * 0.8,
         0.35 + 0.45 * std::sin(sweep));
  }
  // 17-26 brows (5 left, 5 right).
  for (int side = 0; side < 2; ++side) {
    const double sx = side == 0 ? 1.0 : -1.0;
    for (int i = 0; i < 5; ++i) push(sx * (0.12 + 0.08 * i), 0.38, 0.88);
  }
  // 27-35 nose: bridge (4) + base (5).
  for (int i = 0; i < 4; ++i) push(0.0, 0.22 - 0.11 * i, 1.0);
  for (int i = 0; i < 5; ++i) push(-0.12 + 0.06 * i, -0.16, 0.95);
  // 36-47 eyes (6 left, 6 right); 36/39 are the left outer/inner corners.
  for (int side = 0; side < 2; ++side) {
    const double sx = side == 0 ? 1.0 : -1.0;
    push(sx * 0.45, 0.25, 0.82);  // outer corner
    push(sx * 0.36, 0.29, 0.87);
    push(sx * 0.28, 0.29, 0.90);
    push(sx * 0.20, 0.25, 0.93);  // inner corner
    push(sx * 0.28, 0.21, 0.90);
    push(sx * 0.36, 0.21, 0.87);
  }
  // 48-67 mouth: outer ring (12) + inner ring (8).
  for (int i = 0; i < 12; ++i) {
    const double ang = 2.0 * M_PI * i / 12.0;
    push(0.26 * std::cos(ang), -0.36 + 0.10 * std::sin(ang), 0.92);
  }
  for (int i = 0; i < 8; ++i) {
    const double ang = 2.0 * M_PI * i / 8.0;
    push(0.15 * std::cos(ang), -0.36 + 0.05 * std::sin(ang), 0.95);
  }

  MatX3 out(dirs.size(), 3);
  for (std::size_t i = 0; i < dirs.size(); ++i) out.row(i) = dirs[i].transpose();
  require(out.rows() == 68, "landmark_directions: must produce 68 landmarks");
  return out;
}

std::vector<int> tracking_landmark_indices() {
  // Eye outer corners, eye inner corners, mouth corners, lip top/bottom.
  return {36, 42, 39, 45, 48, 54, 51, 57};
}

namespace {

double superellipsoid_radius(const Vec3& dir, const Vec3& radii, double p) {
  const double s = std::pow(std::abs(dir(0)) / radii(0), p) +
                   std::pow(std::abs(dir(1)) / radii(1), p) +
                   std::pow(std::abs(dir(2)) / radii(2), p);
  return std::pow(s, -1.0 / p);
}

}  // namespace

SyntheticSubject::SyntheticSubject(std::uint64_t seed, double asymmetry,
                                   const SyntheticFamilyConfig& cfg)
    : seed_(seed), cfg_(cfg) {
  Rng rng(seed, "subject/shape");
  radii_ = Vec3(cfg.radius_x + rng.uniform(-cfg.radius_spread, cfg.radius_spread),
                cfg.radius_y + rng.uniform(-cfg.radius_spread, cfg.radius_spread),
                cfg.radius_z + rng.uniform(-cfg.radius_spread, cfg.radius_spread));
  exponent_ = rng.uniform(cfg.exponent_lo, cfg.exponent_hi);

  site_dirs_ = feature_site_directions();
  bump_amp_.resize(kNumSites);
  // Middle sites 0..2 are free; mirror pairs (3,4), (5,6), (7,8) share an
  // amplitude with controllable asymmetry noise.
  Rng arng(seed, "subject/amplitudes");
  for (int i = 0; i < 3; ++i) bump_amp_(i) = arng.uniform(-cfg.bump_amplitude, cfg.bump_amplitude);
  for (int pair = 0; pair < 3; ++pair) {
    const double a = arng.uniform(-cfg.bump_amplitude, cfg.bump_amplitude);
    const double noise = asymmetry * arng.normal();
    bump_amp_(3 + 2 * pair) = a;
    bump_amp_(3 + 2 * pair + 1) = a + noise;
  }

  // Correspondence mesh from the shared icosphere.
  TriMesh sphere = icosphere(cfg.template_subdivisions);
  neutral_.faces = sphere.faces;
  neutral_.vertices.resize(sphere.vertex_count(), 3);
  neutral_.labels.resize(sphere.vertex_count());
  for (Index v = 0; v < sphere.vertex_count(); ++v) {
    const Vec3 dir = sphere.vertices.row(v);
    neutral_.vertices.row(v) = (radius(dir) * dir).transpose();
    neutral_.labels(v) = dir(2) > cfg.front_threshold ? kLabelFront : kLabelBack;
  }

  anchors_.resize(kNumSites, 3);
  for (int i = 0; i < kNumSites; ++i) {
    const Vec3 dir = site_dirs_.row(i);
    anchors_.row(i) = (radius(dir) * dir).transpose();
  }
  const MatX3 lm_dirs = landmark_directions();
  landmarks_.resize(lm_dirs.rows(), 3);
  for (Index i = 0; i < lm_dirs.rows(); ++i) {
    const Vec3 dir = lm_dirs.row(i);
    landmarks_.row(i) = (radius(dir) * dir).transpose();
  }
}

double SyntheticSubject::radius(const Vec3& dir) const {
  double rho = superellipsoid_radius(dir, radii_, exponent_);
  const double inv_w2 = 1.0 / (cfg_.bump_width * cfg_.bump_width);
  for (int i = 0; i < kNumSites; ++i) {
    const double c = dir.dot(site_dirs_.row(i));
    rho += bump_amp_(i) * std::exp(-(1.0 - c) * inv_w2);
  }
  return rho;
}

double SyntheticSubject::sdf(const Vec3& x) const {
  const double r = x.norm();
  if (r < 1e-9) return -superellipsoid_radius(Vec3(0, 0, 1), radii_, exponent_);
  return r - radius(x / r);
}

VecX SyntheticSubject::sdf(const MatX3& X) const {
  VecX out(X.rows());
  for (Index i = 0; i < X.rows(); ++i) out(i) = sdf(Vec3(X.row(i)));
  return out;
}

TriMesh SyntheticSubject::extract_neutral(int resolution) const {
  Eigen::AlignedBox3d box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  auto res = extract_mesh([this](const MatX3& X) { return sdf(X); }, box, resolution);
  require(res.found_surface, "extract_neutral: no surface found");
  return std::move(res.mesh);
}

// ---------------------------------------------------------------------------
// Expressions

namespace {
// Wendland C2 kernel, compact on [0,1).
inline double wendland(double t) {
  if (t >= 1.0) return 0.0;
  const double s = 1.0 - t;
  return s * s * s * s * (4.0 * t + 1.0);
}

inline double smoothstep01(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}
}  // namespace

SyntheticExpression::SyntheticExpression(std::uint64_t seed) {
  Rng rng(seed, "expression");
  // Sites around the mouth, eyes, cheeks and brows of the mean face.
  const double face_r = 0.5;
  const MatX3 dirs = feature_site_directions();
  std::vector<int> active = {0, 3, 4, 5, 6, 7, 8};  // nose, eyes, mouth, cheeks
  sites_.resize(active.size() + 1, 3);
  for (std::size_t i = 0; i < active.size(); ++i)
    sites_.row(i) = face_r * dirs.row(active[i]);
  sites_.row(active.size()) << 0.0, -0.30, 0.42;  // lower lip

  dirs_.resize(sites_.rows(), 3);
  radii_.resize(sites_.rows());
  for (Index i = 0; i < sites_.rows(); ++i) {
    const double amp = rng.uniform(0.01, 0.05);
    Vec3 u = rng.normal3();
    u.normalize();
    dirs_.row(i) = (amp * u).transpose();
    radii_(i) = rng.uniform(0.20, 0.34);
  }
  hinge_angle_ = rng.uniform(0.05, 0.22);
}

SyntheticExpression SyntheticExpression::blend(const SyntheticExpression& a,
                                               const SyntheticExpression& b, double t) {
  require(a.sites_.rows() == b.sites_.rows(), "SyntheticExpression::blend: site mismatch");
  SyntheticExpression out;
  out.sites_ = a.sites_;
  out.dirs_ = (1.0 - t) * a.dirs_ + t * b.dirs_;
  out.radii_ = (1.0 - t) * a.radii_ + t * b.radii_;
  out.hinge_angle_ = (1.0 - t) * a.hinge_angle_ + t * b.hinge_angle_;
  out.pivot_ = a.pivot_;
  out.axis_ = a.axis_;
  return out;
}

double SyntheticExpression::hinge_weight(const Vec3& x) const {
  const double below = smoothstep01((-x(1) - 0.24) / 0.10);
  const double front = smoothstep01((x(2) - 0.08) / 0.14);
  return below * front;
}

Vec3 SyntheticExpression::displacement(const Vec3& x, double magnitude) const {
  Vec3 d = Vec3::Zero();
  for (Index i = 0; i < sites_.rows(); ++i) {
    const double t = (x - Vec3(sites_.row(i))).norm() / radii_(i);
    d += wendland(t) * Vec3(dirs_.row(i));
  }
  d *= magnitude;

  const double theta = magnitude * hinge_angle_;
  if (theta != 0.0) {
    const double w = hinge_weight(x);
    if (w > 0.0) {
      const Eigen::AngleAxisd rot(theta, axis_.normalized());
      const Vec3 rotated = pivot_ + rot * (x - pivot_);
      d += w * (rotated - x);
    }
  }
  return d;
}

MatX3 SyntheticExpression::displacement(const MatX3& X, double magnitude) const {
  MatX3 out(X.rows(), 3);
  for (Index i = 0; i < X.rows(); ++i)
    out.row(i) = displacement(Vec3(X.row(i)), magnitude).transpose();
  return out;
}

PosedMesh apply_expression(const SyntheticSubject& subject, const SyntheticExpression& expr,
                           double magnitude) {
  PosedMesh out;
  out.delta = expr.displacement(subject.neutral_mesh().vertices, magnitude);
  out.mesh = subject.neutral_mesh();
  out.mesh.vertices += out.delta;
  return out;
}

// ---------------------------------------------------------------------------
// Depth rendering

namespace {
struct RayHit {
  bool hit = false;
  double t = 0.0;
  Index face = -1;
};

RayHit ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                    const Vec3& c) {
  RayHit out;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return out;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return out;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return out;
  const double t = e2.dot(q) * inv;
  if (t <= 0.0) return out;
  out.hit = true;
  out.t = t;
  return out;
}
}  // namespace

OrientedPointCloud render_depth_cloud(const TriMesh& mesh, const Vec3& view_dir, Index n,
                                      double sigma, Rng& rng) {
  require(!mesh.empty(), "render_depth_cloud: empty mesh");
  require(n > 0, "render_depth_cloud: need a positive sample count");

  // Orthonormal camera frame: rays travel along -view_dir.
  const Vec3 w = view_dir.normalized();
  Vec3 up = std::abs(w(1)) < 0.9 ? Vec3(0, 1, 0) : Vec3(1, 0, 0);
  const Vec3 u = up.cross(w).normalized();
  const Vec3 v = w.cross(u);

  // Project vertices to the (u, v) image plane.
  double ulo = 1e30, uhi = -1e30, vlo = 1e30, vhi = -1e30, whi = -1e30;
  for (Index i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3 p = mesh.vertices.row(i);
    ulo = std::min(ulo, p.dot(u));
    uhi = std::max(uhi, p.dot(u));
    vlo = std::min(vlo, p.dot(v));
    vhi = std::max(vhi, p.dot(v));
    whi = std::max(whi, p.dot(w));
  }
  const double pad = 1e-4;
  ulo -= pad, uhi += pad, vlo -= pad, vhi += pad;

  // 2D triangle bins over the image plane.
  const int grid = 96;
  const double du = (uhi - ulo) / grid, dv = (vhi - vlo) / grid;
  std::vector<std::vector<int>> bins(grid * grid);
  for (Index f = 0; f < mesh.face_count(); ++f) {
    double fu0 = 1e30, fu1 = -1e30, fv0 = 1e30, fv1 = -1e30;
    for (int k = 0; k < 3; ++k) {
      const Vec3 p = mesh.vertices.row(mesh.faces(f, k));
      fu0 = std::min(fu0, p.dot(u));
      fu1 = std::max(fu1, p.dot(u));
      fv0 = std::min(fv0, p.dot(v));
      fv1 = std::max(fv1, p.dot(v));
    }
    const int i0 = std::clamp(static_cast<int>((fu0 - ulo) / du), 0, grid - 1);
    const int i1 = std::clamp(static_cast<int>((fu1 - ulo) / du), 0, grid - 1);
    const int j0 = std::clamp(static_cast<int>((fv0 - vlo) / dv), 0, grid - 1);
    const int j1 = std::clamp(static_cast<int>((fv1 - vlo) / dv), 0, grid - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins[j * grid + i].push_back(static_cast<int>(f));
  }

  // Slightly oversampled ray grid, then exact subsampling to n.
  const int rays = static_cast<int>(std::ceil(std::sqrt(2.5 * static_cast<double>(n))));
  std::vector<Vec3> pts, nrm;
  for (int j = 0; j < rays; ++j) {
    for (int i = 0; i < rays; ++i) {
      const double uu = ulo + (uhi - ulo) * (i + 0.5) / rays;
      const double vv = vlo + (vhi - vlo) * (j + 0.5) / rays;
      const Vec3 origin = uu * u + vv * v + (whi + 0.5) * w;
      const int bi = std::clamp(static_cast<int>((uu - ulo) / du), 0, grid - 1);
      const int bj = std::clamp(static_cast<int>((vv - vlo) / dv), 0, grid - 1);
      double best_t = 1e30;
      Index best_f = -1;
      for (int f : bins[bj * grid + bi]) {
        const auto hit = ray_triangle(origin, -w, mesh.vertices.row(mesh.faces(f, 0)),
                                      mesh.vertices.row(mesh.faces(f, 1)),
                                      mesh.vertices.row(mesh.faces(f, 2)));
        if (hit.hit && hit.t < best_t) {
          best_t = hit.t;
          best_f = f;
        }
      }
      if (best_f >= 0) {
        pts.push_back(origin - best_t * w);
        nrm.push_back(mesh.face_normal(best_f));
      }
    }
  }
  require(!pts.empty(), "render_depth_cloud: no ray hits");

  // Fisher-Yates prefix using the counter RNG, then take the first n.
  const Index m = static_cast<Index>(pts.size());
  std::vector<Index> order(m);
  for (Index i = 0; i < m; ++i) order[i] = i;
  const Index take = std::min(n, m);
  for (Index i = 0; i < take; ++i) {
    const Index j = i + rng.uniform_int(m - i);
    std::swap(order[i], order[j]);
  }

  OrientedPointCloud cloud;
  cloud.points.resize(take, 3);
  cloud.normals.resize(take, 3);
  for (Index i = 0; i < take; ++i) {
    Vec3 p = pts[order[i]];
    if (sigma > 0.0) p += sigma * rng.normal3();
    cloud.points.row(i) = p.transpose();
    cloud.normals.row(i) = nrm[order[i]].transpose();
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Desk anchor layouts

AnchorLayout make_desk_anchor_layout(int K, std::vector<int>* site_map) {
  require(K == 1 || K == 5 || K == 9, "make_desk_anchor_layout: K must be 1, 5 or 9");
  // Reference anchors come from the symmetric mean subject (asymmetry 0,
  // mean amplitudes): the plain superellipsoid with mean radii.
  const SyntheticFamilyConfig cfg;
  const Vec3 mean_radii(cfg.radius_x, cfg.radius_y, cfg.radius_z);
  const MatX3 dirs = feature_site_directions();
  auto surface = [&](int site) {
    const Vec3 d = dirs.row(site);
    return Vec3(superellipsoid_radius(d, mean_radii, 0.5 * (cfg.exponent_lo + cfg.exponent_hi)) *
                d);
  };

  AnchorLayout layout;
  layout.symmetry_axis = 0;
  std::vector<int> sites;
  if (K == 1) {
    layout.k_total = 1;
    layout.middle = {1};
    sites = {0};
  } else if (K == 5) {
    layout.k_total = 5;
    layout.middle = {1};
    layout.pairs = {{2, 3}, {4, 5}};
    sites = {0, 3, 4, 5, 6};
  } else {
    layout.k_total = 9;
    layout.middle = {1, 2, 3};
    layout.pairs = {{4, 5}, {6, 7}, {8, 9}};
    sites = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  }
  layout.reference.resize(K, 3);
  for (int k = 0; k < K; ++k) layout.reference.row(k) = surface(sites[k]).transpose();
  // Enforce exact symmetry of the reference (mirror the right side from
  // the left so the validation identity holds bit-exactly).
  for (const auto& [l, r] : layout.pairs)
    layout.reference.row(r - 1) =
        flip_point(layout.reference.row(l - 1), layout.symmetry_axis).transpose();
  for (int m : layout.middle) layout.reference(m - 1, layout.symmetry_axis) = 0.0;
  layout.validate();
  if (site_map) *site_map = sites;
  return layout;
}

MatX3 layout_anchors(const AnchorLayout& layout, const std::vector<int>& site_map,
                     const MatX3& subject_sites) {
  require(static_cast<int>(site_map.size()) == layout.k_total,
          "layout_anchors: site map size mismatch");
  MatX3 anchors(layout.k_total, 3);
  for (int k = 0; k < layout.k_total; ++k) anchors.row(k) = subject_sites.row(site_map[k]);
  return anchors;
}

}  // namespace nphm
