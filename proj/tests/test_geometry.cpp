#include <cstdio>

#include "doctest.h"
#include "nphm/marching_cubes.hpp"
#include "nphm/mesh_distance.hpp"
#include "nphm/mesh_io.hpp"
#include "nphm/metrics.hpp"
#include "nphm/nn_query.hpp"
#include "nphm/surface_sample.hpp"

using namespace nphm;

namespace {

TriMesh unit_right_triangle() {
  TriMesh m;
  m.vertices.resize(3, 3);
  m.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  m.faces.resize(1, 3);
  m.faces << 0, 1, 2;
  return m;
}

TriMesh square_plane(double z) {
  TriMesh m;
  m.vertices.resize(4, 3);
  m.vertices << 0, 0, z, 1, 0, z, 1, 1, z, 0, 1, z;
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 0, 2, 3;
  return m;
}

}  // namespace

TEST_CASE("surface sampling: centroid, normals, and region split") {
  const TriMesh tri = unit_right_triangle();
  Rng rng(5, "sample");
  const auto cloud = sample_surface(tri, 100000, std::nullopt, rng);

  const Vec3 centroid = cloud.points.colwise().mean().transpose();
  CHECK((centroid - Vec3(1.0 / 3, 1.0 / 3, 0)).norm() < 1e-2);
  for (Index i = 0; i < 50; ++i)
    CHECK((Vec3(cloud.normals.row(i)) - Vec3(0, 0, 1)).norm() == doctest::Approx(0.0));

  // Two-triangle labeled mesh: full front weight leaves no back samples.
  TriMesh two = square_plane(0.0);
  two.labels.resize(4);
  two.labels << kLabelFront, kLabelFront, kLabelBack, kLabelBack;
  // face 0 = (0,1,2): majority front? labels 1,1,0 -> front. face 1 = (0,2,3): 1,0,0 -> back.
  Eigen::VectorXi labels;
  Rng rng2(5, "sample2");
  const auto c2 = sample_surface(two, 10000, RegionWeights{1.0, 0.0}, rng2, &labels);
  CHECK((labels.array() == kLabelBack).count() == 0);

  Rng rng3(5, "sample3");
  Eigen::VectorXi labels3;
  sample_surface(two, 10000, RegionWeights{0.8, 0.2}, rng3, &labels3);
  CHECK((labels3.array() == kLabelFront).count() == 8000);
}

TEST_CASE("nn_query exactness against brute force") {
  Rng rng(17, "nn");
  for (int trial = 0; trial < 4; ++trial) {
    const Index n = 100 + rng.uniform_int(1900);
    const Index q = 200;
    MatX3 target(n, 3), queries(q, 3);
    for (Index i = 0; i < n; ++i)
      target.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
    for (Index i = 0; i < q; ++i)
      queries.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);

    const auto hits = nn_query(target, queries);
    for (Index i = 0; i < q; ++i) {
      Index best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j) {
        const double d = (target.row(j) - queries.row(i)).norm();
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      CHECK(hits[i].index == best);
      CHECK(hits[i].dist == doctest::Approx(bd));
    }
  }

  // A target point queries to itself at distance zero.
  MatX3 t(3, 3);
  t << 0, 0, 0, 1, 1, 1, 2, 0, 1;
  auto self = nn_query(t, t);
  for (int i = 0; i < 3; ++i) {
    CHECK(self[i].index == i);
    CHECK(self[i].dist == 0.0);
  }

  // Single-point target maps everything to index 0.
  MatX3 one(1, 3);
  one << 0.5, 0.5, 0.5;
  auto all0 = nn_query(one, t);
  for (const auto& h : all0) CHECK(h.index == 0);
}

TEST_CASE("extract_mesh on an analytic sphere") {
  const double r = 0.5;
  auto sphere = [r](const MatX3& pts) {
    return VecX(pts.rowwise().norm().array() - r);
  };
  Eigen::AlignedBox3d box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  const auto res = extract_mesh(sphere, box, 128);
  REQUIRE(res.found_surface);
  res.mesh.validate();

  const double cell = 2.0 / 128;
  for (Index v = 0; v < res.mesh.vertex_count(); ++v)
    CHECK(std::abs(res.mesh.vertices.row(v).norm() - r) < 2 * cell);

  CHECK(res.mesh.total_area() == doctest::Approx(4 * M_PI * r * r).epsilon(0.02));
  CHECK(edge_manifold(res.mesh));

  // Outward orientation: face normals point away from the origin
  // (zero-area slivers from grid points exactly on the surface excluded).
  for (Index f = 0; f < res.mesh.face_count(); f += 97) {
    if (res.mesh.face_area(f) < 1e-14) continue;
    CHECK(res.mesh.face_normal(f).dot(res.mesh.face_centroid(f)) > 0);
  }
}

TEST_CASE("extract_mesh without a sign change returns an empty flagged mesh") {
  auto pos = [](const MatX3& pts) { return VecX(VecX::Ones(pts.rows())); };
  Eigen::AlignedBox3d box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  const auto res = extract_mesh(pos, box, 8);
  CHECK_FALSE(res.found_surface);
  CHECK(res.mesh.empty());
}

TEST_CASE("metrics: identity case and parallel planes") {
  const double r = 0.5;
  auto sphere = [r](const MatX3& pts) { return VecX(pts.rowwise().norm().array() - r); };
  Eigen::AlignedBox3d box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  const TriMesh mesh = extract_mesh(sphere, box, 48).mesh;

  MetricsOptions opts;
  opts.samples = 20000;
  const auto self = evaluate_metrics(mesh, mesh, opts);
  CHECK(self.l1_chamfer < 1e-3);
  CHECK(self.normal_consistency > 0.99);
  CHECK(self.f_score == 1.0);

  const double d = 3e-3;
  const auto planes = evaluate_metrics(square_plane(0.0), square_plane(d), opts);
  CHECK(planes.l1_chamfer == doctest::Approx(d).epsilon(1e-9));
  CHECK(planes.f_score == 1.0);  // tau = 6e-3 > d

  MetricsOptions tight = opts;
  tight.tau = 1e-3;  // tau < d: nothing within threshold
  CHECK(evaluate_metrics(square_plane(0.0), square_plane(d), tight).f_score == 0.0);
}

TEST_CASE("metric symmetry within monte-carlo tolerance") {
  auto sphere1 = [](const MatX3& p) { return VecX(p.rowwise().norm().array() - 0.5); };
  auto sphere2 = [](const MatX3& p) { return VecX(p.rowwise().norm().array() - 0.52); };
  Eigen::AlignedBox3d box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  const TriMesh a = extract_mesh(sphere1, box, 32).mesh;
  const TriMesh b = extract_mesh(sphere2, box, 32).mesh;
  MetricsOptions opts;
  opts.samples = 20000;
  const auto ab = evaluate_metrics(a, b, opts);
  const auto ba = evaluate_metrics(b, a, opts);
  CHECK(ab.l1_chamfer == doctest::Approx(ba.l1_chamfer).epsilon(0.05));
}

TEST_CASE("mesh distance is exact on a known configuration") {
  const TriMesh tri = unit_right_triangle();
  MeshDistance md(tri);
  CHECK(md.closest_point(Vec3(0.25, 0.25, 1.0)).dist == doctest::Approx(1.0));
  CHECK(md.closest_point(Vec3(2.0, 0, 0)).dist == doctest::Approx(1.0));
  CHECK(md.closest_point(Vec3(0.2, 0.2, 0)).dist == doctest::Approx(0.0));
}

TEST_CASE("obj and ply round trips") {
  const TriMesh m = square_plane(0.25);

  write_obj("/tmp/nphm_io_test.obj", m);
  const TriMesh back = read_obj("/tmp/nphm_io_test.obj");
  CHECK((back.vertices - m.vertices).norm() < 1e-6);
  CHECK((back.faces - m.faces).norm() == 0);

  write_ply("/tmp/nphm_io_test.ply", m);
  const TriMesh pback = read_ply_mesh("/tmp/nphm_io_test.ply");
  CHECK((pback.vertices - m.vertices).norm() < 1e-6);
  CHECK((pback.faces - m.faces).norm() == 0);

  OrientedPointCloud cloud;
  cloud.points = MatX3::Random(10, 3);
  cloud.normals.resize(10, 3);
  for (int i = 0; i < 10; ++i) cloud.normals.row(i) << 0, 0, 1;
  write_ply("/tmp/nphm_io_cloud.ply", cloud);
  const auto cback = read_ply_cloud("/tmp/nphm_io_cloud.ply");
  CHECK((cback.points - cloud.points).norm() < 1e-5);
  cback.validate();

  std::remove("/tmp/nphm_io_test.obj");
  std::remove("/tmp/nphm_io_test.ply");
  std::remove("/tmp/nphm_io_cloud.ply");
}

TEST_CASE("empty mesh rejections") {
  TriMesh empty;
  Rng rng(1, "x");
  CHECK_THROWS(sample_surface(empty, 10, std::nullopt, rng));
  CHECK_THROWS(evaluate_metrics(empty, empty));
  MatX3 none(0, 3);
  CHECK_THROWS(nn_query(none, none));
}
