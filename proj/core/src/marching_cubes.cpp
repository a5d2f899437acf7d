#include "nphm/marching_cubes.hpp"

#include <array>
#include <unordered_map>

#include "nphm/parallel.hpp"

namespace nphm {

namespace {

// Corner offsets of the six Kuhn tetrahedra: walk from (0,0,0) to (1,1,1)
// one axis at a time, one tet per axis permutation.
constexpr int kAxisPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

struct VertexWelder {
  std::unordered_map<std::uint64_t, int> map;
  std::vector<Vec3> verts;
  std::uint64_t npoints;

  int vertex_on_edge(std::uint64_t ia, std::uint64_t ib, const Vec3& pa, const Vec3& pb,
                     double fa, double fb) {
    // Canonical (min-id first) order so shared edges interpolate
    // bit-identically no matter which tet asks first.
    const bool flip = ia > ib;
    const std::uint64_t key = flip ? ib * npoints + ia : ia * npoints + ib;
    auto it = map.find(key);
    if (it != map.end()) return it->second;
    const Vec3& qa = flip ? pb : pa;
    const Vec3& qb = flip ? pa : pb;
    const double ga = flip ? fb : fa;
    const double gb = flip ? fa : fb;
    const double t = ga / (ga - gb);
    const Vec3 p = qa + t * (qb - qa);
    const int id = static_cast<int>(verts.size());
    verts.push_back(p);
    map.emplace(key, id);
    return id;
  }
};

}  // namespace

ExtractResult extract_mesh(const BatchSdf& sdf, const Eigen::AlignedBox3d& box,
                           int resolution) {
  require(resolution >= 2, "extract_mesh: resolution must be >= 2 per axis");
  const int np = resolution + 1;
  const std::uint64_t total = static_cast<std::uint64_t>(np) * np * np;
  const Vec3 lo = box.min();
  const Vec3 step = (box.max() - box.min()) / resolution;

  auto point_at = [&](std::uint64_t id) {
    const int i = static_cast<int>(id % np);
    const int j = static_cast<int>((id / np) % np);
    const int k = static_cast<int>(id / (static_cast<std::uint64_t>(np) * np));
    return Vec3(lo(0) + i * step(0), lo(1) + j * step(1), lo(2) + k * step(2));
  };

  // Grid evaluation is the expensive part for neural fields; batch it.
  VecX values(total);
  parallel_for(static_cast<std::int64_t>(total), [&](std::int64_t b, std::int64_t e) {
    constexpr std::int64_t kBatch = 16384;
    for (std::int64_t at = b; at < e; at += kBatch) {
      const std::int64_t cnt = std::min(kBatch, e - at);
      MatX3 pts(cnt, 3);
      for (std::int64_t i = 0; i < cnt; ++i) pts.row(i) = point_at(at + i).transpose();
      values.segment(at, cnt) = sdf(pts);
    }
  });

  // Zero values are treated as positive so interpolation parameters stay
  // in (0, 1] and shared edges resolve identically everywhere.
  auto is_inside = [&](std::uint64_t id) { return values(id) < 0.0; };

  VertexWelder welder;
  welder.npoints = total;
  std::vector<std::array<int, 3>> tris;

  auto id_of = [&](int i, int j, int k) {
    return static_cast<std::uint64_t>(i) +
           static_cast<std::uint64_t>(np) * (static_cast<std::uint64_t>(j) +
                                             static_cast<std::uint64_t>(np) * k);
  };

  auto emit = [&](int v0, int v1, int v2, const Vec3& outward_ref) {
    const Vec3& a = welder.verts[v0];
    const Vec3& b = welder.verts[v1];
    const Vec3& c = welder.verts[v2];
    const Vec3 n = (b - a).cross(c - a);
    if (n.dot(outward_ref) >= 0)
      tris.push_back({v0, v1, v2});
    else
      tris.push_back({v0, v2, v1});
  };

  for (int k = 0; k < resolution; ++k) {
    for (int j = 0; j < resolution; ++j) {
      for (int i = 0; i < resolution; ++i) {
        for (const auto& perm : kAxisPerms) {
          int c[3] = {i, j, k};
          std::uint64_t ids[4];
          ids[0] = id_of(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[perm[s]];
            ids[s + 1] = id_of(c[0], c[1], c[2]);
          }

          int inside[4], n_in = 0;
          for (int v = 0; v < 4; ++v) inside[v] = is_inside(ids[v]) ? 1 : 0, n_in += inside[v];
          if (n_in == 0 || n_in == 4) continue;

          Vec3 p[4];
          double f[4];
          for (int v = 0; v < 4; ++v) {
            p[v] = point_at(ids[v]);
            f[v] = values(ids[v]);
          }

          auto edge_vertex = [&](int a, int b) {
            return welder.vertex_on_edge(ids[a], ids[b], p[a], p[b], f[a], f[b]);
          };

          if (n_in == 1 || n_in == 3) {
            // One corner is alone on its side; triangle across its 3 edges.
            const int lone_side = (n_in == 1) ? 1 : 0;
            int lone = 0;
            while (inside[lone] != lone_side) ++lone;
            int others[3], m = 0;
            for (int v = 0; v < 4; ++v)
              if (v != lone) others[m++] = v;
            const int v0 = edge_vertex(lone, others[0]);
            const int v1 = edge_vertex(lone, others[1]);
            const int v2 = edge_vertex(lone, others[2]);
            // Outward = from inside corner toward the surface.
            const Vec3 centroid = (welder.verts[v0] + welder.verts[v1] + welder.verts[v2]) / 3.0;
            const Vec3 ref = (n_in == 1) ? Vec3(centroid - p[lone]) : Vec3(p[lone] - centroid);
            emit(v0, v1, v2, ref);
          } else {
            // Two vs two: quad across four edges, split into two triangles.
            int in_v[2], out_v[2], mi = 0, mo = 0;
            for (int v = 0; v < 4; ++v)
              (inside[v] ? in_v[mi++] : out_v[mo++]) = v;
            const int v00 = edge_vertex(in_v[0], out_v[0]);
            const int v01 = edge_vertex(in_v[0], out_v[1]);
            const int v10 = edge_vertex(in_v[1], out_v[0]);
            const int v11 = edge_vertex(in_v[1], out_v[1]);
            const Vec3 inside_mid = 0.5 * (p[in_v[0]] + p[in_v[1]]);
            const Vec3 quad_mid = 0.25 * (welder.verts[v00] + welder.verts[v01] +
                                          welder.verts[v10] + welder.verts[v11]);
            const Vec3 ref = quad_mid - inside_mid;
            emit(v00, v01, v11, ref);
            emit(v00, v11, v10, ref);
          }
        }
      }
    }
  }

  ExtractResult res;
  res.found_surface = !tris.empty();
  res.mesh.vertices.resize(welder.verts.size(), 3);
  for (std::size_t v = 0; v < welder.verts.size(); ++v)
    res.mesh.vertices.row(v) = welder.verts[v].transpose();
  res.mesh.faces.resize(tris.size(), 3);
  for (std::size_t t = 0; t < tris.size(); ++t)
    res.mesh.faces.row(t) << tris[t][0], tris[t][1], tris[t][2];
  return res;
}

ExtractResult extract_mesh(const std::function<double(const Vec3&)>& sdf,
                           const Eigen::AlignedBox3d& box, int resolution) {
  return extract_mesh(
      [&sdf](const MatX3& pts) {
        VecX out(pts.rows());
        for (Index i = 0; i < pts.rows(); ++i) out(i) = sdf(pts.row(i).transpose());
        return out;
      },
      box, resolution);
}

bool edge_manifold(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  const std::uint64_t n = mesh.vertex_count();
  for (Index f = 0; f < mesh.face_count(); ++f) {
    for (int k = 0; k < 3; ++k) {
      std::uint64_t a = mesh.faces(f, k);
      std::uint64_t b = mesh.faces(f, (k + 1) % 3);
      if (a > b) std::swap(a, b);
      ++count[a * n + b];
    }
  }
  for (const auto& [key, c] : count)
    if (c != 2) return false;
  return !count.empty();
}

}  // namespace nphm
