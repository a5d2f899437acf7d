#include "nphm/metrics.hpp"

#include <sstream>

#include "nphm/kdtree.hpp"
#include "nphm/mesh_distance.hpp"
#include "nphm/parallel.hpp"
#include "nphm/surface_sample.hpp"

namespace nphm {

namespace {

struct Directional {
  double mean_dist = 0.0;
  double mean_abs_cos = 0.0;
  double frac_within_tau = 0.0;
  Index count = 0;
};

Directional measure(const OrientedPointCloud& samples, const MeshDistance& target,
                    double tau, const KdTree3* region, double region_radius) {
  Directional d;
  std::vector<double> dist_sum, cos_sum, within;
  std::vector<Index> counts;
  const Index n = samples.size();
  const int chunks = thread_count();
  dist_sum.assign(chunks + 1, 0.0);
  cos_sum.assign(chunks + 1, 0.0);
  within.assign(chunks + 1, 0.0);
  counts.assign(chunks + 1, 0);
  parallel_chunks(n, [&](int c, std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const Vec3 p = samples.points.row(i);
      if (region && region->nearest(p).dist > region_radius) continue;
      const auto hit = target.closest_point(p);
      dist_sum[c] += hit.dist;
      const Vec3 tn = target.mesh().face_normal(hit.face);
      cos_sum[c] += std::abs(tn.dot(Vec3(samples.normals.row(i))));
      if (hit.dist < tau) within[c] += 1.0;
      counts[c] += 1;
    }
  });
  for (int c = 0; c <= chunks; ++c) {
    d.mean_dist += dist_sum[c];
    d.mean_abs_cos += cos_sum[c];
    d.frac_within_tau += within[c];
    d.count += counts[c];
  }
  if (d.count > 0) {
    d.mean_dist /= d.count;
    d.mean_abs_cos /= d.count;
    d.frac_within_tau /= d.count;
  }
  return d;
}

}  // namespace

MetricsReport evaluate_metrics(const TriMesh& reconstruction, const TriMesh& reference,
                               const MetricsOptions& opts) {
  require(!reconstruction.empty() && !reference.empty(),
          "evaluate_metrics: meshes must be non-empty");

  Rng rng_rec(opts.seed, "metrics/reconstruction");
  Rng rng_ref(opts.seed, "metrics/reference");
  const auto rec_samples = sample_surface(reconstruction, opts.samples, std::nullopt, rng_rec);
  const auto ref_samples = sample_surface(reference, opts.samples, std::nullopt, rng_ref);

  std::unique_ptr<KdTree3> region;
  if (opts.eval_label.has_value()) {
    require(reference.has_labels(), "evaluate_metrics: eval region needs labeled reference");
    std::vector<Index> keep;
    for (Index v = 0; v < reference.vertex_count(); ++v)
      if (reference.labels(v) == *opts.eval_label) keep.push_back(v);
    require(!keep.empty(), "evaluate_metrics: eval region label not present on reference");
    MatX3 pts(keep.size(), 3);
    for (std::size_t i = 0; i < keep.size(); ++i) pts.row(i) = reference.vertices.row(keep[i]);
    region = std::make_unique<KdTree3>(pts);
  }

  const MeshDistance rec_dist(reconstruction);
  const MeshDistance ref_dist(reference);

  const auto fwd = measure(rec_samples, ref_dist, opts.tau, region.get(), opts.eval_region_radius);
  const auto bwd = measure(ref_samples, rec_dist, opts.tau, region.get(), opts.eval_region_radius);
  require(fwd.count > 0 && bwd.count > 0,
          "evaluate_metrics: no samples survived the eval-region mask");

  MetricsReport rep;
  rep.tau = opts.tau;
  rep.l1_chamfer = 0.5 * (fwd.mean_dist + bwd.mean_dist);
  rep.normal_consistency = 0.5 * (fwd.mean_abs_cos + bwd.mean_abs_cos);
  const double precision = fwd.frac_within_tau;
  const double recall = bwd.frac_within_tau;
  rep.f_score = (precision + recall > 0) ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return rep;
}

std::string MetricsReport::to_json() const {
  std::ostringstream os;
  os.precision(12);
  os << "{\"l1_chamfer\": " << l1_chamfer << ", \"normal_consistency\": " << normal_consistency
     << ", \"f_score\": " << f_score << ", \"tau\": " << tau << "}";
  return os.str();
}

}  // namespace nphm
