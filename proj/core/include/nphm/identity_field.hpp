#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nphm/anchor_layout.hpp"
#include "nphm/checkpoint.hpp"
#include "nphm/dense_net.hpp"
#include "nphm/optim.hpp"

namespace nphm {

struct IdentityFieldConfig {
  AnchorLayout layout;
  int d_glob = 64;
  int d_loc = 32;
  std::vector<int> local_hidden{200, 200, 200, 200};
  std::vector<int> global_hidden{200, 200, 200, 200};
  std::vector<int> anchor_hidden{128, 128};
  double sigma = 0.1;
  double blend_constant = -1.0;  // c; < 0 means exp(-0.2/sigma^2)
  double softplus_beta = 100.0;

  double resolved_blend_constant() const;
  std::string to_json() const;
  static IdentityFieldConfig from_json(const std::string& text);
};

/// Latent description of one subject: global code, one local code per
/// region (column k, k=0..K), and the cached anchors.
struct IdentityCode {
  VecX z_glob;
  MatX z_loc;      // d_loc x (K+1)
  MatX3 anchors;   // K x 3 (region k -> row k-1; a_0 is fixed at the origin)

  /// Total latent dimensionality (K+1)*d_loc + d_glob.
  Index d_id() const { return z_loc.size() + z_glob.size(); }
};

struct IdentityFieldGrads {
  DenseNet::Grads anchor, global;
  std::vector<DenseNet::Grads> locals;
  void zero();
};

/// Gradient buffers for one code.
struct IdentityCodeGrads {
  VecX z_glob;
  MatX z_loc;
  void zero() {
    z_glob.setZero();
    z_loc.setZero();
  }
};

/// Canonical-space identity SDF: an ensemble of anchored local MLPs with
/// mirror-pair weight sharing, a global background net, anchor prediction
/// from the global latent, and kernel blending.
///
/// On-axis regions (and the background net) evaluate as the symmetrized
/// average of the net at [rho, z] and [flip(rho), z]; this is what makes
/// the blended field exactly mirror-equivariant under code mirroring.
class IdentityField {
 public:
  explicit IdentityField(IdentityFieldConfig cfg);

  const IdentityFieldConfig& config() const { return cfg_; }
  const AnchorLayout& layout() const { return cfg_.layout; }
  int k_total() const { return cfg_.layout.k_total; }
  Index d_id() const {
    return static_cast<Index>(k_total() + 1) * cfg_.d_loc + cfg_.d_glob;
  }

  void init_params(Rng& rng);

  // -- codes ----------------------------------------------------------------

  IdentityCode zero_code() const;
  IdentityCode random_code(Rng& rng, double stddev) const;
  /// Fills code.anchors from the anchor net.
  void complete_code(IdentityCode& code) const;
  void check_code(const IdentityCode& code) const;

  /// Swaps paired local codes and reflects anchors.
  IdentityCode mirror_code(const IdentityCode& code) const;

  // -- evaluation -----------------------------------------------------------

  MatX3 predict_anchors(const VecX& z_glob) const;

  /// Blend weights at x (length K+1, k=0 first); partition of unity.
  VecX blend_weights_at(const Vec3& x, const MatX3& anchors) const;

  /// Contribution of region k (0..K) before blending.
  double local_sdf(int k, const Vec3& x, const IdentityCode& code) const;

  VecX sdf(const MatX3& X, const IdentityCode& code) const;
  double sdf(const Vec3& x, const IdentityCode& code) const;
  void sdf_with_gradient(const MatX3& X, const IdentityCode& code, VecX& values,
                         MatX3& gradients) const;
  Vec3 sdf_gradient(const Vec3& x, const IdentityCode& code) const;

  // -- training path ----------------------------------------------------------

  struct EvalBatch;
  std::shared_ptr<EvalBatch> forward_batch(const MatX3& X, const IdentityCode& code) const;
  const VecX& batch_values(const EvalBatch& b) const;
  const MatX3& batch_gradients(const EvalBatch& b) const;

  /// Backpropagates dL/dF (value_bar) and dL/d gradF (grad_bar) into
  /// network/parameter grads, code grads, and the anchor adjoint. The
  /// anchor adjoint is NOT chained through the anchor net here; add any
  /// anchor supervision terms and then call backward_anchors.
  void backward_batch(const EvalBatch& batch, const VecX& value_bar, const MatX3& grad_bar,
                      IdentityFieldGrads& param_grads, IdentityCodeGrads& code_grads,
                      MatX3& anchor_bar) const;

  /// Chains an anchor adjoint through the anchor net into z_glob.
  void backward_anchors(const VecX& z_glob, const MatX3& anchor_bar,
                        IdentityFieldGrads& param_grads, VecX& z_glob_bar) const;

  // -- parameters -------------------------------------------------------------

  IdentityFieldGrads make_grads() const;
  std::vector<ParamRef> param_refs(IdentityFieldGrads& grads);
  Index param_count() const;
  bool params_finite() const;

  DenseNet& anchor_net() { return anchor_net_; }
  DenseNet& global_net() { return global_net_; }
  DenseNet& local_net(int i) { return local_nets_[i]; }
  const DenseNet& local_net(int i) const { return local_nets_[i]; }

  void save(TensorStore& store, const std::string& prefix = "identity") const;
  void load(const TensorStore& store, const std::string& prefix = "identity");

 private:
  struct RegionEval;
  void eval_regions(const MatX3& X, const IdentityCode& code, bool with_grad,
                    std::vector<RegionEval>& out, bool keep_tapes) const;

  IdentityFieldConfig cfg_;
  DenseNet anchor_net_;
  DenseNet global_net_;
  std::vector<DenseNet> local_nets_;
};

/// Serializes a code to/from a tensor store under `prefix`.
void save_code(TensorStore& store, const std::string& prefix, const IdentityCode& code);
IdentityCode load_code(const TensorStore& store, const std::string& prefix);

/// JSON export of anchors or codes for inspection.
std::string anchors_to_json(const MatX3& anchors);
std::string code_to_json(const IdentityCode& code);

}  // namespace nphm
