#pragma once

#include <memory>

#include "nphm/checkpoint.hpp"
#include "nphm/dense_net.hpp"
#include "nphm/identity_field.hpp"

namespace nphm {

struct DeformationFieldConfig {
  int d_ex = 200;
  int d_id_ex = 64;
  std::vector<int> hidden{512, 512, 512, 512, 512, 512};
  double softplus_beta = 100.0;

  std::string to_json() const;
  static DeformationFieldConfig from_json(const std::string& text);
};

/// Per-frame expression latent.
using ExpressionCode = VecX;

/// Forward deformation field: canonical point + expression code + projected
/// identity summary -> displacement, with posed = x + displacement. The
/// identity summary is a single linear map W (no bias) of the concatenated
/// identity codes and anchors; its width d_id_ex is a strict bottleneck
/// (asserted < d_id at construction).
class DeformationField {
 public:
  DeformationField(DeformationFieldConfig cfg, const IdentityFieldConfig& id_cfg);

  const DeformationFieldConfig& config() const { return cfg_; }
  int d_ex() const { return cfg_.d_ex; }
  int d_id_ex() const { return cfg_.d_id_ex; }
  Index concat_width() const { return W_.cols(); }

  void init_params(Rng& rng);

  ExpressionCode zero_expression() const { return VecX::Zero(cfg_.d_ex); }

  /// Concatenation [z_glob, z_0..z_K, a_1..a_K] fed to W.
  VecX concat_identity(const IdentityCode& code) const;
  VecX project_identity(const IdentityCode& code) const;

  // -- evaluation -------------------------------------------------------------

  /// Displacements for N canonical points under one (z_ex, z_hat) pair.
  MatX3 displacement(const MatX3& X, const VecX& z_ex, const VecX& z_hat) const;
  Vec3 displacement(const Vec3& x, const VecX& z_ex, const VecX& z_hat) const;

  /// Posed-point jacobians d(x + delta)/dx for N points.
  void displacement_with_jacobian(const MatX3& X, const VecX& z_ex, const VecX& z_hat,
                                  MatX3& delta, std::vector<Mat3>& jac) const;
  Mat3 jacobian(const Vec3& x, const VecX& z_ex, const VecX& z_hat) const;

  // -- training ---------------------------------------------------------------

  struct Grads {
    DenseNet::Grads net;
    MatX dW;
    void zero() {
      net.zero();
      dW.setZero();
    }
  };

  struct Batch;
  std::shared_ptr<Batch> forward_batch(const MatX3& X, const VecX& z_ex,
                                       const VecX& z_hat) const;
  const MatX3& batch_delta(const Batch& b) const;

  /// VJP: accumulates net grads, W grads (through z_hat and the stored
  /// concat vector), and returns adjoints of z_ex and z_hat.
  void backward_batch(const Batch& batch, const MatX3& delta_bar, Grads* grads,
                      VecX& z_ex_bar, VecX& z_hat_bar) const;

  /// Splits a concat-vector adjoint into code gradients and an anchor adjoint.
  void scatter_concat_adjoint(const VecX& concat_bar, IdentityCodeGrads& code_grads,
                              MatX3& anchor_bar) const;

  /// dW accumulation for a given identity concat: dL/dW += z_hat_bar * concat^T,
  /// and returns the concat adjoint W^T z_hat_bar.
  VecX backward_projection(const VecX& concat, const VecX& z_hat_bar, Grads* grads) const;

  Grads make_grads() const;
  std::vector<ParamRef> param_refs(Grads& grads);
  bool params_finite() const;

  DenseNet& net() { return net_; }
  MatX& projection() { return W_; }
  const MatX& projection() const { return W_; }

  void save(TensorStore& store, const std::string& prefix = "expression") const;
  void load(const TensorStore& store, const std::string& prefix = "expression");

 private:
  MatX assemble_input(const MatX3& X, const VecX& z_ex, const VecX& z_hat) const;

  DeformationFieldConfig cfg_;
  int d_glob_ = 0, d_loc_ = 0, k_total_ = 0;
  DenseNet net_;
  MatX W_;  // d_id_ex x (d_glob + (K+1) d_loc + 3K)
};

}  // namespace nphm
