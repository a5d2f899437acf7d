#include "nphm/deformation_field.hpp"

#include "json.hpp"

namespace nphm {

using nlohmann::json;

std::string DeformationFieldConfig::to_json() const {
  json j;
  j["d_ex"] = d_ex;
  j["d_id_ex"] = d_id_ex;
  j["hidden"] = hidden;
  j["softplus_beta"] = softplus_beta;
  return j.dump(2);
}

DeformationFieldConfig DeformationFieldConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  DeformationFieldConfig cfg;
  cfg.d_ex = j.at("d_ex");
  cfg.d_id_ex = j.at("d_id_ex");
  cfg.hidden = j.at("hidden").get<std::vector<int>>();
  cfg.softplus_beta = j.at("softplus_beta");
  return cfg;
}

DeformationField::DeformationField(DeformationFieldConfig cfg, const IdentityFieldConfig& id_cfg)
    : cfg_(std::move(cfg)),
      d_glob_(id_cfg.d_glob),
      d_loc_(id_cfg.d_loc),
      k_total_(id_cfg.layout.k_total) {
  const Index concat = d_glob_ + (k_total_ + 1) * d_loc_ + 3 * k_total_;
  const Index d_id = d_glob_ + (k_total_ + 1) * d_loc_;
  require(cfg_.d_id_ex < d_id,
          "DeformationField: identity bottleneck d_id_ex must be smaller than d_id");
  W_ = MatX::Zero(cfg_.d_id_ex, concat);
  net_ = DenseNet::mlp(3 + cfg_.d_ex + cfg_.d_id_ex, cfg_.hidden, 3, cfg_.softplus_beta);
}

void DeformationField::init_params(Rng& rng) {
  net_.init_uniform(rng);
  const double s = 1.0 / std::sqrt(static_cast<double>(W_.cols()));
  for (Index j = 0; j < W_.cols(); ++j)
    for (Index i = 0; i < W_.rows(); ++i) W_(i, j) = rng.uniform(-s, s);
}

VecX DeformationField::concat_identity(const IdentityCode& code) const {
  require(code.z_glob.size() == d_glob_ && code.z_loc.cols() == k_total_ + 1,
          "concat_identity: code shape mismatch");
  VecX v(W_.cols());
  Index at = 0;
  v.segment(at, d_glob_) = code.z_glob;
  at += d_glob_;
  for (int k = 0; k <= k_total_; ++k) {
    v.segment(at, d_loc_) = code.z_loc.col(k);
    at += d_loc_;
  }
  for (int k = 1; k <= k_total_; ++k) {
    v.segment(at, 3) = code.anchors.row(k - 1).transpose();
    at += 3;
  }
  return v;
}

VecX DeformationField::project_identity(const IdentityCode& code) const {
  return W_ * concat_identity(code);
}

MatX DeformationField::assemble_input(const MatX3& X, const VecX& z_ex,
                                      const VecX& z_hat) const {
  require(z_ex.size() == cfg_.d_ex, "DeformationField: z_ex width mismatch");
  require(z_hat.size() == cfg_.d_id_ex, "DeformationField: z_hat width mismatch");
  MatX input(net_.input_width(), X.rows());
  input.topRows(3) = X.transpose();
  input.middleRows(3, cfg_.d_ex).colwise() = z_ex;
  input.bottomRows(cfg_.d_id_ex).colwise() = z_hat;
  return input;
}

MatX3 DeformationField::displacement(const MatX3& X, const VecX& z_ex,
                                     const VecX& z_hat) const {
  return net_.forward(assemble_input(X, z_ex, z_hat)).transpose();
}

Vec3 DeformationField::displacement(const Vec3& x, const VecX& z_ex, const VecX& z_hat) const {
  return displacement(MatX3(x.transpose()), z_ex, z_hat).row(0);
}

void DeformationField::displacement_with_jacobian(const MatX3& X, const VecX& z_ex,
                                                  const VecX& z_hat, MatX3& delta,
                                                  std::vector<Mat3>& jac) const {
  MatX g;
  const MatX y = net_.forward_grad(assemble_input(X, z_ex, z_hat), 3, g);
  delta = y.transpose();
  jac.resize(X.rows());
  for (Index n = 0; n < X.rows(); ++n) {
    Mat3 J;
    for (int o = 0; o < 3; ++o)
      for (int j = 0; j < 3; ++j) J(o, j) = g(o * 3 + j, n);
    jac[n] = Mat3::Identity() + J;
  }
}

Mat3 DeformationField::jacobian(const Vec3& x, const VecX& z_ex, const VecX& z_hat) const {
  MatX3 delta;
  std::vector<Mat3> jac;
  displacement_with_jacobian(MatX3(x.transpose()), z_ex, z_hat, delta, jac);
  return jac[0];
}

struct DeformationField::Batch {
  DenseNet::Tape tape;
  MatX3 delta;
};

std::shared_ptr<DeformationField::Batch> DeformationField::forward_batch(
    const MatX3& X, const VecX& z_ex, const VecX& z_hat) const {
  auto batch = std::make_shared<Batch>();
  batch->delta = net_.forward(assemble_input(X, z_ex, z_hat), &batch->tape).transpose();
  return batch;
}

const MatX3& DeformationField::batch_delta(const Batch& b) const { return b.delta; }

void DeformationField::backward_batch(const Batch& batch, const MatX3& delta_bar, Grads* grads,
                                      VecX& z_ex_bar, VecX& z_hat_bar) const {
  const MatX xi_bar =
      net_.backward(batch.tape, delta_bar.transpose(), grads ? &grads->net : nullptr);
  if (z_ex_bar.size() != cfg_.d_ex) z_ex_bar = VecX::Zero(cfg_.d_ex);
  if (z_hat_bar.size() != cfg_.d_id_ex) z_hat_bar = VecX::Zero(cfg_.d_id_ex);
  z_ex_bar += xi_bar.middleRows(3, cfg_.d_ex).rowwise().sum();
  z_hat_bar += xi_bar.bottomRows(cfg_.d_id_ex).rowwise().sum();
}

VecX DeformationField::backward_projection(const VecX& concat, const VecX& z_hat_bar,
                                           Grads* grads) const {
  if (grads) grads->dW.noalias() += z_hat_bar * concat.transpose();
  return W_.transpose() * z_hat_bar;
}

void DeformationField::scatter_concat_adjoint(const VecX& concat_bar,
                                              IdentityCodeGrads& code_grads,
                                              MatX3& anchor_bar) const {
  require(concat_bar.size() == W_.cols(), "scatter_concat_adjoint: width mismatch");
  if (code_grads.z_glob.size() != d_glob_) {
    code_grads.z_glob = VecX::Zero(d_glob_);
    code_grads.z_loc = MatX::Zero(d_loc_, k_total_ + 1);
  }
  if (anchor_bar.rows() != k_total_) anchor_bar = MatX3::Zero(k_total_, 3);
  Index at = 0;
  code_grads.z_glob += concat_bar.segment(at, d_glob_);
  at += d_glob_;
  for (int k = 0; k <= k_total_; ++k) {
    code_grads.z_loc.col(k) += concat_bar.segment(at, d_loc_);
    at += d_loc_;
  }
  for (int k = 1; k <= k_total_; ++k) {
    anchor_bar.row(k - 1) += concat_bar.segment(at, 3).transpose();
    at += 3;
  }
}

DeformationField::Grads DeformationField::make_grads() const {
  Grads g;
  g.net.init(net_);
  g.dW = MatX::Zero(W_.rows(), W_.cols());
  return g;
}

std::vector<ParamRef> DeformationField::param_refs(Grads& grads) {
  std::vector<ParamRef> refs;
  for (int l = 0; l < net_.layer_count(); ++l) {
    refs.push_back({net_.weight(l).data(), grads.net.dW[l].data(), net_.weight(l).size()});
    refs.push_back({net_.bias(l).data(), grads.net.db[l].data(), net_.bias(l).size()});
  }
  refs.push_back({W_.data(), grads.dW.data(), W_.size()});
  return refs;
}

bool DeformationField::params_finite() const { return net_.finite() && W_.allFinite(); }

void DeformationField::save(TensorStore& store, const std::string& prefix) const {
  for (int l = 0; l < net_.layer_count(); ++l) {
    store.put(prefix + ".net.layer" + std::to_string(l) + ".weight", net_.weight(l));
    store.put(prefix + ".net.layer" + std::to_string(l) + ".bias", net_.bias(l));
  }
  store.put(prefix + ".projection", W_);
}

void DeformationField::load(const TensorStore& store, const std::string& prefix) {
  for (int l = 0; l < net_.layer_count(); ++l) {
    net_.weight(l) = store.matrix(prefix + ".net.layer" + std::to_string(l) + ".weight");
    net_.bias(l) = store.vector(prefix + ".net.layer" + std::to_string(l) + ".bias");
  }
  W_ = store.matrix(prefix + ".projection");
}

}  // namespace nphm
