#include "nphm/identity_field.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace nphm {

using nlohmann::json;

double IdentityFieldConfig::resolved_blend_constant() const {
  if (blend_constant >= 0.0) return blend_constant;
  return std::exp(-0.2 / (sigma * sigma));
}

std::string IdentityFieldConfig::to_json() const {
  json j;
  j["k_total"] = layout.k_total;
  j["symmetry_axis"] = layout.symmetry_axis;
  j["middle"] = layout.middle;
  json pairs = json::array();
  for (const auto& [l, r] : layout.pairs) pairs.push_back({l, r});
  j["pairs"] = pairs;
  json ref = json::array();
  for (Index k = 0; k < layout.reference.rows(); ++k)
    ref.push_back({layout.reference(k, 0), layout.reference(k, 1), layout.reference(k, 2)});
  j["reference_anchors"] = ref;
  j["d_glob"] = d_glob;
  j["d_loc"] = d_loc;
  j["local_hidden"] = local_hidden;
  j["global_hidden"] = global_hidden;
  j["anchor_hidden"] = anchor_hidden;
  j["sigma"] = sigma;
  j["blend_constant"] = resolved_blend_constant();
  j["softplus_beta"] = softplus_beta;
  return j.dump(2);
}

IdentityFieldConfig IdentityFieldConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  IdentityFieldConfig cfg;
  cfg.layout.k_total = j.at("k_total");
  cfg.layout.symmetry_axis = j.at("symmetry_axis");
  cfg.layout.middle = j.at("middle").get<std::vector<int>>();
  for (const auto& p : j.at("pairs")) cfg.layout.pairs.emplace_back(p[0], p[1]);
  const auto& ref = j.at("reference_anchors");
  cfg.layout.reference.resize(ref.size(), 3);
  for (std::size_t k = 0; k < ref.size(); ++k)
    cfg.layout.reference.row(k) << ref[k][0].get<double>(), ref[k][1].get<double>(),
        ref[k][2].get<double>();
  cfg.d_glob = j.at("d_glob");
  cfg.d_loc = j.at("d_loc");
  cfg.local_hidden = j.at("local_hidden").get<std::vector<int>>();
  cfg.global_hidden = j.at("global_hidden").get<std::vector<int>>();
  cfg.anchor_hidden = j.at("anchor_hidden").get<std::vector<int>>();
  cfg.sigma = j.at("sigma");
  cfg.blend_constant = j.at("blend_constant");
  cfg.softplus_beta = j.at("softplus_beta");
  cfg.layout.validate();
  return cfg;
}

namespace {

// Negates the symmetry-axis row of a (3 x N) matrix.
inline MatX flip_rows(const MatX& g, int axis) {
  MatX out = g;
  out.row(axis) = -out.row(axis);
  return out;
}

}  // namespace

void IdentityFieldGrads::zero() {
  anchor.zero();
  global.zero();
  for (auto& l : locals) l.zero();
}

IdentityField::IdentityField(IdentityFieldConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.layout.validate();
  require(cfg_.sigma > 0, "IdentityField: sigma must be positive");
  require(cfg_.resolved_blend_constant() > 0, "IdentityField: blend constant must be positive");
  const int in = 3 + cfg_.d_glob + cfg_.d_loc;
  global_net_ = DenseNet::mlp(in, cfg_.global_hidden, 1, cfg_.softplus_beta);
  for (int i = 0; i < cfg_.layout.distinct_nets(); ++i)
    local_nets_.push_back(DenseNet::mlp(in, cfg_.local_hidden, 1, cfg_.softplus_beta));
  if (cfg_.layout.k_total > 0)
    anchor_net_ = DenseNet::mlp(cfg_.d_glob, cfg_.anchor_hidden, 3 * cfg_.layout.k_total,
                                cfg_.softplus_beta);
}

void IdentityField::init_params(Rng& rng) {
  global_net_.init_uniform(rng);
  for (auto& net : local_nets_) net.init_uniform(rng);
  if (k_total() == 0) return;
  anchor_net_.init_uniform(rng);
  // Start anchor predictions at the reference layout.
  VecX& bias = anchor_net_.bias(anchor_net_.layer_count() - 1);
  anchor_net_.weight(anchor_net_.layer_count() - 1).setZero();
  for (int k = 0; k < cfg_.layout.k_total; ++k)
    bias.segment(3 * k, 3) = cfg_.layout.reference.row(k).transpose();
}

IdentityCode IdentityField::zero_code() const {
  IdentityCode code;
  code.z_glob = VecX::Zero(cfg_.d_glob);
  code.z_loc = MatX::Zero(cfg_.d_loc, k_total() + 1);
  complete_code(code);
  return code;
}

IdentityCode IdentityField::random_code(Rng& rng, double stddev) const {
  IdentityCode code;
  code.z_glob.resize(cfg_.d_glob);
  for (Index i = 0; i < code.z_glob.size(); ++i) code.z_glob(i) = stddev * rng.normal();
  code.z_loc.resize(cfg_.d_loc, k_total() + 1);
  for (Index j = 0; j < code.z_loc.cols(); ++j)
    for (Index i = 0; i < code.z_loc.rows(); ++i) code.z_loc(i, j) = stddev * rng.normal();
  complete_code(code);
  return code;
}

void IdentityField::complete_code(IdentityCode& code) const {
  code.anchors = predict_anchors(code.z_glob);
}

void IdentityField::check_code(const IdentityCode& code) const {
  require(code.z_glob.size() == cfg_.d_glob, "IdentityCode: z_glob width mismatch");
  require(code.z_loc.rows() == cfg_.d_loc && code.z_loc.cols() == k_total() + 1,
          "IdentityCode: local code shape mismatch");
  require(code.anchors.rows() == k_total(), "IdentityCode: anchors not computed");
}

IdentityCode IdentityField::mirror_code(const IdentityCode& code) const {
  IdentityCode out = code;
  const int axis = cfg_.layout.symmetry_axis;
  for (const auto& [l, r] : cfg_.layout.pairs) {
    out.z_loc.col(l) = code.z_loc.col(r);
    out.z_loc.col(r) = code.z_loc.col(l);
    out.anchors.row(l - 1) = flip_point(code.anchors.row(r - 1), axis).transpose();
    out.anchors.row(r - 1) = flip_point(code.anchors.row(l - 1), axis).transpose();
  }
  for (int k : cfg_.layout.middle)
    out.anchors.row(k - 1) = flip_point(code.anchors.row(k - 1), axis).transpose();
  return out;
}

MatX3 IdentityField::predict_anchors(const VecX& z_glob) const {
  require(z_glob.size() == cfg_.d_glob, "predict_anchors: z_glob width mismatch");
  if (k_total() == 0) return MatX3(0, 3);
  const VecX out = anchor_net_.eval(z_glob);
  MatX3 anchors(k_total(), 3);
  for (int k = 0; k < k_total(); ++k) anchors.row(k) = out.segment(3 * k, 3).transpose();
  require(anchors.allFinite(), "predict_anchors: non-finite anchors");
  return anchors;
}

VecX IdentityField::blend_weights_at(const Vec3& x, const MatX3& anchors) const {
  VecX w(k_total() + 1);
  w(0) = cfg_.resolved_blend_constant();
  for (int k = 1; k <= k_total(); ++k) {
    const double r = (x - Vec3(anchors.row(k - 1))).norm();
    w(k) = std::exp(-r / (2.0 * cfg_.sigma));
  }
  return w / w.sum();
}

// ---------------------------------------------------------------------------
// Region evaluation

struct IdentityField::RegionEval {
  struct Branch {
    DenseNet::GradTape tape;
    MatX g_net;     // 3 x N, d v / d rho in net coordinates
    bool flipped = false;
    double scale = 1.0;
  };
  std::vector<Branch> branches;
  Eigen::RowVectorXd v;  // 1 x N
  MatX gamma;            // 3 x N, world-space
};

void IdentityField::eval_regions(const MatX3& X, const IdentityCode& code, bool with_grad,
                                 std::vector<RegionEval>& out, bool keep_tapes) const {
  const Index N = X.rows();
  const int K = k_total();
  const int axis = cfg_.layout.symmetry_axis;
  const int in = 3 + cfg_.d_glob + cfg_.d_loc;
  out.resize(K + 1);

  MatX input(in, N);
  for (int k = 0; k <= K; ++k) {
    RegionEval& reg = out[k];
    const bool symmetrized = (k == 0) || cfg_.layout.is_middle(k);
    const bool mirror = k > 0 && cfg_.layout.mirrored(k);
    const DenseNet& net = (k == 0) ? global_net_ : local_nets_[cfg_.layout.net_of(k)];

    const Vec3 a = (k == 0) ? Vec3::Zero() : Vec3(code.anchors.row(k - 1));
    MatX rho = (X.rowwise() - a.transpose()).transpose();  // 3 x N
    if (mirror) rho.row(axis) = -rho.row(axis);

    input.topRows(3) = rho;
    input.middleRows(3, cfg_.d_glob).colwise() = code.z_glob;
    input.bottomRows(cfg_.d_loc).colwise() = VecX(code.z_loc.col(k));

    auto run_branch = [&](const MatX& inp, bool flipped, double scale) {
      RegionEval::Branch br;
      br.flipped = flipped;
      br.scale = scale;
      if (with_grad) {
        MatX g;
        const MatX y = net.forward_grad(inp, 3, g, keep_tapes ? &br.tape : nullptr);
        br.g_net = std::move(g);
        return std::pair<Eigen::RowVectorXd, RegionEval::Branch>(y.row(0), std::move(br));
      }
      if (keep_tapes) {
        const MatX y = net.forward(inp, &br.tape);
        return std::pair<Eigen::RowVectorXd, RegionEval::Branch>(y.row(0), std::move(br));
      }
      const MatX y = net.forward(inp);
      return std::pair<Eigen::RowVectorXd, RegionEval::Branch>(y.row(0), std::move(br));
    };

    if (symmetrized) {
      auto [v1, b1] = run_branch(input, false, 0.5);
      MatX flipped_input = input;
      flipped_input.row(axis) = -flipped_input.row(axis);
      auto [v2, b2] = run_branch(flipped_input, true, 0.5);
      reg.v = 0.5 * (v1 + v2);
      if (with_grad) reg.gamma = 0.5 * (b1.g_net + flip_rows(b2.g_net, axis));
      if (keep_tapes || with_grad) {
        reg.branches.push_back(std::move(b1));
        reg.branches.push_back(std::move(b2));
      }
    } else {
      auto [v1, b1] = run_branch(input, mirror, 1.0);
      reg.v = v1;
      if (with_grad) reg.gamma = mirror ? flip_rows(b1.g_net, axis) : b1.g_net;
      if (keep_tapes || with_grad) reg.branches.push_back(std::move(b1));
    }
  }
}

// ---------------------------------------------------------------------------
// Blending

namespace {

struct BlendData {
  MatX u, w;               // (K+1) x N
  VecX S;                  // N
  MatX T;                  // 3 x N (sum of t_k; zero when !with_grad)
  std::vector<MatX> ehat;  // per k>=1: 3 x N
  std::vector<VecX> r;     // per k>=1: N
  std::vector<MatX> dw;    // per k 0..K: 3 x N (only when with_grad)
};

void compute_blend(const MatX3& X, const MatX3& anchors, double sigma, double c,
                   bool with_grad, BlendData& bd) {
  const Index N = X.rows();
  const int K = static_cast<int>(anchors.rows());
  bd.u.resize(K + 1, N);
  bd.u.row(0).setConstant(c);
  bd.ehat.assign(K + 1, MatX());
  bd.r.assign(K + 1, VecX());
  for (int k = 1; k <= K; ++k) {
    const Vec3 a = anchors.row(k - 1);
    MatX e = (X.rowwise() - a.transpose()).transpose();  // 3 x N
    VecX r = e.colwise().norm().transpose();
    r = r.cwiseMax(1e-12);
    bd.u.row(k) = (-r / (2.0 * sigma)).array().exp().transpose();
    bd.ehat[k] = (e.array().rowwise() / r.transpose().array()).matrix();
    bd.r[k] = std::move(r);
  }
  bd.S = bd.u.colwise().sum().transpose();
  bd.w = (bd.u.array().rowwise() / bd.S.transpose().array()).matrix();

  if (with_grad) {
    bd.T = MatX::Zero(3, N);
    for (int k = 1; k <= K; ++k)
      bd.T += (bd.ehat[k].array().rowwise() * (-bd.u.row(k).array() / (2.0 * sigma))).matrix();
    bd.dw.assign(K + 1, MatX());
    for (int k = 0; k <= K; ++k) {
      MatX tk = (k == 0) ? MatX::Zero(3, N)
                         : MatX(bd.ehat[k].array().rowwise() *
                                (-bd.u.row(k).array() / (2.0 * sigma)));
      bd.dw[k] = ((tk.array() - bd.T.array().rowwise() * bd.w.row(k).array()).rowwise() /
                  bd.S.transpose().array())
                     .matrix();
    }
  }
}

}  // namespace

struct IdentityField::EvalBatch {
  MatX3 X;
  IdentityCode code;
  std::vector<RegionEval> regions;
  BlendData blend;
  VecX values;
  MatX3 gradients;
};

std::shared_ptr<IdentityField::EvalBatch> IdentityField::forward_batch(
    const MatX3& X, const IdentityCode& code) const {
  check_code(code);
  auto batch = std::make_shared<EvalBatch>();
  batch->X = X;
  batch->code = code;
  eval_regions(X, code, /*with_grad=*/true, batch->regions, /*keep_tapes=*/true);
  compute_blend(X, code.anchors, cfg_.sigma, cfg_.resolved_blend_constant(),
                /*with_grad=*/true, batch->blend);

  const Index N = X.rows();
  batch->values = VecX::Zero(N);
  MatX grad = MatX::Zero(3, N);
  for (int k = 0; k <= k_total(); ++k) {
    const auto& reg = batch->regions[k];
    batch->values += (batch->blend.w.row(k).array() * reg.v.array()).matrix().transpose();
    grad += (reg.gamma.array().rowwise() * batch->blend.w.row(k).array()).matrix();
    grad += (batch->blend.dw[k].array().rowwise() * reg.v.array()).matrix();
  }
  batch->gradients = grad.transpose();
  return batch;
}

const VecX& IdentityField::batch_values(const EvalBatch& b) const { return b.values; }
const MatX3& IdentityField::batch_gradients(const EvalBatch& b) const { return b.gradients; }

VecX IdentityField::sdf(const MatX3& X, const IdentityCode& code) const {
  check_code(code);
  std::vector<RegionEval> regions;
  eval_regions(X, code, /*with_grad=*/false, regions, /*keep_tapes=*/false);
  BlendData bd;
  compute_blend(X, code.anchors, cfg_.sigma, cfg_.resolved_blend_constant(), false, bd);
  VecX out = VecX::Zero(X.rows());
  for (int k = 0; k <= k_total(); ++k)
    out += (bd.w.row(k).array() * regions[k].v.array()).matrix().transpose();
  return out;
}

double IdentityField::sdf(const Vec3& x, const IdentityCode& code) const {
  return sdf(MatX3(x.transpose()), code)(0);
}

void IdentityField::sdf_with_gradient(const MatX3& X, const IdentityCode& code, VecX& values,
                                      MatX3& gradients) const {
  check_code(code);
  std::vector<RegionEval> regions;
  eval_regions(X, code, /*with_grad=*/true, regions, /*keep_tapes=*/false);
  BlendData bd;
  compute_blend(X, code.anchors, cfg_.sigma, cfg_.resolved_blend_constant(), true, bd);
  values = VecX::Zero(X.rows());
  MatX grad = MatX::Zero(3, X.rows());
  for (int k = 0; k <= k_total(); ++k) {
    values += (bd.w.row(k).array() * regions[k].v.array()).matrix().transpose();
    grad += (regions[k].gamma.array().rowwise() * bd.w.row(k).array()).matrix();
    grad += (bd.dw[k].array().rowwise() * regions[k].v.array()).matrix();
  }
  gradients = grad.transpose();
}

Vec3 IdentityField::sdf_gradient(const Vec3& x, const IdentityCode& code) const {
  VecX v;
  MatX3 g;
  sdf_with_gradient(MatX3(x.transpose()), code, v, g);
  return g.row(0);
}

double IdentityField::local_sdf(int k, const Vec3& x, const IdentityCode& code) const {
  require(k >= 0 && k <= k_total(), "local_sdf: region index out of range");
  check_code(code);
  std::vector<RegionEval> regions;
  eval_regions(MatX3(x.transpose()), code, false, regions, false);
  return regions[k].v(0);
}

// ---------------------------------------------------------------------------
// Backward

void IdentityField::backward_batch(const EvalBatch& batch, const VecX& value_bar,
                                   const MatX3& grad_bar, IdentityFieldGrads& param_grads,
                                   IdentityCodeGrads& code_grads, MatX3& anchor_bar) const {
  const Index N = batch.X.rows();
  const int K = k_total();
  const int axis = cfg_.layout.symmetry_axis;
  const double sigma = cfg_.sigma;
  require(value_bar.size() == N && grad_bar.rows() == N, "backward_batch: adjoint shape");

  const MatX B = grad_bar.transpose();  // 3 x N
  const BlendData& bd = batch.blend;

  if (anchor_bar.rows() != K) anchor_bar = MatX3::Zero(K, 3);
  if (code_grads.z_glob.size() != cfg_.d_glob) {
    code_grads.z_glob = VecX::Zero(cfg_.d_glob);
    code_grads.z_loc = MatX::Zero(cfg_.d_loc, K + 1);
  }

  // Blend adjoints accumulated across regions.
  Eigen::RowVectorXd Sbar = Eigen::RowVectorXd::Zero(N);
  MatX Tbar = MatX::Zero(3, N);
  MatX ubar = MatX::Zero(K + 1, N);
  std::vector<MatX> tbar(K + 1);
  for (int k = 1; k <= K; ++k) tbar[k] = MatX::Zero(3, N);

  for (int k = 0; k <= K; ++k) {
    const auto& reg = batch.regions[k];

    // Upstream for this region's value and world-space gradient.
    const Eigen::RowVectorXd vbar =
        ((value_bar.transpose().array() * bd.w.row(k).array()) +
         (B.array() * bd.dw[k].array()).colwise().sum())
            .matrix();
    const MatX gambar = (B.array().rowwise() * bd.w.row(k).array()).matrix();

    // Upstream for the blend weight and its spatial gradient.
    const Eigen::RowVectorXd wbar =
        ((value_bar.transpose().array() * reg.v.array()) +
         (B.array() * reg.gamma.array()).colwise().sum())
            .matrix();
    const MatX m = (B.array().rowwise() * reg.v.array()).matrix();  // adjoint of dw[k]

    // Blend backward (in terms of u_k, t_k, S, T).
    ubar.row(k) += (wbar.array() / bd.S.transpose().array()).matrix();
    Sbar.array() -= wbar.array() * bd.w.row(k).array() / bd.S.transpose().array();

    const Eigen::RowVectorXd S2 = (bd.S.array() * bd.S.array()).transpose();
    if (k >= 1) {
      const MatX tk =
          (bd.ehat[k].array().rowwise() * (-bd.u.row(k).array() / (2.0 * sigma))).matrix();
      tbar[k] += (m.array().rowwise() / bd.S.transpose().array()).matrix();
      Sbar.array() -= (tk.array() * m.array()).colwise().sum() / S2.array();
    }
    const Eigen::RowVectorXd Tm = (bd.T.array() * m.array()).colwise().sum();
    ubar.row(k).array() -= Tm.array() / S2.array();
    Tbar -= (m.array().rowwise() * (bd.u.row(k).array() / S2.array())).matrix();
    Sbar.array() += 2.0 * bd.u.row(k).array() * Tm.array() / (S2.array() * bd.S.transpose().array());

    // Network backward per branch.
    DenseNet::Grads& bucket = (k == 0) ? param_grads.global
                                       : param_grads.locals[cfg_.layout.net_of(k)];
    const DenseNet& net = (k == 0) ? global_net_ : local_nets_[cfg_.layout.net_of(k)];
    for (const auto& br : reg.branches) {
      const MatX gbar_net =
          br.flipped ? flip_rows(br.scale * gambar, axis) : MatX(br.scale * gambar);
      const MatX xi_bar =
          net.backward_grad(br.tape, br.scale * vbar, gbar_net, &bucket);
      MatX rho_bar = xi_bar.topRows(3);
      if (br.flipped) rho_bar.row(axis) = -rho_bar.row(axis);
      if (k >= 1) anchor_bar.row(k - 1) -= rho_bar.rowwise().sum().transpose();
      code_grads.z_glob += xi_bar.middleRows(3, cfg_.d_glob).rowwise().sum();
      code_grads.z_loc.col(k) += xi_bar.bottomRows(cfg_.d_loc).rowwise().sum();
    }
  }

  // T = sum_k t_k and S = sum_k u_k.
  for (int k = 1; k <= K; ++k) tbar[k] += Tbar;
  for (int k = 1; k <= K; ++k) ubar.row(k) += Sbar;

  // u_k and t_k down to anchors.
  for (int k = 1; k <= K; ++k) {
    // t_k = -u_k/(2 sigma) * ehat_k contributes to both u and ehat.
    ubar.row(k).array() +=
        (tbar[k].array() * bd.ehat[k].array()).colwise().sum() * (-1.0 / (2.0 * sigma));
    const MatX ehat_bar =
        (tbar[k].array().rowwise() * (-bd.u.row(k).array() / (2.0 * sigma))).matrix();
    // u_k = exp(-r/(2 sigma)).
    const Eigen::RowVectorXd rbar =
        (ubar.row(k).array() * (-bd.u.row(k).array() / (2.0 * sigma))).matrix();
    // ehat = e / r and r = |e|.
    const Eigen::RowVectorXd proj = (ehat_bar.array() * bd.ehat[k].array()).colwise().sum();
    MatX ebar = ((ehat_bar - (bd.ehat[k].array().rowwise() * proj.array()).matrix()).array()
                     .rowwise() /
                 bd.r[k].transpose().array())
                    .matrix();
    ebar += (bd.ehat[k].array().rowwise() * rbar.array()).matrix();
    anchor_bar.row(k - 1) -= ebar.rowwise().sum().transpose();
  }
}

void IdentityField::backward_anchors(const VecX& z_glob, const MatX3& anchor_bar,
                                     IdentityFieldGrads& param_grads, VecX& z_glob_bar) const {
  if (z_glob_bar.size() != cfg_.d_glob) z_glob_bar = VecX::Zero(cfg_.d_glob);
  if (k_total() == 0) return;
  DenseNet::Tape tape;
  anchor_net_.forward(z_glob, &tape);
  VecX ybar(3 * k_total());
  for (int k = 0; k < k_total(); ++k) ybar.segment(3 * k, 3) = anchor_bar.row(k).transpose();
  const MatX in_bar = anchor_net_.backward(tape, ybar, &param_grads.anchor);
  if (z_glob_bar.size() != cfg_.d_glob) z_glob_bar = VecX::Zero(cfg_.d_glob);
  z_glob_bar += in_bar.col(0);
}

// ---------------------------------------------------------------------------
// Parameters and serialization

IdentityFieldGrads IdentityField::make_grads() const {
  IdentityFieldGrads g;
  if (k_total() > 0) g.anchor.init(anchor_net_);
  g.global.init(global_net_);
  g.locals.resize(local_nets_.size());
  for (std::size_t i = 0; i < local_nets_.size(); ++i) g.locals[i].init(local_nets_[i]);
  return g;
}

namespace {
void collect_refs(DenseNet& net, DenseNet::Grads& grads, std::vector<ParamRef>& out) {
  for (int l = 0; l < net.layer_count(); ++l) {
    out.push_back({net.weight(l).data(), grads.dW[l].data(), net.weight(l).size()});
    out.push_back({net.bias(l).data(), grads.db[l].data(), net.bias(l).size()});
  }
}

void save_net(TensorStore& store, const std::string& prefix, const DenseNet& net) {
  for (int l = 0; l < net.layer_count(); ++l) {
    store.put(prefix + ".layer" + std::to_string(l) + ".weight", net.weight(l));
    store.put(prefix + ".layer" + std::to_string(l) + ".bias", net.bias(l));
  }
}

void load_net(const TensorStore& store, const std::string& prefix, DenseNet& net) {
  for (int l = 0; l < net.layer_count(); ++l) {
    const MatX w = store.matrix(prefix + ".layer" + std::to_string(l) + ".weight");
    const VecX b = store.vector(prefix + ".layer" + std::to_string(l) + ".bias");
    require(w.rows() == net.weight(l).rows() && w.cols() == net.weight(l).cols(),
            "load: weight shape mismatch at " + prefix);
    net.weight(l) = w;
    net.bias(l) = b;
  }
}
}  // namespace

std::vector<ParamRef> IdentityField::param_refs(IdentityFieldGrads& grads) {
  std::vector<ParamRef> refs;
  if (k_total() > 0) collect_refs(anchor_net_, grads.anchor, refs);
  collect_refs(global_net_, grads.global, refs);
  for (std::size_t i = 0; i < local_nets_.size(); ++i)
    collect_refs(local_nets_[i], grads.locals[i], refs);
  return refs;
}

Index IdentityField::param_count() const {
  Index n = global_net_.param_count();
  if (k_total() > 0) n += anchor_net_.param_count();
  for (const auto& net : local_nets_) n += net.param_count();
  return n;
}

bool IdentityField::params_finite() const {
  if (!global_net_.finite()) return false;
  if (k_total() > 0 && !anchor_net_.finite()) return false;
  for (const auto& net : local_nets_)
    if (!net.finite()) return false;
  return true;
}

void IdentityField::save(TensorStore& store, const std::string& prefix) const {
  if (k_total() > 0) save_net(store, prefix + ".anchor", anchor_net_);
  save_net(store, prefix + ".global", global_net_);
  for (std::size_t i = 0; i < local_nets_.size(); ++i)
    save_net(store, prefix + ".local" + std::to_string(i), local_nets_[i]);
}

void IdentityField::load(const TensorStore& store, const std::string& prefix) {
  if (k_total() > 0) load_net(store, prefix + ".anchor", anchor_net_);
  load_net(store, prefix + ".global", global_net_);
  for (std::size_t i = 0; i < local_nets_.size(); ++i)
    load_net(store, prefix + ".local" + std::to_string(i), local_nets_[i]);
}

void save_code(TensorStore& store, const std::string& prefix, const IdentityCode& code) {
  store.put(prefix + ".z_glob", code.z_glob);
  store.put(prefix + ".z_loc", code.z_loc);
  store.put(prefix + ".anchors", MatX(code.anchors));
}

IdentityCode load_code(const TensorStore& store, const std::string& prefix) {
  IdentityCode code;
  code.z_glob = store.vector(prefix + ".z_glob");
  code.z_loc = store.matrix(prefix + ".z_loc");
  code.anchors = store.matrix(prefix + ".anchors");
  return code;
}

std::string anchors_to_json(const MatX3& anchors) {
  nlohmann::json j = nlohmann::json::array();
  for (Index k = 0; k < anchors.rows(); ++k)
    j.push_back({anchors(k, 0), anchors(k, 1), anchors(k, 2)});
  return j.dump();
}

std::string code_to_json(const IdentityCode& code) {
  nlohmann::json j;
  j["z_glob"] = std::vector<double>(code.z_glob.data(), code.z_glob.data() + code.z_glob.size());
  nlohmann::json loc = nlohmann::json::array();
  for (Index k = 0; k < code.z_loc.cols(); ++k) {
    const VecX c = code.z_loc.col(k);
    loc.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  }
  j["z_loc"] = loc;
  j["anchors"] = nlohmann::json::parse(anchors_to_json(code.anchors));
  return j.dump();
}

}  // namespace nphm
