#include "doctest.h"
#include "helpers.hpp"
#include "nphm/identity_field.hpp"

using namespace nphm;
using namespace nphm::testing;

namespace {

AnchorLayout small_layout() {
  AnchorLayout layout;
  layout.k_total = 5;
  layout.symmetry_axis = 0;
  layout.middle = {1};
  layout.pairs = {{2, 3}, {4, 5}};
  layout.reference.resize(5, 3);
  layout.reference << 0.0, -0.1, 0.45,   // on-axis (nose)
      0.2, 0.1, 0.35, -0.2, 0.1, 0.35,   // eye pair
      0.25, -0.25, 0.3, -0.25, -0.25, 0.3;  // cheek pair
  layout.validate();
  return layout;
}

IdentityFieldConfig small_config() {
  IdentityFieldConfig cfg;
  cfg.layout = small_layout();
  cfg.d_glob = 6;
  cfg.d_loc = 4;
  cfg.local_hidden = {12, 12};
  cfg.global_hidden = {12, 12};
  cfg.anchor_hidden = {10};
  cfg.sigma = 0.2;
  cfg.blend_constant = 0.3;
  return cfg;
}

}  // namespace

TEST_CASE("default full-scale configuration has d_id = 1344") {
  IdentityFieldConfig cfg;
  cfg.layout = make_full_anchor_layout();
  const IdentityField field(cfg);
  CHECK(field.d_id() == 1344);
  CHECK(cfg.layout.k_total == 39);
  CHECK(cfg.layout.k_symm() == 16);
  CHECK(static_cast<int>(cfg.layout.middle.size()) == 7);
  // c defaults to exp(-0.2/sigma^2) = e^-20 at sigma = 0.1.
  CHECK(cfg.resolved_blend_constant() == doctest::Approx(std::exp(-20.0)));
}

TEST_CASE("predict_anchors: zero net yields bias values, deterministically") {
  IdentityField field(small_config());
  Rng rng(3, "init");
  field.init_params(rng);
  // init leaves the last anchor layer at zero weight + reference bias.
  VecX z = VecX::Random(6);
  const MatX3 a1 = field.predict_anchors(z);
  const MatX3 a2 = field.predict_anchors(z);
  CHECK((a1 - a2).norm() == 0.0);  // bit-identical
  CHECK((a1 - field.layout().reference).norm() < 1e-12);
}

TEST_CASE("blend weights: partition of unity and anchor dominance") {
  IdentityField field(small_config());
  Rng rng(4, "init");
  field.init_params(rng);
  IdentityCode code = field.random_code(rng, 0.1);

  Rng prng(9, "pts");
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(prng.uniform(-1, 1), prng.uniform(-1, 1), prng.uniform(-1, 1));
    const VecX w = field.blend_weights_at(x, code.anchors);
    CHECK(std::abs(w.sum() - 1.0) < 1e-9);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.maxCoeff() <= 1.0);
  }

  // At an anchor with all others far, that region dominates.
  MatX3 anchors(5, 3);
  anchors << 0, 0, 0, 5, 5, 5, -5, 5, 5, 5, -5, 5, -5, -5, 5;
  const VecX w = field.blend_weights_at(Vec3(0, 0, 0), anchors);
  for (int k = 0; k < 6; ++k)
    if (k != 1) CHECK(w(1) > w(k));
}

TEST_CASE("mirror pair shares its net exactly") {
  IdentityField field(small_config());
  Rng rng(5, "init");
  field.init_params(rng);
  IdentityCode code = field.random_code(rng, 0.2);
  code.z_loc.col(3) = code.z_loc.col(2);  // same v for both sides of the pair

  const int k = 2, kstar = 3;
  const Vec3 x(0.31, -0.12, 0.44);
  const Vec3 a_k = code.anchors.row(k - 1);
  const Vec3 a_ks = code.anchors.row(kstar - 1);
  // x' chosen so the mirrored evaluation sees identical net inputs.
  const Vec3 xprime = flip_point(x - a_k) + a_ks;
  CHECK(field.local_sdf(k, x, code) == field.local_sdf(kstar, xprime, code));
}

TEST_CASE("locality: conditioning on z_j only affects region j") {
  IdentityField field(small_config());
  Rng rng(6, "init");
  field.init_params(rng);
  IdentityCode code = field.random_code(rng, 0.2);
  const Vec3 x(0.1, 0.2, 0.5);
  const double before = field.local_sdf(2, x, code);
  code.z_loc.col(4).array() += 0.5;  // perturb a different region
  CHECK(field.local_sdf(2, x, code) == before);
}

TEST_CASE("K=0 degenerate field reduces to the background net") {
  IdentityFieldConfig cfg = small_config();
  cfg.layout = AnchorLayout{};
  cfg.layout.k_total = 0;
  cfg.layout.reference.resize(0, 3);
  IdentityField field(cfg);
  Rng rng(7, "init");
  field.init_params(rng);
  IdentityCode code = field.random_code(rng, 0.2);
  const Vec3 x(0.3, -0.2, 0.1);
  CHECK(field.sdf(x, code) == doctest::Approx(field.local_sdf(0, x, code)));
}

TEST_CASE("mirror equivariance of the full field") {
  IdentityField field(small_config());
  Rng rng(8, "init");
  field.init_params(rng);
  // Make anchor predictions respond to z_glob so mirrored anchors are
  // genuinely asymmetric.
  Rng arng(11, "anchor");
  field.anchor_net().init_uniform(arng);

  for (int trial = 0; trial < 20; ++trial) {
    IdentityCode code = field.random_code(rng, 0.3);
    const IdentityCode mirrored = field.mirror_code(code);
    const Vec3 x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double f = field.sdf(x, code);
    const double fm = field.sdf(flip_point(x), mirrored);
    CHECK(std::abs(f - fm) < 1e-6);
  }
}

TEST_CASE("constant ensemble has zero spatial gradient") {
  IdentityField field(small_config());
  field.global_net().set_zero();
  for (int i = 0; i < field.layout().distinct_nets(); ++i) field.local_net(i).set_zero();
  field.anchor_net().set_zero();
  const double bias = 0.7;
  field.global_net().bias(field.global_net().layer_count() - 1)(0) = bias;
  for (int i = 0; i < field.layout().distinct_nets(); ++i)
    field.local_net(i).bias(field.local_net(i).layer_count() - 1)(0) = bias;

  IdentityCode code = field.zero_code();
  const Vec3 x(0.2, 0.1, -0.4);
  CHECK(field.sdf(x, code) == doctest::Approx(bias));
  CHECK(field.sdf_gradient(x, code).norm() < 1e-12);
}

TEST_CASE("spatial gradient matches finite differences") {
  IdentityField field(small_config());
  Rng rng(12, "init");
  field.init_params(rng);
  Rng arng(13, "anchor");
  field.anchor_net().init_uniform(arng);
  IdentityCode code = field.random_code(rng, 0.3);

  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 x(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
    const Vec3 g = field.sdf_gradient(x, code);
    Vec3 fd;
    const double h = 1e-5;
    for (int j = 0; j < 3; ++j) {
      Vec3 xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      fd(j) = (field.sdf(xp, code) - field.sdf(xm, code)) / (2 * h);
    }
    CHECK(rel_err(MatX(g), MatX(fd)) < 1e-4);
  }
}

TEST_CASE("training backward matches finite differences end to end") {
  // Loss = sum_n [ wv_n F(x_n) + wg_n . gradF(x_n) ], with anchors predicted
  // from z_glob, so gradients flow through blending, nets, and MLP_pos.
  IdentityField field(small_config());
  Rng rng(14, "init");
  field.init_params(rng);
  Rng arng(15, "anchor");
  field.anchor_net().init_uniform(arng);

  IdentityCode code = field.random_code(rng, 0.3);
  const Index N = 5;
  MatX3 X(N, 3);
  for (Index i = 0; i < N; ++i)
    X.row(i) << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
  VecX wv = VecX::Random(N);
  MatX3 wg = MatX3::Random(N, 3);

  auto loss = [&]() {
    IdentityCode c = code;
    field.complete_code(c);  // anchors from current z_glob / net params
    VecX v;
    MatX3 g;
    field.sdf_with_gradient(X, c, v, g);
    return wv.dot(v) + (wg.array() * g.array()).sum();
  };

  IdentityCode c0 = code;
  field.complete_code(c0);
  auto batch = field.forward_batch(X, c0);
  IdentityFieldGrads grads = field.make_grads();
  IdentityCodeGrads cgrads;
  MatX3 anchor_bar;
  field.backward_batch(*batch, wv, wg, grads, cgrads, anchor_bar);
  field.backward_anchors(c0.z_glob, anchor_bar, grads, cgrads.z_glob);

  // Codes.
  {
    VecX fd(code.z_glob.size());
    fd_grad_inplace(code.z_glob.data(), code.z_glob.size(), loss, fd.data());
    CHECK(rel_err(MatX(cgrads.z_glob), MatX(fd)) < 1e-4);

    MatX fdl(code.z_loc.rows(), code.z_loc.cols());
    fd_grad_inplace(code.z_loc.data(), code.z_loc.size(), loss, fdl.data());
    CHECK(rel_err(cgrads.z_loc, fdl) < 1e-4);
  }
  // One shared local net (exercises mirror-pair accumulation).
  {
    DenseNet& net = field.local_net(field.layout().net_of(2));
    MatX fdW(net.weight(0).rows(), net.weight(0).cols());
    fd_grad_inplace(net.weight(0).data(), net.weight(0).size(), loss, fdW.data());
    CHECK(rel_err(grads.locals[field.layout().net_of(2)].dW[0], fdW) < 1e-4);
  }
  // Middle net (exercises the symmetrized branches).
  {
    DenseNet& net = field.local_net(field.layout().net_of(1));
    MatX fdW(net.weight(1).rows(), net.weight(1).cols());
    fd_grad_inplace(net.weight(1).data(), net.weight(1).size(), loss, fdW.data());
    CHECK(rel_err(grads.locals[field.layout().net_of(1)].dW[1], fdW) < 1e-4);
  }
  // Background net.
  {
    DenseNet& net = field.global_net();
    MatX fdW(net.weight(0).rows(), net.weight(0).cols());
    fd_grad_inplace(net.weight(0).data(), net.weight(0).size(), loss, fdW.data());
    CHECK(rel_err(grads.global.dW[0], fdW) < 1e-4);
  }
  // Anchor net (gradient flows via blending weights and input shifts).
  {
    DenseNet& net = field.anchor_net();
    MatX fdW(net.weight(0).rows(), net.weight(0).cols());
    fd_grad_inplace(net.weight(0).data(), net.weight(0).size(), loss, fdW.data());
    CHECK(rel_err(grads.anchor.dW[0], fdW) < 1e-4);
  }
}

TEST_CASE("field checkpoint round trip preserves evaluations to f32") {
  IdentityField field(small_config());
  Rng rng(21, "init");
  field.init_params(rng);
  IdentityCode code = field.random_code(rng, 0.2);

  TensorStore store;
  field.save(store);
  save_code(store, "codes.s0", code);

  IdentityField loaded(small_config());
  loaded.load(store);
  const IdentityCode lcode = load_code(store, "codes.s0");
  const Vec3 x(0.1, -0.3, 0.2);
  CHECK(field.sdf(x, code) == doctest::Approx(loaded.sdf(x, lcode)).epsilon(1e-5));

  // Config JSON round trip.
  const auto cfg2 = IdentityFieldConfig::from_json(small_config().to_json());
  CHECK(cfg2.d_glob == 6);
  CHECK(cfg2.layout.k_total == 5);
  CHECK(cfg2.sigma == doctest::Approx(0.2));
}

TEST_CASE("dimension mismatches are rejected") {
  IdentityField field(small_config());
  Rng rng(22, "init");
  field.init_params(rng);
  CHECK_THROWS_AS(field.predict_anchors(VecX::Zero(3)), DimensionError);

  IdentityCode bad = field.zero_code();
  bad.z_glob = VecX::Zero(2);
  CHECK_THROWS_AS(field.sdf(Vec3(0, 0, 0), bad), DimensionError);
  CHECK_THROWS_AS(field.local_sdf(99, Vec3(0, 0, 0), field.zero_code()), DimensionError);
}
