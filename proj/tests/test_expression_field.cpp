#include "doctest.h"
#include "helpers.hpp"
#include "nphm/deformation_field.hpp"

using namespace nphm;
using namespace nphm::testing;

namespace {

IdentityFieldConfig tiny_identity_config() {
  IdentityFieldConfig cfg;
  cfg.layout.k_total = 3;
  cfg.layout.symmetry_axis = 0;
  cfg.layout.middle = {1};
  cfg.layout.pairs = {{2, 3}};
  cfg.layout.reference.resize(3, 3);
  cfg.layout.reference << 0, 0, 0.4, 0.2, 0.1, 0.3, -0.2, 0.1, 0.3;
  cfg.d_glob = 5;
  cfg.d_loc = 3;
  cfg.local_hidden = {8};
  cfg.global_hidden = {8};
  cfg.anchor_hidden = {8};
  return cfg;
}

DeformationFieldConfig tiny_defo_config() {
  DeformationFieldConfig cfg;
  cfg.d_ex = 4;
  cfg.d_id_ex = 6;
  cfg.hidden = {16, 16};
  return cfg;
}

}  // namespace

TEST_CASE("zero-initialized deformation is the identity map") {
  DeformationField defo(tiny_defo_config(), tiny_identity_config());
  const VecX z_ex = defo.zero_expression();
  const VecX z_hat = VecX::Zero(defo.d_id_ex());
  const Vec3 x(0.2, -0.1, 0.3);
  CHECK(defo.displacement(x, z_ex, z_hat).norm() == 0.0);
  CHECK((defo.jacobian(x, z_ex, z_hat) - Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("identity projection is linear and handles the selector case") {
  IdentityField field(tiny_identity_config());
  Rng rng(31, "init");
  field.init_params(rng);
  DeformationField defo(tiny_defo_config(), tiny_identity_config());

  IdentityCode c1 = field.random_code(rng, 0.3);
  IdentityCode c2 = field.random_code(rng, 0.3);

  // W = 0 projects to zero.
  CHECK(defo.project_identity(c1).norm() == 0.0);

  // Selector of z_glob: first d_glob columns of an identity block. The
  // projection width (6) exceeds d_glob (5), so pad with a zero row.
  MatX& W = defo.projection();
  W.setZero();
  for (int i = 0; i < 5; ++i) W(i, i) = 1.0;
  VecX zh = defo.project_identity(c1);
  CHECK((zh.head(5) - c1.z_glob).norm() < 1e-12);

  // Linearity on the concatenated vectors.
  Rng wrng(33, "W");
  defo.init_params(wrng);
  const double a = 0.7, b = -1.3;
  const VecX va = defo.projection() * defo.concat_identity(c1);
  const VecX vb = defo.projection() * defo.concat_identity(c2);
  const VecX comb = defo.projection() *
                    (a * defo.concat_identity(c1) + b * defo.concat_identity(c2));
  CHECK((comb - (a * va + b * vb)).norm() < 1e-6);
}

TEST_CASE("deformation jacobian matches finite differences") {
  DeformationField defo(tiny_defo_config(), tiny_identity_config());
  Rng rng(35, "init");
  defo.init_params(rng);
  const VecX z_ex = VecX::Random(4);
  const VecX z_hat = VecX::Random(6);

  const Vec3 x(0.15, -0.22, 0.4);
  const Mat3 J = defo.jacobian(x, z_ex, z_hat);
  Mat3 fd;
  const double h = 1e-5;
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const Vec3 pp = xp + defo.displacement(xp, z_ex, z_hat);
    const Vec3 pm = xm + defo.displacement(xm, z_ex, z_hat);
    fd.col(j) = (pp - pm) / (2 * h);
  }
  CHECK(rel_err(MatX(J), MatX(fd)) < 1e-4);
}

TEST_CASE("deformation backward matches finite differences") {
  DeformationField defo(tiny_defo_config(), tiny_identity_config());
  Rng rng(36, "init");
  defo.init_params(rng);
  VecX z_ex = VecX::Random(4);
  VecX z_hat = VecX::Random(6);
  MatX3 X = MatX3::Random(6, 3);
  MatX3 wd = MatX3::Random(6, 3);

  auto loss = [&] { return (defo.displacement(X, z_ex, z_hat).array() * wd.array()).sum(); };

  auto batch = defo.forward_batch(X, z_ex, z_hat);
  auto grads = defo.make_grads();
  VecX zex_bar, zhat_bar;
  defo.backward_batch(*batch, wd, &grads, zex_bar, zhat_bar);

  VecX fd_ex(4);
  fd_grad_inplace(z_ex.data(), 4, loss, fd_ex.data());
  CHECK(rel_err(MatX(zex_bar), MatX(fd_ex)) < 1e-4);

  VecX fd_hat(6);
  fd_grad_inplace(z_hat.data(), 6, loss, fd_hat.data());
  CHECK(rel_err(MatX(zhat_bar), MatX(fd_hat)) < 1e-4);

  MatX fdW(defo.net().weight(0).rows(), defo.net().weight(0).cols());
  fd_grad_inplace(defo.net().weight(0).data(), defo.net().weight(0).size(), loss, fdW.data());
  CHECK(rel_err(grads.net.dW[0], fdW) < 1e-4);
}

TEST_CASE("determinism and error paths") {
  DeformationField defo(tiny_defo_config(), tiny_identity_config());
  Rng rng(37, "init");
  defo.init_params(rng);
  const VecX z_ex = VecX::Random(4);
  const VecX z_hat = VecX::Random(6);
  const Vec3 x(0.1, 0.2, 0.3);
  const Vec3 d1 = defo.displacement(x, z_ex, z_hat);
  const Vec3 d2 = defo.displacement(x, z_ex, z_hat);
  CHECK((d1 - d2).norm() == 0.0);  // bit-identical

  CHECK_THROWS_AS(defo.displacement(x, VecX::Zero(2), z_hat), DimensionError);

  // The identity bottleneck must be structural.
  DeformationFieldConfig wide = tiny_defo_config();
  wide.d_id_ex = 500;
  CHECK_THROWS_AS(DeformationField(wide, tiny_identity_config()), DimensionError);
}

TEST_CASE("checkpoint round trip for the deformation field") {
  DeformationField defo(tiny_defo_config(), tiny_identity_config());
  Rng rng(38, "init");
  defo.init_params(rng);
  TensorStore store;
  defo.save(store);

  DeformationField loaded(tiny_defo_config(), tiny_identity_config());
  loaded.load(store);
  const VecX z_ex = VecX::Random(4);
  const VecX z_hat = VecX::Random(6);
  const Vec3 x(0.3, 0.1, -0.2);
  CHECK((defo.displacement(x, z_ex, z_hat) - loaded.displacement(x, z_ex, z_hat)).norm() < 1e-5);
}
