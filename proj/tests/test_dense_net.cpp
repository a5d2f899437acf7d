#include "doctest.h"
#include "helpers.hpp"
#include "nphm/dense_net.hpp"

using namespace nphm;
using namespace nphm::testing;

TEST_CASE("linear layer reproduces Wx+b and its jacobian") {
  DenseNet net = DenseNet::mlp(3, {}, 2);
  Rng rng(7, "linear");
  net.init_uniform(rng);

  VecX x(3);
  x << 0.3, -1.2, 0.5;
  VecX y;
  MatX jac;
  net.eval_with_input_jac(x, y, jac);

  CHECK((y - (net.weight(0) * x + net.bias(0))).norm() == doctest::Approx(0.0));
  CHECK((jac - net.weight(0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("zero net outputs zero and has zero param grads for squared loss") {
  DenseNet net = DenseNet::mlp(4, {8}, 1);
  net.set_zero();
  MatX X = MatX::Random(4, 5);
  DenseNet::Tape tape;
  MatX Y = net.forward(X, &tape);
  CHECK(Y.norm() == 0.0);

  DenseNet::Grads grads;
  grads.init(net);
  net.backward(tape, 2.0 * Y, &grads);  // d/dp sum(y^2)
  for (int l = 0; l < net.layer_count(); ++l) {
    CHECK(grads.dW[l].norm() == 0.0);
    CHECK(grads.db[l].norm() == 0.0);
  }
}

TEST_CASE("analytic input jacobian matches central finite differences") {
  Rng rng(11, "fdcheck");
  for (int trial = 0; trial < 8; ++trial) {
    const int in = 2 + static_cast<int>(rng.uniform_int(6));
    const int out = 1 + static_cast<int>(rng.uniform_int(3));
    DenseNet net = DenseNet::mlp(in, {16, 16}, out);
    net.init_uniform(rng);
    VecX x(in);
    for (int i = 0; i < in; ++i) x(i) = rng.uniform(-1, 1);

    VecX y;
    MatX jac;
    net.eval_with_input_jac(x, y, jac);
    CHECK(rel_err(jac, fd_input_jacobian(net, x)) < 1e-4);
  }
}

TEST_CASE("value backward matches finite-difference parameter gradients") {
  Rng rng(23, "fdparam");
  DenseNet net = DenseNet::mlp(5, {12, 12}, 2);
  net.init_uniform(rng);
  MatX X = MatX::Random(5, 7);
  MatX Wbar = MatX::Random(2, 7);  // fixed upstream weights: L = sum(Wbar .* Y)

  DenseNet::Tape tape;
  net.forward(X, &tape);
  DenseNet::Grads grads;
  grads.init(net);
  net.backward(tape, Wbar, &grads);

  auto loss = [&] { return (net.forward(X).cwiseProduct(Wbar)).sum(); };
  for (int l = 0; l < net.layer_count(); ++l) {
    MatX fdW(net.weight(l).rows(), net.weight(l).cols());
    fd_grad_inplace(net.weight(l).data(), net.weight(l).size(), loss, fdW.data());
    CHECK(rel_err(grads.dW[l], fdW) < 1e-4);

    MatX fdb(net.bias(l).size(), 1);
    fd_grad_inplace(net.bias(l).data(), net.bias(l).size(), loss, fdb.data());
    CHECK(rel_err(MatX(grads.db[l]), fdb) < 1e-4);
  }
}

TEST_CASE("double backprop: gradient-path parameter grads match finite differences") {
  // L = <wv, y> + <wg, dy/dx_spatial>; checks backward_grad against FD of L.
  Rng rng(31, "fddouble");
  const int in = 6, spatial = 3, out = 1;
  DenseNet net = DenseNet::mlp(in, {10, 10}, out);
  net.init_uniform(rng);
  MatX X = MatX::Random(in, 4);
  MatX wv = MatX::Random(out, 4);
  MatX wg = MatX::Random(out * spatial, 4);

  auto loss = [&] {
    MatX g;
    MatX y = net.forward_grad(X, spatial, g);
    return (y.cwiseProduct(wv)).sum() + (g.cwiseProduct(wg)).sum();
  };

  DenseNet::GradTape tape;
  MatX g;
  net.forward_grad(X, spatial, g, &tape);
  DenseNet::Grads grads;
  grads.init(net);
  MatX xbar = net.backward_grad(tape, wv, wg, &grads);

  for (int l = 0; l < net.layer_count(); ++l) {
    MatX fdW(net.weight(l).rows(), net.weight(l).cols());
    fd_grad_inplace(net.weight(l).data(), net.weight(l).size(), loss, fdW.data());
    CHECK(rel_err(grads.dW[l], fdW) < 1e-4);
  }

  // Input adjoint includes the hessian-vector term; check against FD too.
  MatX fdX(in, 4);
  fd_grad_inplace(X.data(), X.size(), loss, fdX.data());
  CHECK(rel_err(xbar, fdX) < 1e-4);
}

TEST_CASE("forward_grad jacobian agrees with eval_with_input_jac on leading dims") {
  Rng rng(41, "pack");
  DenseNet net = DenseNet::mlp(5, {9}, 3);
  net.init_uniform(rng);
  VecX x = VecX::Random(5);

  VecX y;
  MatX jac;
  net.eval_with_input_jac(x, y, jac);

  MatX g;
  net.forward_grad(x, 3, g);
  for (int o = 0; o < 3; ++o)
    for (int j = 0; j < 3; ++j) CHECK(g(o * 3 + j, 0) == doctest::Approx(jac(o, j)));
}

TEST_CASE("dimension and finiteness preconditions are enforced") {
  DenseNet net = DenseNet::mlp(3, {4}, 1);
  MatX bad = MatX::Random(2, 1);
  CHECK_THROWS_AS(net.forward(bad), DimensionError);

  MatX nan_in = MatX::Constant(3, 1, std::nan(""));
  CHECK_THROWS_AS(net.forward(nan_in), DimensionError);
}
