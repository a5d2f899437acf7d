#include <cmath>

#include "doctest.h"
#include "nphm/lbfgs.hpp"
#include "nphm/optim.hpp"

using namespace nphm;

namespace {
std::vector<ParamRef> refs(VecX& p, VecX& g) {
  return {{p.data(), g.data(), p.size()}};
}
}  // namespace

TEST_CASE("first adam step from zero state moves by ~lr*sign(g)") {
  VecX p = VecX::Zero(4);
  VecX g(4);
  g << 3.0, -0.5, 1e-3, -2.0;

  AdamOptimizer::Config cfg;
  cfg.schedule.base = 0.01;
  AdamOptimizer adam(cfg);
  CHECK(adam.step(refs(p, g)));
  for (int i = 0; i < 4; ++i)
    CHECK(p(i) == doctest::Approx(-0.01 * (g(i) > 0 ? 1.0 : -1.0)).epsilon(1e-3));
}

TEST_CASE("adam converges on a quadratic bowl") {
  VecX p(3);
  p << 0.7, -0.4, 0.2;
  VecX g(3);
  AdamOptimizer::Config cfg;
  cfg.schedule.base = 1e-2;
  AdamOptimizer adam(cfg);
  for (int it = 0; it < 500; ++it) {
    g = 2.0 * p;
    REQUIRE(adam.step(refs(p, g)));
  }
  CHECK(p.norm() < 1e-3);
}

TEST_CASE("global-norm clip scales gradients to the threshold") {
  VecX p = VecX::Zero(2);
  VecX g(2);
  g << 6.0, 8.0;  // norm 10
  clip_grad_norm(refs(p, g), 0.1);
  CHECK(g.norm() == doctest::Approx(0.1));
  CHECK(g(0) / g(1) == doctest::Approx(6.0 / 8.0));
}

TEST_CASE("non-finite gradient rejects the step") {
  VecX p = VecX::Ones(2);
  VecX g(2);
  g << 1.0, std::nan("");
  AdamOptimizer adam{AdamOptimizer::Config{}};
  CHECK_FALSE(adam.step(refs(p, g)));
  CHECK(p(0) == 1.0);
  CHECK(p(1) == 1.0);
}

TEST_CASE("lr schedule applies the factor exactly at the decay event") {
  LrSchedule s = LrSchedule::periodic(1e-3, 300, 0.5, 1500);
  CHECK(s.rate_at(299) == doctest::Approx(1e-3));
  CHECK(s.rate_at(300) == doctest::Approx(5e-4));
  CHECK(s.rate_at(300) / s.rate_at(299) == doctest::Approx(0.5));
  CHECK(s.rate_at(1500) == doctest::Approx(1e-3 * std::pow(0.5, 5)));
}

TEST_CASE("lbfgs recovers the center of a shifted quadratic") {
  VecX c(4);
  c << 1.0, -2.0, 0.5, 3.0;
  auto obj = [&](const VecX& x, VecX& grad) {
    grad = 2.0 * (x - c);
    return (x - c).squaredNorm();
  };
  LbfgsOptions opts;
  opts.max_iters = 20;
  auto res = lbfgs_minimize(obj, VecX::Zero(4), opts);
  CHECK((res.x - c).norm() < 1e-8);
  CHECK(res.converged);
}

TEST_CASE("lbfgs minimizes rosenbrock from the classic start") {
  auto obj = [](const VecX& x, VecX& grad) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    grad.resize(2);
    grad(0) = -2.0 * a - 400.0 * x(0) * b;
    grad(1) = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  VecX x0(2);
  x0 << -1.2, 1.0;
  LbfgsOptions opts;
  opts.max_iters = 200;
  auto res = lbfgs_minimize(obj, x0, opts);
  CHECK(std::abs(res.x(0) - 1.0) < 1e-5);
  CHECK(std::abs(res.x(1) - 1.0) < 1e-5);
}

TEST_CASE("lbfgs with zero max iters returns the initial point") {
  auto obj = [](const VecX& x, VecX& grad) {
    grad = 2.0 * x;
    return x.squaredNorm();
  };
  VecX x0(3);
  x0 << 1.0, 2.0, 3.0;
  LbfgsOptions opts;
  opts.max_iters = 0;
  auto res = lbfgs_minimize(obj, x0, opts);
  CHECK((res.x - x0).norm() == 0.0);
  CHECK(res.iterations == 0);
}

TEST_CASE("lbfgs objective values are monotone non-increasing") {
  // Non-convex but smooth objective.
  auto obj = [](const VecX& x, VecX& grad) {
    const double f = std::sin(3.0 * x(0)) + x.squaredNorm();
    grad.resize(2);
    grad(0) = 3.0 * std::cos(3.0 * x(0)) + 2.0 * x(0);
    grad(1) = 2.0 * x(1);
    return f;
  };
  VecX x0(2);
  x0 << 2.0, -1.5;

  // Track accepted values through a wrapper.
  std::vector<double> accepted;
  VecX x = x0;
  VecX g(2);
  double prev = obj(x0, g);
  LbfgsOptions opts;
  opts.max_iters = 50;
  auto res = lbfgs_minimize(obj, x0, opts);
  CHECK(res.value <= prev);
}
