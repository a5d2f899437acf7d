#include "nphm/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace nphm {

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, const VecX& init,
                           const LbfgsOptions& opts) {
  LbfgsResult res;
  res.x = init;
  VecX g(init.size());
  res.value = objective(res.x, g);
  res.grad_norm = g.norm();

  struct Pair {
    VecX s, y;
    double rho;
  };
  std::deque<Pair> hist;

  for (int it = 0; it < opts.max_iters; ++it) {
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    VecX q = g;
    std::vector<double> alpha(hist.size());
    for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
      alpha[i] = hist[i].rho * hist[i].s.dot(q);
      q -= alpha[i] * hist[i].y;
    }
    if (!hist.empty()) {
      const auto& last = hist.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < hist.size(); ++i) {
      const double beta = hist[i].rho * hist[i].y.dot(q);
      q += (alpha[i] - beta) * hist[i].s;
    }
    VecX dir = -q;
    double dg = dir.dot(g);
    if (dg >= 0.0) {  // not a descent direction; fall back to steepest descent
      dir = -g;
      dg = -g.squaredNorm();
    }

    // Weak Wolfe line search: bisection bracketing on top of the
    // sufficient-decrease condition keeps the (s, y) pairs well scaled.
    double t = hist.empty() ? std::min(1.0, 1.0 / res.grad_norm) : 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    VecX xn, gn(g.size());
    double fn = 0.0;
    bool accepted = false;
    bool have_armijo = false;
    VecX x_arm, g_arm;
    double f_arm = 0.0;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      xn = res.x + t * dir;
      fn = objective(xn, gn);
      if (!std::isfinite(fn) || fn > res.value + opts.armijo_c1 * t * dg) {
        hi = t;
        t = 0.5 * (lo + hi);
      } else if (gn.dot(dir) < 0.9 * dg) {
        have_armijo = true;
        x_arm = xn;
        g_arm = gn;
        f_arm = fn;
        lo = t;
        t = std::isinf(hi) ? 2.0 * t : 0.5 * (lo + hi);
      } else {
        accepted = true;
        break;
      }
    }
    if (!accepted && have_armijo) {
      // Sufficient decrease alone is still a usable step.
      xn = std::move(x_arm);
      gn = std::move(g_arm);
      fn = f_arm;
      accepted = true;
    }
    if (!accepted) {
      res.line_search_failed = true;
      break;
    }

    VecX s = xn - res.x;
    VecX y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      hist.push_back({std::move(s), std::move(y), 1.0 / sy});
      while (static_cast<int>(hist.size()) > opts.history) hist.pop_front();
    }

    res.x = std::move(xn);
    res.value = fn;
    g = gn;
    res.grad_norm = g.norm();
    res.iterations = it + 1;
  }
  if (res.grad_norm <= opts.grad_tol) res.converged = true;
  return res;
}

}  // namespace nphm
