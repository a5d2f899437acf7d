#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "nphm/dense_net.hpp"

namespace nphm::testing {

inline double rel_err(double analytic, double reference) {
  return std::abs(analytic - reference) / std::max(std::abs(reference), 1e-6);
}

inline double rel_err(const MatX& analytic, const MatX& reference) {
  return (analytic - reference).norm() / std::max(reference.norm(), 1e-6);
}

/// Central-difference Jacobian of net output w.r.t. input (out x in).
inline MatX fd_input_jacobian(const DenseNet& net, const VecX& x, double h = 1e-5) {
  MatX jac(net.output_width(), net.input_width());
  VecX xp = x, xm = x;
  for (int j = 0; j < net.input_width(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    jac.col(j) = (net.eval(xp) - net.eval(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return jac;
}

/// Central-difference gradient of an arbitrary scalar function of a
/// mutable parameter array.
inline void fd_grad_inplace(double* params, Index n, const std::function<double()>& f,
                            double* grad_out, double h = 1e-5) {
  for (Index i = 0; i < n; ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double fp = f();
    params[i] = saved - h;
    const double fm = f();
    params[i] = saved;
    grad_out[i] = (fp - fm) / (2.0 * h);
  }
}

}  // namespace nphm::testing
