#pragma once

#include <functional>

#include "nphm/common.hpp"

namespace nphm {

/// Objective: fills grad and returns the function value.
using LbfgsObjective = std::function<double(const VecX& x, VecX& grad)>;

struct LbfgsOptions {
  int max_iters = 100;
  double grad_tol = 1e-8;
  int history = 10;
  double armijo_c1 = 1e-4;
  int max_line_search = 40;
};

struct LbfgsResult {
  VecX x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// Limited-memory BFGS with backtracking line search (sufficient decrease).
/// Accepted objective values are monotone non-increasing; on line-search
/// failure the best point so far is returned with the flag set.
LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, const VecX& init,
                           const LbfgsOptions& opts = {});

}  // namespace nphm
