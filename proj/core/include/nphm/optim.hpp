#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nphm/common.hpp"

namespace nphm {

/// Flat view over one parameter tensor and its gradient accumulator.
struct ParamRef {
  double* value = nullptr;
  double* grad = nullptr;
  Index size = 0;
};

/// Piecewise-constant decay: rate(step) = base * prod{factor : step >= at}.
struct LrSchedule {
  double base = 1e-3;
  struct Event {
    std::int64_t at;
    double factor;
  };
  std::vector<Event> events;

  double rate_at(std::int64_t step) const {
    double r = base;
    for (const auto& e : events)
      if (step >= e.at) r *= e.factor;
    return r;
  }
  /// Convenience: multiply by `factor` every `every` steps.
  static LrSchedule periodic(double base, std::int64_t every, double factor,
                             std::int64_t horizon);
};

/// Global-norm clip over a group of gradients; returns the applied norm.
double clip_grad_norm(const std::vector<ParamRef>& params, double max_norm);

class AdamOptimizer {
 public:
  struct Config {
    LrSchedule schedule;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled
    double clip = 0.0;          // 0 disables clipping
  };

  AdamOptimizer() = default;
  explicit AdamOptimizer(Config cfg) : cfg_(cfg) {}

  /// One update over the group. Gradients are clipped first (global norm);
  /// returns false (and leaves parameters untouched) if any gradient is
  /// non-finite after clipping.
  bool step(const std::vector<ParamRef>& params);

  std::int64_t step_count() const { return t_; }
  double current_rate() const { return cfg_.schedule.rate_at(t_); }
  const Config& config() const { return cfg_; }
  Config& config() { return cfg_; }

  /// Moment buffers for checkpointing.
  std::vector<VecX>& first_moments() { return m_; }
  std::vector<VecX>& second_moments() { return v_; }
  void set_step_count(std::int64_t t) { t_ = t; }

 private:
  Config cfg_;
  std::vector<VecX> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace nphm
