#include "nphm/optim.hpp"

#include <cmath>

namespace nphm {

LrSchedule LrSchedule::periodic(double base, std::int64_t every, double factor,
                                std::int64_t horizon) {
  LrSchedule s;
  s.base = base;
  for (std::int64_t at = every; at <= horizon; at += every) s.events.push_back({at, factor});
  return s;
}

double clip_grad_norm(const std::vector<ParamRef>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params)
    sq += Eigen::Map<const VecX>(p.grad, p.size).squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (const auto& p : params) Eigen::Map<VecX>(p.grad, p.size) *= scale;
    return max_norm;
  }
  return norm;
}

bool AdamOptimizer::step(const std::vector<ParamRef>& params) {
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
      m_.emplace_back(VecX::Zero(p.size));
      v_.emplace_back(VecX::Zero(p.size));
    }
  }
  if (cfg_.clip > 0.0) clip_grad_norm(params, cfg_.clip);
  for (const auto& p : params) {
    if (!Eigen::Map<const VecX>(p.grad, p.size).allFinite()) return false;
  }

  const double lr = cfg_.schedule.rate_at(t_);
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto val = Eigen::Map<VecX>(params[i].value, params[i].size);
    auto g = Eigen::Map<const VecX>(params[i].grad, params[i].size);
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const VecX mhat = m_[i] / bc1;
    const VecX vhat = v_[i] / bc2;
    if (cfg_.weight_decay > 0.0) val -= lr * cfg_.weight_decay * val;
    val.array() -= lr * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
  }
  return true;
}

}  // namespace nphm
