#include "nphm/dense_net.hpp"

#include <cmath>

namespace nphm {

namespace {

// Numerically stable softplus family with sharpness beta.
inline double softplus(double u, double beta) {
  const double z = beta * u;
  if (z > 30.0) return u;
  if (z < -30.0) return std::exp(z) / beta;
  return std::log1p(std::exp(z)) / beta;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void apply_act(Activation a, double beta, const MatX& u, MatX& out) {
  if (a == Activation::Identity) {
    out = u;
    return;
  }
  out = u.unaryExpr([beta](double v) { return softplus(v, beta); });
}

inline MatX act_prime(Activation a, double beta, const MatX& u) {
  if (a == Activation::Identity) return MatX::Ones(u.rows(), u.cols());
  return u.unaryExpr([beta](double v) { return sigmoid(beta * v); });
}

inline MatX act_second(Activation a, double beta, const MatX& u) {
  if (a == Activation::Identity) return MatX::Zero(u.rows(), u.cols());
  return u.unaryExpr([beta](double v) {
    const double s = sigmoid(beta * v);
    return beta * s * (1.0 - s);
  });
}

}  // namespace

DenseNet DenseNet::mlp(int in, const std::vector<int>& hidden, int out, double beta) {
  require(in > 0 && out > 0, "DenseNet: widths must be positive");
  DenseNet net;
  net.beta_ = beta;
  net.widths_.push_back(in);
  for (int h : hidden) {
    require(h > 0, "DenseNet: widths must be positive");
    net.widths_.push_back(h);
  }
  net.widths_.push_back(out);
  const int L = static_cast<int>(net.widths_.size()) - 1;
  for (int l = 0; l < L; ++l) {
    net.weights_.emplace_back(MatX::Zero(net.widths_[l + 1], net.widths_[l]));
    net.biases_.emplace_back(VecX::Zero(net.widths_[l + 1]));
    net.acts_.push_back(l + 1 == L ? Activation::Identity : Activation::Softplus);
  }
  return net;
}

Index DenseNet::param_count() const {
  Index n = 0;
  for (int l = 0; l < layer_count(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

void DenseNet::init_uniform(Rng& rng) {
  for (int l = 0; l < layer_count(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    for (Index j = 0; j < weights_[l].cols(); ++j)
      for (Index i = 0; i < weights_[l].rows(); ++i) weights_[l](i, j) = rng.uniform(-s, s);
    for (Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = rng.uniform(-s, s);
  }
}

void DenseNet::set_zero() {
  for (int l = 0; l < layer_count(); ++l) {
    weights_[l].setZero();
    biases_[l].setZero();
  }
}

bool DenseNet::finite() const {
  for (int l = 0; l < layer_count(); ++l)
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  return true;
}

void DenseNet::Grads::init(const DenseNet& net) {
  dW.clear();
  db.clear();
  for (int l = 0; l < net.layer_count(); ++l) {
    dW.emplace_back(MatX::Zero(net.weight(l).rows(), net.weight(l).cols()));
    db.emplace_back(VecX::Zero(net.bias(l).size()));
  }
}

void DenseNet::Grads::zero() {
  for (auto& m : dW) m.setZero();
  for (auto& v : db) v.setZero();
}

MatX DenseNet::forward(const MatX& X, Tape* tape) const {
  require(X.rows() == input_width(), "DenseNet::forward: input width mismatch");
  require(X.allFinite(), "DenseNet::forward: non-finite input");
  const int L = layer_count();
  MatX a = X;
  if (tape) {
    tape->a.assign(1, X);
    tape->u.clear();
  }
  for (int l = 0; l < L; ++l) {
    MatX u = (weights_[l] * a).colwise() + biases_[l];
    apply_act(acts_[l], beta_, u, a);
    if (tape) {
      tape->u.push_back(std::move(u));
      tape->a.push_back(a);
    }
  }
  return a;
}

MatX DenseNet::forward_grad(const MatX& X, int spatial, MatX& grad_out, GradTape* tape) const {
  require(X.rows() == input_width(), "DenseNet::forward_grad: input width mismatch");
  require(spatial > 0 && spatial <= input_width(), "DenseNet::forward_grad: bad spatial dim");
  require(X.allFinite(), "DenseNet::forward_grad: non-finite input");
  const int L = layer_count();
  const Index N = X.cols();

  MatX a = X;
  MatX g = MatX::Zero(input_width(), spatial * N);
  for (Index n = 0; n < N; ++n)
    for (int j = 0; j < spatial; ++j) g(j, n * spatial + j) = 1.0;

  if (tape) {
    tape->spatial = spatial;
    tape->a.assign(1, a);
    tape->u.clear();
    tape->g.assign(1, g);
    tape->p.clear();
  }

  for (int l = 0; l < L; ++l) {
    MatX u = (weights_[l] * a).colwise() + biases_[l];
    MatX p = weights_[l] * g;
    apply_act(acts_[l], beta_, u, a);
    if (acts_[l] == Activation::Identity) {
      g = p;
    } else {
      const MatX phi1 = act_prime(acts_[l], beta_, u);
      g.resize(p.rows(), p.cols());
      for (Index n = 0; n < N; ++n)
        g.middleCols(n * spatial, spatial) =
            p.middleCols(n * spatial, spatial).array().colwise() * phi1.col(n).array();
    }
    if (tape) {
      tape->u.push_back(std::move(u));
      tape->a.push_back(a);
      tape->p.push_back(std::move(p));
      tape->g.push_back(g);
    }
  }
  // Repack to (out*spatial x N): row o*spatial+j = d y_o / d x_j.
  const int out = output_width();
  MatX packed(out * spatial, N);
  for (Index n = 0; n < N; ++n)
    for (int o = 0; o < out; ++o)
      for (int j = 0; j < spatial; ++j) packed(o * spatial + j, n) = g(o, n * spatial + j);
  grad_out = std::move(packed);
  return a;
}

MatX DenseNet::backward(const Tape& tape, const MatX& ybar, Grads* grads) const {
  const int L = layer_count();
  require(ybar.rows() == output_width() && ybar.cols() == tape.a.front().cols(),
          "DenseNet::backward: adjoint shape mismatch");
  MatX abar = ybar;
  for (int l = L - 1; l >= 0; --l) {
    MatX ubar;
    if (acts_[l] == Activation::Identity) {
      ubar = std::move(abar);
    } else {
      ubar = act_prime(acts_[l], beta_, tape.u[l]).cwiseProduct(abar);
    }
    if (grads) {
      grads->dW[l].noalias() += ubar * tape.a[l].transpose();
      grads->db[l].noalias() += ubar.rowwise().sum();
    }
    abar.noalias() = weights_[l].transpose() * ubar;
  }
  return abar;
}

MatX DenseNet::backward_grad(const GradTape& tape, const MatX& ybar, const MatX& gbar,
                             Grads* grads) const {
  const int L = layer_count();
  const Index N = tape.a.front().cols();
  const int s = tape.spatial;
  const int out = output_width();
  require(ybar.rows() == out && ybar.cols() == N, "DenseNet::backward_grad: ybar shape");
  require(gbar.rows() == out * s && gbar.cols() == N, "DenseNet::backward_grad: gbar shape");

  MatX abar = ybar;
  // Unpack gbar into the tape layout (out x s*N).
  MatX gbar_l(out, s * N);
  for (Index n = 0; n < N; ++n)
    for (int o = 0; o < out; ++o)
      for (int j = 0; j < s; ++j) gbar_l(o, n * s + j) = gbar(o * s + j, n);

  for (int l = L - 1; l >= 0; --l) {
    MatX ubar, pbar;
    if (acts_[l] == Activation::Identity) {
      ubar = std::move(abar);
      pbar = std::move(gbar_l);
    } else {
      const MatX phi1 = act_prime(acts_[l], beta_, tape.u[l]);
      const MatX phi2 = act_second(acts_[l], beta_, tape.u[l]);
      ubar = phi1.cwiseProduct(abar);
      pbar.resize(gbar_l.rows(), gbar_l.cols());
      for (Index n = 0; n < N; ++n) {
        auto gb = gbar_l.middleCols(n * s, s);
        auto pp = tape.p[l].middleCols(n * s, s);
        pbar.middleCols(n * s, s) = gb.array().colwise() * phi1.col(n).array();
        // d a / d u gets the curvature term from the jacobian path.
        ubar.col(n).array() +=
            phi2.col(n).array() * (gb.array() * pp.array()).rowwise().sum();
      }
    }
    if (grads) {
      grads->dW[l].noalias() += ubar * tape.a[l].transpose();
      grads->dW[l].noalias() += pbar * tape.g[l].transpose();
      grads->db[l].noalias() += ubar.rowwise().sum();
    }
    abar.noalias() = weights_[l].transpose() * ubar;
    gbar_l.noalias() = weights_[l].transpose() * pbar;
  }
  return abar;
}

VecX DenseNet::eval(const VecX& x) const { return forward(x); }

void DenseNet::eval_with_input_jac(const VecX& x, VecX& y, MatX& jac) const {
  MatX g;
  const MatX Y = forward_grad(x, input_width(), g);
  y = Y.col(0);
  const int out = output_width();
  const int in = input_width();
  jac.resize(out, in);
  for (int o = 0; o < out; ++o)
    for (int j = 0; j < in; ++j) jac(o, j) = g(o * in + j, 0);
}

}  // namespace nphm
