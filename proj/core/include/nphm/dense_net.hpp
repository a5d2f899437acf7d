#pragma once

#include <string>
#include <vector>

#include "nphm/common.hpp"
#include "nphm/rng.hpp"

namespace nphm {

enum class Activation { Softplus, Identity };

/// Fully connected network. Layer l maps widths[l] -> widths[l+1] via
/// act[l](W[l] x + b[l]). Gradients are computed by reverse accumulation
/// through an explicit layer tape; spatial input gradients are carried
/// forward alongside activations so losses on the gradient (eikonal,
/// normal alignment) can be backpropagated as well.
class DenseNet {
 public:
  DenseNet() = default;

  /// Hidden layers use softplus(beta); the output layer is linear.
  static DenseNet mlp(int in, const std::vector<int>& hidden, int out, double beta = 100.0);

  int input_width() const { return widths_.empty() ? 0 : widths_.front(); }
  int output_width() const { return widths_.empty() ? 0 : widths_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  const std::vector<int>& widths() const { return widths_; }
  double beta() const { return beta_; }

  MatX& weight(int l) { return weights_[l]; }
  const MatX& weight(int l) const { return weights_[l]; }
  VecX& bias(int l) { return biases_[l]; }
  const VecX& bias(int l) const { return biases_[l]; }
  Activation activation(int l) const { return acts_[l]; }

  Index param_count() const;

  /// Per-layer uniform init in +-(1/sqrt(fan_in)).
  void init_uniform(Rng& rng);
  void set_zero();

  bool finite() const;

  // -- single-point conveniences -------------------------------------------

  VecX eval(const VecX& x) const;
  /// J has shape (out x in).
  void eval_with_input_jac(const VecX& x, VecX& y, MatX& jac) const;

  // -- batched evaluation with tapes ---------------------------------------

  /// Value-only tape: activations and pre-activations per layer.
  struct Tape {
    std::vector<MatX> a;  // a[0] = input (in x N), a[l+1] = post-activation
    std::vector<MatX> u;  // u[l] = pre-activation of layer l
  };

  /// Tape that additionally carries the Jacobian w.r.t. the leading
  /// `spatial` input dims. g[l] has shape (widths[l] x spatial*N), column
  /// block n*spatial+j holding d a_l[:,n] / d x_j.
  struct GradTape : Tape {
    std::vector<MatX> g;
    std::vector<MatX> p;  // p[l] = W[l] * g[l]
    int spatial = 0;
  };

  /// Parameter-gradient accumulators matching the layer shapes.
  struct Grads {
    std::vector<MatX> dW;
    std::vector<VecX> db;
    void init(const DenseNet& net);
    void zero();
  };

  /// X is (in x N); returns (out x N). Fills `tape` when non-null.
  MatX forward(const MatX& X, Tape* tape = nullptr) const;

  /// Forward pass carrying d/dx for the leading `spatial` dims.
  /// Returns Y (out x N); `grad_out` gets shape (out*spatial x N) with
  /// row o*spatial+j = d y_o / d x_j.
  MatX forward_grad(const MatX& X, int spatial, MatX& grad_out, GradTape* tape = nullptr) const;

  /// VJP: given dL/dY, accumulates parameter grads and returns dL/dX.
  MatX backward(const Tape& tape, const MatX& ybar, Grads* grads) const;

  /// VJP through the joint (value, spatial-gradient) computation.
  /// gbar has shape (out*spatial x N) matching forward_grad's grad_out.
  MatX backward_grad(const GradTape& tape, const MatX& ybar, const MatX& gbar,
                     Grads* grads) const;

 private:
  std::vector<int> widths_;
  std::vector<MatX> weights_;
  std::vector<VecX> biases_;
  std::vector<Activation> acts_;
  double beta_ = 100.0;
};

}  // namespace nphm
