#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pae/tensor.hpp"

namespace pae {

/// One recorded value in the computation graph. Nodes are created by the op
/// builders below; parameters are long-lived nodes that accumulate gradients
/// across backward() calls until zero_grad().
class Node {
  public:
    Tensor value;
    Tensor grad;  // allocated lazily, same shape as value
    bool requires_grad = false;

    void ensure_grad();
    void zero_grad();

    // graph wiring (populated by op builders; empty on pruned/constant nodes)
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backprop;
};

using Var = std::shared_ptr<Node>;

/// Leaf that never receives gradients (inputs, channel noise, targets).
Var constant(Tensor value);

/// Trainable leaf; gradients accumulate in node->grad.
Var parameter(Tensor value);

// ---- differentiable primitives -------------------------------------------

/// Affine map on the trailing axis: x (..., in) -> (..., out) with
/// weights (out, in) and bias (out). `label` names the layer in shape errors.
Var linear(const Var& x, const Var& weights, const Var& bias, std::string_view label = {});

/// Scaled exponential linear unit, elementwise.
Var selu(const Var& x);

Var reshape(const Var& x, Shape new_shape);
Var permute(const Var& x, std::vector<std::size_t> axes);
Var concat(const Var& a, const Var& b, std::size_t axis);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);

/// Elementwise multiply / add by a constant tensor (fading gain, noise).
Var cmul(const Var& x, Tensor gain);
Var cadd(const Var& x, Tensor offset);

/// Multiply by a compile-time-ish scalar constant.
Var scale(const Var& x, double s);

/// Per-example power normalization: each axis-0 slice c is mapped to
/// sqrt(m) * c / ||c||_2 where m is the slice's element count, so the mean
/// squared value per entry is 1. Throws DegenerateInputError on a zero slice.
Var power_normalize(const Var& x);

/// Mean over all elements of softplus(logit) - target*logit (the numerically
/// stable binary cross-entropy with logits). Targets must be exactly 0 or 1.
Var bce_with_logits(const Var& logits, Tensor targets);

/// Sum of all elements -> scalar.
Var sum(const Var& x);

/// Sum of squared elements -> scalar (l2 penalty building block).
Var sum_squares(const Var& x);

// ---- reverse pass ---------------------------------------------------------

/// Propagate d(loss)/d(node) into every contributing node's grad. `loss` must
/// be scalar and part of a graph with at least one parameter; the seed is the
/// incoming gradient (1/L during gradient accumulation).
void backward(const Var& loss, double seed = 1.0);

void zero_grads(const std::vector<Var>& params);

// scalar helpers shared with plain (non-graph) code paths
double selu_scalar(double x);
double selu_scalar_grad(double x);
double stable_softplus(double x);
double sigmoid(double x);

/// SELU constants (standard published values).
inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

}  // namespace pae
