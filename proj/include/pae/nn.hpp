#pragma once

#include <string>
#include <vector>

#include "pae/autodiff.hpp"
#include "pae/rng.hpp"
#include "pae/tensor.hpp"

namespace pae {

/// One affine layer: weights (out_dim x in_dim) and bias (out_dim), held as
/// trainable graph parameters.
struct DenseLayer {
    Var weights;
    Var bias;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
};

/// Fully-connected stack: SELU after every hidden layer, no activation after
/// the output layer. Hidden layers all share one width.
class Mlp {
  public:
    Mlp() = default;

    /// Random init: weights uniform in +/- sqrt(1/in_dim), biases zero.
    /// A null rng yields an all-zero network (placeholder for loading).
    Mlp(std::size_t in_dim, std::size_t out_dim, std::size_t hidden_count, std::size_t hidden_width, Rng* rng,
        std::string name = {});

    Var forward(const Var& x) const;
    Tensor forward(const Tensor& x) const;

    std::size_t input_dim() const { return layers_.front().in_dim; }
    std::size_t output_dim() const { return layers_.back().out_dim; }
    std::size_t hidden_count() const { return layers_.size() - 1; }
    const std::string& name() const { return name_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    /// Every weight/bias Var, layer order, weights before bias.
    std::vector<Var> parameters() const;
    /// Weight matrices only (l2 penalty target).
    std::vector<Var> weight_parameters() const;

    /// [in_dim, hidden..., out_dim]
    std::vector<std::size_t> layer_sizes() const;

  private:
    std::vector<DenseLayer> layers_;
    std::string name_;
};

/// Plain scalar SELU (the activation used on all hidden layers).
double selu(double x);

/// Plain binary cross-entropy with logits (stable form), mean over elements.
double bce_with_logits_value(const Tensor& logits, const Tensor& targets);

}  // namespace pae
