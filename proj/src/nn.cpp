#include "pae/nn.hpp"

#include <cmath>

#include "pae/errors.hpp"

namespace pae {

Mlp::Mlp(std::size_t in_dim, std::size_t out_dim, std::size_t hidden_count, std::size_t hidden_width, Rng* rng,
         std::string name)
    : name_(std::move(name)) {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("Mlp: zero input or output dim");
    if (hidden_count > 0 && hidden_width == 0) throw ConfigError("Mlp: zero hidden width");

    std::vector<std::size_t> sizes;
    sizes.push_back(in_dim);
    for (std::size_t i = 0; i < hidden_count; ++i) sizes.push_back(hidden_width);
    sizes.push_back(out_dim);

    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
        Tensor w({fan_out, fan_in});
        if (rng) {
            const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng->uniform(-bound, bound);
        }
        layers_.push_back(DenseLayer{parameter(std::move(w)), parameter(Tensor({fan_out})), fan_in, fan_out});
    }
}

Var Mlp::forward(const Var& x) const {
    if (layers_.empty()) throw UsageError("Mlp::forward on an empty network");
    Var h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const std::string label = name_.empty() ? "layer " + std::to_string(l) : name_ + " layer " + std::to_string(l);
        h = linear(h, layers_[l].weights, layers_[l].bias, label);
        if (l + 1 < layers_.size()) h = selu(h);
    }
    return h;
}

Tensor Mlp::forward(const Tensor& x) const { return forward(constant(x))->value; }

std::vector<Var> Mlp::parameters() const {
    std::vector<Var> out;
    out.reserve(layers_.size() * 2);
    for (const DenseLayer& l : layers_) {
        out.push_back(l.weights);
        out.push_back(l.bias);
    }
    return out;
}

std::vector<Var> Mlp::weight_parameters() const {
    std::vector<Var> out;
    out.reserve(layers_.size());
    for (const DenseLayer& l : layers_) out.push_back(l.weights);
    return out;
}

std::vector<std::size_t> Mlp::layer_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.push_back(layers_.front().in_dim);
    for (const DenseLayer& l : layers_) sizes.push_back(l.out_dim);
    return sizes;
}

double selu(double x) { return selu_scalar(x); }

double bce_with_logits_value(const Tensor& logits, const Tensor& targets) {
    if (logits.shape() != targets.shape()) throw ShapeError("bce_with_logits: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0, e = logits.size(); i < e; ++i)
        acc += stable_softplus(logits[i]) - targets[i] * logits[i];
    return acc / static_cast<double>(logits.size());
}

}  // namespace pae
