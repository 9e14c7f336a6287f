#include "pae/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "pae/errors.hpp"

namespace pae {

void Node::ensure_grad() {
    if (grad.empty()) grad = Tensor::zeros(value.shape());
}

void Node::zero_grad() {
    if (!grad.empty()) grad.fill(0.0);
}

Var constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return n;
}

Var parameter(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = true;
    return n;
}

namespace {

Var make_op(Tensor value, std::vector<Var> parents, const std::function<void(Node&)>& bind_backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (const Var& p : parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        bind_backprop(*n);
    }
    return n;
}

void accumulate(const Var& target, const Tensor& g) {
    if (!target->requires_grad) return;
    target->ensure_grad();
    double* dst = target->grad.data();
    const double* src = g.data();
    for (std::size_t i = 0, e = g.size(); i < e; ++i) dst[i] += src[i];
}

}  // namespace

double selu_scalar(double x) {
    return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
}

double selu_scalar_grad(double x) {
    return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
}

double stable_softplus(double x) {
    // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Var linear(const Var& x, const Var& weights, const Var& bias, std::string_view label) {
    const Tensor& xv = x->value;
    const Tensor& wv = weights->value;
    const Tensor& bv = bias->value;
    if (wv.rank() != 2 || bv.rank() != 1 || bv.dim(0) != wv.dim(0))
        throw ShapeError("linear" + (label.empty() ? std::string{} : " [" + std::string(label) + "]") +
                         ": weights must be (out,in) with matching bias");
    const std::size_t in = wv.dim(1), out = wv.dim(0);
    if (xv.rank() == 0 || xv.shape().back() != in)
        throw ShapeError("linear" + (label.empty() ? std::string{} : " [" + std::string(label) + "]") +
                         ": input trailing axis " + shape_to_string(xv.shape()) + " does not match expected in_dim " +
                         std::to_string(in));
    const std::size_t rows = xv.size() / in;

    Shape out_shape = xv.shape();
    out_shape.back() = out;
    Tensor y(out_shape);
    const double* xp = xv.data();
    const double* wp = wv.data();
    const double* bp = bv.data();
    double* yp = y.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = xp + r * in;
        double* yr = yp + r * out;
        for (std::size_t o = 0; o < out; ++o) {
            const double* wr = wp + o * in;
            double acc = bp[o];
            for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
            yr[o] = acc;
        }
    }

    return make_op(std::move(y), {x, weights, bias}, [x, weights, bias, rows, in, out](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x, weights, bias, rows, in, out]() {
            const double* gy = sp->grad.data();
            const double* xp = x->value.data();
            const double* wp = weights->value.data();
            if (x->requires_grad) {
                x->ensure_grad();
                double* gx = x->grad.data();
                for (std::size_t r = 0; r < rows; ++r) {
                    const double* gyr = gy + r * out;
                    double* gxr = gx + r * in;
                    for (std::size_t o = 0; o < out; ++o) {
                        const double g = gyr[o];
                        const double* wr = wp + o * in;
                        for (std::size_t i = 0; i < in; ++i) gxr[i] += g * wr[i];
                    }
                }
            }
            if (weights->requires_grad) {
                weights->ensure_grad();
                double* gw = weights->grad.data();
                for (std::size_t r = 0; r < rows; ++r) {
                    const double* gyr = gy + r * out;
                    const double* xr = xp + r * in;
                    for (std::size_t o = 0; o < out; ++o) {
                        const double g = gyr[o];
                        double* gwr = gw + o * in;
                        for (std::size_t i = 0; i < in; ++i) gwr[i] += g * xr[i];
                    }
                }
            }
            if (bias->requires_grad) {
                bias->ensure_grad();
                double* gb = bias->grad.data();
                for (std::size_t r = 0; r < rows; ++r) {
                    const double* gyr = gy + r * out;
                    for (std::size_t o = 0; o < out; ++o) gb[o] += gyr[o];
                }
            }
        };
    });
}

Var selu(const Var& x) {
    Tensor y(x->value.shape());
    const double* xp = x->value.data();
    double* yp = y.data();
    for (std::size_t i = 0, e = y.size(); i < e; ++i) yp[i] = selu_scalar(xp[i]);
    return make_op(std::move(y), {x}, [x](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x]() {
            if (!x->requires_grad) return;
            x->ensure_grad();
            const double* gy = sp->grad.data();
            const double* xp = x->value.data();
            double* gx = x->grad.data();
            for (std::size_t i = 0, e = sp->grad.size(); i < e; ++i) gx[i] += gy[i] * selu_scalar_grad(xp[i]);
        };
    });
}

Var reshape(const Var& x, Shape new_shape) {
    Tensor y = x->value.reshaped(std::move(new_shape));
    return make_op(std::move(y), {x}, [x](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x]() {
            if (!x->requires_grad) return;
            x->ensure_grad();
            const double* gy = sp->grad.data();
            double* gx = x->grad.data();
            for (std::size_t i = 0, e = sp->grad.size(); i < e; ++i) gx[i] += gy[i];
        };
    });
}

Var permute(const Var& x, std::vector<std::size_t> axes) {
    Tensor y = x->value.permuted(axes);
    return make_op(std::move(y), {x}, [x, axes = std::move(axes)](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x, axes]() {
            if (!x->requires_grad) return;
            // inverse permutation routes the gradient back
            std::vector<std::size_t> inverse(axes.size());
            for (std::size_t i = 0; i < axes.size(); ++i) inverse[axes[i]] = i;
            accumulate(x, sp->grad.permuted(inverse));
        };
    });
}

Var concat(const Var& a, const Var& b, std::size_t axis) {
    Tensor y = concat(a->value, b->value, axis);
    const std::size_t la = a->value.shape()[axis];
    const std::size_t lb = b->value.shape()[axis];
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= a->value.shape()[i];
    for (std::size_t i = axis + 1; i < a->value.rank(); ++i) inner *= a->value.shape()[i];
    return make_op(std::move(y), {a, b}, [a, b, la, lb, outer, inner](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, a, b, la, lb, outer, inner]() {
            const double* gy = sp->grad.data();
            if (a->requires_grad) {
                a->ensure_grad();
                double* ga = a->grad.data();
                for (std::size_t o = 0; o < outer; ++o) {
                    const double* src = gy + o * (la + lb) * inner;
                    double* dst = ga + o * la * inner;
                    for (std::size_t i = 0; i < la * inner; ++i) dst[i] += src[i];
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                double* gb = b->grad.data();
                for (std::size_t o = 0; o < outer; ++o) {
                    const double* src = gy + o * (la + lb) * inner + la * inner;
                    double* dst = gb + o * lb * inner;
                    for (std::size_t i = 0; i < lb * inner; ++i) dst[i] += src[i];
                }
            }
        };
    });
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
}

}  // namespace

Var add(const Var& a, const Var& b) {
    check_same_shape(a->value, b->value, "add");
    Tensor y(a->value.shape());
    for (std::size_t i = 0, e = y.size(); i < e; ++i) y[i] = a->value[i] + b->value[i];
    return make_op(std::move(y), {a, b}, [a, b](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, a, b]() {
            accumulate(a, sp->grad);
            accumulate(b, sp->grad);
        };
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a->value, b->value, "sub");
    Tensor y(a->value.shape());
    for (std::size_t i = 0, e = y.size(); i < e; ++i) y[i] = a->value[i] - b->value[i];
    return make_op(std::move(y), {a, b}, [a, b](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, a, b]() {
            accumulate(a, sp->grad);
            if (!b->requires_grad) return;
            b->ensure_grad();
            const double* gy = sp->grad.data();
            double* gb = b->grad.data();
            for (std::size_t i = 0, e = sp->grad.size(); i < e; ++i) gb[i] -= gy[i];
        };
    });
}

Var cmul(const Var& x, Tensor gain) {
    check_same_shape(x->value, gain, "cmul");
    Tensor y(x->value.shape());
    for (std::size_t i = 0, e = y.size(); i < e; ++i) y[i] = x->value[i] * gain[i];
    return make_op(std::move(y), {x}, [x, gain = std::move(gain)](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x, gain]() {
            if (!x->requires_grad) return;
            x->ensure_grad();
            const double* gy = sp->grad.data();
            double* gx = x->grad.data();
            for (std::size_t i = 0, e = sp->grad.size(); i < e; ++i) gx[i] += gy[i] * gain[i];
        };
    });
}

Var cadd(const Var& x, Tensor offset) {
    check_same_shape(x->value, offset, "cadd");
    Tensor y(x->value.shape());
    for (std::size_t i = 0, e = y.size(); i < e; ++i) y[i] = x->value[i] + offset[i];
    return make_op(std::move(y), {x}, [x](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x]() { accumulate(x, sp->grad); };
    });
}

Var scale(const Var& x, double s) {
    Tensor y(x->value.shape());
    for (std::size_t i = 0, e = y.size(); i < e; ++i) y[i] = x->value[i] * s;
    return make_op(std::move(y), {x}, [x, s](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x, s]() {
            if (!x->requires_grad) return;
            x->ensure_grad();
            const double* gy = sp->grad.data();
            double* gx = x->grad.data();
            for (std::size_t i = 0, e = sp->grad.size(); i < e; ++i) gx[i] += gy[i] * s;
        };
    });
}

Var power_normalize(const Var& x) {
    const Tensor& xv = x->value;
    if (xv.rank() < 2) throw ShapeError("power_normalize: expected a batch tensor (rank >= 2)");
    const std::size_t batch = xv.dim(0);
    const std::size_t m = xv.size() / batch;
    Tensor y(xv.shape());
    std::vector<double> norms(batch);
    const double target = std::sqrt(static_cast<double>(m));
    for (std::size_t r = 0; r < batch; ++r) {
        const double* xr = xv.data() + r * m;
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) ss += xr[i] * xr[i];
        const double norm = std::sqrt(ss);
        if (norm == 0.0) throw DegenerateInputError("power_normalize: zero-power input at batch row " + std::to_string(r));
        norms[r] = norm;
        const double s = target / norm;
        double* yr = y.data() + r * m;
        for (std::size_t i = 0; i < m; ++i) yr[i] = xr[i] * s;
    }
    return make_op(std::move(y), {x}, [x, norms = std::move(norms), batch, m, target](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x, norms, batch, m, target]() {
            if (!x->requires_grad) return;
            x->ensure_grad();
            const double* gy = sp->grad.data();
            const double* xp = x->value.data();
            double* gx = x->grad.data();
            for (std::size_t r = 0; r < batch; ++r) {
                const double* gr = gy + r * m;
                const double* xr = xp + r * m;
                double* gxr = gx + r * m;
                const double norm = norms[r];
                const double s = target / norm;
                double dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += gr[i] * xr[i];
                const double proj = dot / (norm * norm);
                for (std::size_t i = 0; i < m; ++i) gxr[i] += s * (gr[i] - proj * xr[i]);
            }
        };
    });
}

Var bce_with_logits(const Var& logits, Tensor targets) {
    check_same_shape(logits->value, targets, "bce_with_logits");
    for (std::size_t i = 0, e = targets.size(); i < e; ++i)
        if (targets[i] != 0.0 && targets[i] != 1.0)
            throw UsageError("bce_with_logits: targets must be exactly 0 or 1");
    const std::size_t n = targets.size();
    const double* zp = logits->value.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += stable_softplus(zp[i]) - targets[i] * zp[i];
    Tensor y = Tensor::scalar(acc / static_cast<double>(n));
    return make_op(std::move(y), {logits}, [logits, targets = std::move(targets), n](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, logits, targets, n]() {
            if (!logits->requires_grad) return;
            logits->ensure_grad();
            const double g = sp->grad[0] / static_cast<double>(n);
            const double* zp = logits->value.data();
            double* gz = logits->grad.data();
            for (std::size_t i = 0; i < n; ++i) gz[i] += g * (sigmoid(zp[i]) - targets[i]);
        };
    });
}

Var sum(const Var& x) {
    double acc = 0.0;
    for (std::size_t i = 0, e = x->value.size(); i < e; ++i) acc += x->value[i];
    return make_op(Tensor::scalar(acc), {x}, [x](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x]() {
            if (!x->requires_grad) return;
            x->ensure_grad();
            const double g = sp->grad[0];
            double* gx = x->grad.data();
            for (std::size_t i = 0, e = x->value.size(); i < e; ++i) gx[i] += g;
        };
    });
}

Var sum_squares(const Var& x) {
    double acc = 0.0;
    for (std::size_t i = 0, e = x->value.size(); i < e; ++i) acc += x->value[i] * x->value[i];
    return make_op(Tensor::scalar(acc), {x}, [x](Node& self) {
        Node* sp = &self;
        self.backprop = [sp, x]() {
            if (!x->requires_grad) return;
            x->ensure_grad();
            const double g = sp->grad[0];
            const double* xp = x->value.data();
            double* gx = x->grad.data();
            for (std::size_t i = 0, e = x->value.size(); i < e; ++i) gx[i] += 2.0 * g * xp[i];
        };
    });
}

void backward(const Var& loss, double seed) {
    if (!loss) throw UsageError("backward: null loss node");
    if (loss->value.size() != 1) throw UsageError("backward: loss must be scalar");
    if (!loss->requires_grad)
        throw UsageError("backward: no trainable parameters contributed to this value (was forward recorded?)");

    // iterative post-order DFS -> topological order
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    visited.insert(loss.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss->ensure_grad();
    loss->grad[0] += seed;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop();
}

void zero_grads(const std::vector<Var>& params) {
    for (const Var& p : params) p->zero_grad();
}

}  // namespace pae
