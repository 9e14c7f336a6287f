#include "pae/tensor.hpp"

#include <cmath>
#include <string>

#include "pae/errors.hpp"

namespace pae {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::vector<std::size_t> row_major_strides(const Shape& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
    return strides;
}

std::string shape_to_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

namespace {

void check_shape_valid(const Shape& shape) {
    for (std::size_t d : shape)
        if (d == 0) throw ShapeError("tensor axis lengths must be positive, got " + shape_to_string(shape));
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {
    check_shape_valid(shape_);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape_valid(shape_);
    if (shape_numel(shape_) != data_.size())
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
}

Tensor::Tensor(Shape shape, std::initializer_list<double> data)
    : Tensor(std::move(shape), std::vector<double>(data)) {}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(Shape shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(Shape shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_to_string(shape_));
    return shape_[axis];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    return data_[r * shape_[1] + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
}

double& Tensor::at(std::size_t a, std::size_t b, std::size_t c) {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
}

double Tensor::at(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
}

Tensor Tensor::reshaped(Shape new_shape) const {
    if (shape_numel(new_shape) != data_.size())
        throw ShapeError("reshape " + shape_to_string(shape_) + " -> " + shape_to_string(new_shape) +
                         " changes element count");
    return Tensor(std::move(new_shape), data_);
}

Tensor Tensor::permuted(const std::vector<std::size_t>& axes) const {
    const std::size_t r = rank();
    if (axes.size() != r) throw ShapeError("permute axes count != tensor rank");
    std::vector<bool> seen(r, false);
    Shape out_shape(r);
    for (std::size_t i = 0; i < r; ++i) {
        if (axes[i] >= r || seen[axes[i]]) throw ShapeError("permute axes must be a permutation of 0..rank-1");
        seen[axes[i]] = true;
        out_shape[i] = shape_[axes[i]];
    }
    Tensor out(out_shape);
    const auto in_strides = row_major_strides(shape_);
    const auto out_strides = row_major_strides(out_shape);
    // walk output positions in order, gather from input
    std::vector<std::size_t> idx(r, 0);
    const std::size_t total = data_.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t src = 0;
        for (std::size_t i = 0; i < r; ++i) src += idx[i] * in_strides[axes[i]];
        out.data()[flat] = data_[src];
        for (std::size_t i = r; i-- > 0;) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    return out;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
    if (a.rank() != b.rank()) throw ShapeError("concat: rank mismatch");
    const std::size_t r = a.rank();
    if (axis >= r) throw ShapeError("concat: axis out of range");
    for (std::size_t i = 0; i < r; ++i)
        if (i != axis && a.shape()[i] != b.shape()[i])
            throw ShapeError("concat: shapes " + shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()) +
                             " differ outside axis " + std::to_string(axis));
    Shape out_shape = a.shape();
    out_shape[axis] += b.shape()[axis];
    Tensor out(out_shape);

    // views as (outer, axis_len, inner)
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= a.shape()[i];
    for (std::size_t i = axis + 1; i < r; ++i) inner *= a.shape()[i];
    const std::size_t la = a.shape()[axis], lb = b.shape()[axis];
    for (std::size_t o = 0; o < outer; ++o) {
        double* dst = out.data() + o * (la + lb) * inner;
        const double* pa = a.data() + o * la * inner;
        const double* pb = b.data() + o * lb * inner;
        for (std::size_t i = 0; i < la * inner; ++i) dst[i] = pa[i];
        for (std::size_t i = 0; i < lb * inner; ++i) dst[la * inner + i] = pb[i];
    }
    return out;
}

}  // namespace pae
