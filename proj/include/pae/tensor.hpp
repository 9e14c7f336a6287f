#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace pae {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::vector<std::size_t> row_major_strides(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense multi-axis array of 64-bit reals, row-major. The single value
/// carrier for messages, codewords, activations and gradients.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape shape);  // zero-filled
    Tensor(Shape shape, std::vector<double> data);
    Tensor(Shape shape, std::initializer_list<double> data);

    static Tensor scalar(double v);
    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double v);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const;
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;
    double& at(std::size_t a, std::size_t b, std::size_t c);
    double at(std::size_t a, std::size_t b, std::size_t c) const;

    /// Same data, new shape (element counts must match). Row-major order of
    /// the flat data is preserved exactly.
    Tensor reshaped(Shape new_shape) const;

    /// Axis reordering: out.shape[i] = shape[axes[i]],
    /// out(j0,..) = in(j_{axes...}). `axes` must be a permutation of 0..rank-1.
    Tensor permuted(const std::vector<std::size_t>& axes) const;

    void fill(double v);
    bool all_finite() const;

  private:
    Shape shape_;
    std::vector<double> data_;
};

/// Concatenate along `axis`; all other axes must agree.
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);

}  // namespace pae
