// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lgest {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of 64-bit floats with an optional gradient buffer.
///
/// Tensors are plain values. The autograd tape copies them into its nodes;
/// parameters live in a ParameterStore and are mutated only by the optimizer.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);
    static Tensor from(Shape shape, std::initializer_list<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Value of a single-element tensor.
    double item() const;

    bool requires_grad() const noexcept { return requires_grad_; }
    void set_requires_grad(bool flag) noexcept { requires_grad_ = flag; }

    bool has_grad() const noexcept { return grad_.has_value(); }
    /// Gradient buffer, allocated (zero-filled) on first access.
    std::span<double> grad();
    std::span<const double> grad() const;
    void zero_grad();
    void clear_grad() noexcept { grad_.reset(); }

    /// Same values under a new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    bool all_finite() const noexcept;

private:
    Shape shape_;
    std::vector<double> values_;
    bool requires_grad_ = false;
    std::optional<std::vector<double>> grad_;
};

} // namespace lgest
