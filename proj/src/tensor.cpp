// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "lgest/error.hpp"

namespace lgest {

std::size_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out += ",";
        }
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), values_(numel(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
    if (numel(shape_) != values_.size()) {
        throw DimensionError("tensor: shape " + to_string(shape_) + " holds " + std::to_string(numel(shape_)) +
                             " values, got " + std::to_string(values_.size()));
    }
}

Tensor Tensor::zeros(Shape shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.values_.begin(), t.values_.end(), value);
    return t;
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::from(Shape shape, std::initializer_list<double> values) {
    return Tensor(std::move(shape), std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw DimensionError("tensor: axis " + std::to_string(axis) + " out of range for shape " + to_string(shape_));
    }
    return shape_[axis];
}

double Tensor::item() const {
    if (values_.size() != 1) {
        throw DimensionError("tensor: item() on shape " + to_string(shape_));
    }
    return values_[0];
}

std::span<double> Tensor::grad() {
    if (!grad_) {
        grad_.emplace(values_.size(), 0.0);
    }
    return *grad_;
}

std::span<const double> Tensor::grad() const {
    if (!grad_) {
        throw StateError("tensor: gradient not allocated");
    }
    return *grad_;
}

void Tensor::zero_grad() {
    if (grad_) {
        std::fill(grad_->begin(), grad_->end(), 0.0);
    }
}

Tensor Tensor::reshaped(Shape shape) const {
    if (numel(shape) != values_.size()) {
        throw DimensionError("tensor: cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    return Tensor(std::move(shape), values_);
}

bool Tensor::all_finite() const noexcept {
    for (double v : values_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

} // namespace lgest
