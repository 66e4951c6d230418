// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "lgest/tensor.hpp"

namespace lgest {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t dim(std::size_t axis) const { return value().dim(axis); }
    std::size_t size() const { return value().size(); }
    bool requires_grad() const;

    Tape& tape() const { return *tape_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Linear record of a forward computation, replayed in reverse by backward().
///
/// Nodes are appended in execution order, so every node's inputs precede it.
/// Leaves created with parameter() are bound to an external tensor and deposit
/// their gradient into that tensor's grad buffer when backward() reaches them.
class Tape {
public:
    /// Receives the gradient of the loss w.r.t. the node's output, and that output.
    using BackwardFn = std::function<void(std::span<const double> out_grad, const Tensor& out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Leaf bound to `param`; requires_grad follows param.requires_grad().
    Var parameter(Tensor& param);

    /// Appends an operation node. Throws NumericError on non-finite output.
    /// `backward` is only kept when at least one input requires grad.
    Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op_name);

    /// Reverse sweep from a single-element root. May be called once per tape.
    void backward(Var root);

    /// Adds `g` into the gradient of `v`; no-op when `v` does not require grad.
    void accumulate(Var v, std::span<const double> g);
    /// Mutable gradient buffer of `v` (zero-allocated on first use).
    std::span<double> grad_buffer(Var v);
    /// Gradient of `v` after backward(); empty when no gradient reached it.
    std::span<const double> grad(Var v) const;

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].needs_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        BackwardFn backward;
        Tensor* sink = nullptr;
        bool needs_grad = false;
        std::vector<double> grad;
    };

    std::deque<Node> nodes_;
    bool swept_ = false;
};

} // namespace lgest
