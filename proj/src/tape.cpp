// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/tape.hpp"

#include <string>

#include "lgest/error.hpp"

namespace lgest {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
    if (!value.all_finite()) {
        throw NumericError("tape: non-finite constant");
    }
    Node node;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor& param) {
    if (!param.all_finite()) {
        throw NumericError("tape: non-finite parameter");
    }
    Node node;
    node.value = Tensor(param.shape(), std::vector<double>(param.values().begin(), param.values().end()));
    node.needs_grad = param.requires_grad();
    node.sink = node.needs_grad ? &param : nullptr;
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op_name) {
    if (!value.all_finite()) {
        throw NumericError(std::string(op_name) + ": non-finite output");
    }
    Node node;
    node.value = std::move(value);
    for (const Var& in : inputs) {
        if (in.tape_ != this) {
            throw StateError(std::string(op_name) + ": input recorded on a different tape");
        }
        node.needs_grad = node.needs_grad || nodes_[in.id_].needs_grad;
    }
    if (node.needs_grad) {
        node.backward = std::move(backward);
    }
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var root) {
    if (root.tape_ != this) {
        throw StateError("tape: backward root belongs to another tape");
    }
    if (swept_) {
        throw StateError("tape: backward() already ran");
    }
    if (nodes_[root.id_].value.size() != 1) {
        throw DimensionError("tape: backward root must be a single element, got " +
                             to_string(nodes_[root.id_].value.shape()));
    }
    swept_ = true;
    if (!nodes_[root.id_].needs_grad) {
        return;
    }
    nodes_[root.id_].grad.assign(1, 1.0);
    for (std::size_t i = root.id_ + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (node.grad.empty()) {
            continue;
        }
        if (node.backward) {
            node.backward(node.grad, node.value);
        }
        if (node.sink != nullptr) {
            std::span<double> dst = node.sink->grad();
            for (std::size_t k = 0; k < dst.size(); ++k) {
                dst[k] += node.grad[k];
            }
        }
    }
}

void Tape::accumulate(Var v, std::span<const double> g) {
    Node& node = nodes_[v.id_];
    if (!node.needs_grad) {
        return;
    }
    if (node.grad.empty()) {
        node.grad.assign(g.begin(), g.end());
        return;
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        node.grad[k] += g[k];
    }
}

std::span<double> Tape::grad_buffer(Var v) {
    Node& node = nodes_[v.id_];
    if (node.grad.empty()) {
        node.grad.assign(node.value.size(), 0.0);
    }
    return node.grad;
}

std::span<const double> Tape::grad(Var v) const { return nodes_[v.id_].grad; }

} // namespace lgest
