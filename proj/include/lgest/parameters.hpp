// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lgest/rng.hpp"
#include "lgest/tensor.hpp"

namespace lgest {

/// Named tensors owned by a model, kept in registration order.
///
/// Trainable entries have requires_grad set; buffers (BatchNorm running
/// statistics) are stored alongside so a checkpoint captures the full state.
/// Addresses are stable for the lifetime of the store.
class ParameterStore {
public:
    ParameterStore() = default;
    ParameterStore(const ParameterStore&) = delete;
    ParameterStore& operator=(const ParameterStore&) = delete;
    ParameterStore(ParameterStore&&) noexcept = default;
    ParameterStore& operator=(ParameterStore&&) noexcept = default;

    Tensor& add(const std::string& name, Tensor value, bool trainable = true);

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }

    std::vector<Tensor*> trainable();
    void zero_grad();
    /// Number of trainable scalars.
    std::size_t parameter_count() const;

private:
    std::vector<std::string> names_;
    std::vector<std::unique_ptr<Tensor>> tensors_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Uniform in ±sqrt(1 / fan_in), drawn in row-major order from `rng`.
Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng);

} // namespace lgest
