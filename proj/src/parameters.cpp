// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/parameters.hpp"

#include <cmath>

#include "lgest/error.hpp"

namespace lgest {

Tensor& ParameterStore::add(const std::string& name, Tensor value, bool trainable) {
    if (contains(name)) {
        throw ConfigError("parameter store: duplicate name '" + name + "'");
    }
    value.set_requires_grad(trainable);
    index_.emplace(name, names_.size());
    names_.push_back(name);
    tensors_.push_back(std::make_unique<Tensor>(std::move(value)));
    return *tensors_.back();
}

Tensor& ParameterStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ConfigError("parameter store: unknown name '" + name + "'");
    }
    return *tensors_[it->second];
}

const Tensor& ParameterStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ConfigError("parameter store: unknown name '" + name + "'");
    }
    return *tensors_[it->second];
}

std::vector<Tensor*> ParameterStore::trainable() {
    std::vector<Tensor*> out;
    for (auto& t : tensors_) {
        if (t->requires_grad()) {
            out.push_back(t.get());
        }
    }
    return out;
}

void ParameterStore::zero_grad() {
    for (auto& t : tensors_) {
        t->zero_grad();
    }
}

std::size_t ParameterStore::parameter_count() const {
    std::size_t count = 0;
    for (const auto& t : tensors_) {
        if (t->requires_grad()) {
            count += t->size();
        }
    }
    return count;
}

Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng) {
    if (fan_in == 0) {
        throw ConfigError("uniform_init: fan_in must be positive");
    }
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    Tensor t(std::move(shape));
    for (double& v : t.values()) {
        v = rng.uniform(-bound, bound);
    }
    return t;
}

} // namespace lgest
