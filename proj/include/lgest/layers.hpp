// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "lgest/ops.hpp"
#include "lgest/parameters.hpp"

// Thin parameter holders. Each registers its tensors in a ParameterStore
// under `prefix` and binds them onto the tape at every forward call.
namespace lgest {

struct Linear {
    Tensor* weight = nullptr; // [in x out]
    Tensor* bias = nullptr;   // [out] or null

    static Linear create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                         bool with_bias, Rng& rng);
    Var operator()(Tape& tape, Var x) const;
};

struct Conv2d {
    Tensor* weight = nullptr; // [out x in x k x k]
    Tensor* bias = nullptr;
    std::size_t stride = 1;
    std::size_t padding = 0;

    static Conv2d create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                         std::size_t kernel, std::size_t stride, std::size_t padding, bool with_bias, Rng& rng);
    Var operator()(Tape& tape, Var x) const;
};

struct Deconv2d {
    Tensor* weight = nullptr; // [in x out x k x k]
    Tensor* bias = nullptr;
    std::size_t stride = 1;
    std::size_t padding = 0;

    static Deconv2d create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                           std::size_t kernel, std::size_t stride, std::size_t padding, bool with_bias, Rng& rng);
    Var operator()(Tape& tape, Var x) const;
};

struct BatchNorm2d {
    Tensor* gamma = nullptr;
    Tensor* beta = nullptr;
    BatchNormStats stats;

    static BatchNorm2d create(ParameterStore& store, const std::string& prefix, std::size_t channels);
    Var operator()(Tape& tape, Var x, Mode mode) const;
};

struct LayerNorm {
    Tensor* gamma = nullptr;
    Tensor* beta = nullptr;

    static LayerNorm create(ParameterStore& store, const std::string& prefix, std::size_t width);
    Var operator()(Tape& tape, Var x) const;
};

} // namespace lgest
