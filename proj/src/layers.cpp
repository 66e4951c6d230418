// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/layers.hpp"

namespace lgest {

namespace {

std::optional<Var> bind_optional(Tape& tape, Tensor* t) {
    if (t == nullptr) {
        return std::nullopt;
    }
    return tape.parameter(*t);
}

} // namespace

Linear Linear::create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                      bool with_bias, Rng& rng) {
    Linear l;
    l.weight = &store.add(prefix + ".weight", uniform_init({in, out}, in, rng));
    if (with_bias) {
        l.bias = &store.add(prefix + ".bias", uniform_init({out}, in, rng));
    }
    return l;
}

Var Linear::operator()(Tape& tape, Var x) const {
    return linear(x, tape.parameter(*weight), bind_optional(tape, bias));
}

Conv2d Conv2d::create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                      std::size_t kernel, std::size_t stride, std::size_t padding, bool with_bias, Rng& rng) {
    Conv2d c;
    const std::size_t fan_in = in * kernel * kernel;
    c.weight = &store.add(prefix + ".weight", uniform_init({out, in, kernel, kernel}, fan_in, rng));
    if (with_bias) {
        c.bias = &store.add(prefix + ".bias", uniform_init({out}, fan_in, rng));
    }
    c.stride = stride;
    c.padding = padding;
    return c;
}

Var Conv2d::operator()(Tape& tape, Var x) const {
    return conv2d(x, tape.parameter(*weight), bind_optional(tape, bias), stride, padding);
}

Deconv2d Deconv2d::create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                          std::size_t kernel, std::size_t stride, std::size_t padding, bool with_bias, Rng& rng) {
    Deconv2d d;
    const std::size_t fan_in = in * kernel * kernel;
    d.weight = &store.add(prefix + ".weight", uniform_init({in, out, kernel, kernel}, fan_in, rng));
    if (with_bias) {
        d.bias = &store.add(prefix + ".bias", uniform_init({out}, fan_in, rng));
    }
    d.stride = stride;
    d.padding = padding;
    return d;
}

Var Deconv2d::operator()(Tape& tape, Var x) const {
    return deconv2d(x, tape.parameter(*weight), bind_optional(tape, bias), stride, padding);
}

BatchNorm2d BatchNorm2d::create(ParameterStore& store, const std::string& prefix, std::size_t channels) {
    BatchNorm2d bn;
    bn.gamma = &store.add(prefix + ".gamma", Tensor::full({channels}, 1.0));
    bn.beta = &store.add(prefix + ".beta", Tensor::zeros({channels}));
    bn.stats.running_mean = &store.add(prefix + ".running_mean", Tensor::zeros({channels}), false);
    bn.stats.running_var = &store.add(prefix + ".running_var", Tensor::full({channels}, 1.0), false);
    bn.stats.steps = &store.add(prefix + ".steps", Tensor::zeros({1}), false);
    return bn;
}

Var BatchNorm2d::operator()(Tape& tape, Var x, Mode mode) const {
    return batch_norm(x, tape.parameter(*gamma), tape.parameter(*beta), stats, mode);
}

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& prefix, std::size_t width) {
    LayerNorm ln;
    ln.gamma = &store.add(prefix + ".gamma", Tensor::full({width}, 1.0));
    ln.beta = &store.add(prefix + ".beta", Tensor::zeros({width}));
    return ln;
}

Var LayerNorm::operator()(Tape& tape, Var x) const {
    return layer_norm(x, tape.parameter(*gamma), tape.parameter(*beta));
}

} // namespace lgest
