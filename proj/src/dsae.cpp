// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/dsae.hpp"

#include "lgest/error.hpp"

namespace lgest {

namespace {

constexpr std::size_t kStemLayers = 3;
constexpr std::size_t kCoderKernel = 3;

} // namespace

void DsaeConfig::validate() const {
    if (in_channels == 0 || stem_channels == 0) {
        throw ConfigError("dsae: channel counts must be positive");
    }
    if (depth < 1) {
        throw ConfigError("dsae: depth must be at least 1");
    }
    if (depth >= 32 || stem_channels % (std::size_t{1} << depth) != 0) {
        throw ConfigError("dsae: stem_channels " + std::to_string(stem_channels) + " is not divisible by 2^" +
                          std::to_string(depth));
    }
    if (kernel_size % 2 == 0) {
        throw ConfigError("dsae: stem kernel size must be odd");
    }
}

std::vector<std::size_t> channel_schedule(const DsaeConfig& config) {
    config.validate();
    std::vector<std::size_t> schedule{config.stem_channels};
    for (std::size_t i = 0; i < config.depth; ++i) {
        schedule.push_back(schedule.back() / 2);
    }
    return schedule;
}

Dsae::Dsae(ParameterStore& store, const std::string& prefix, const DsaeConfig& config, Rng& rng) : config_(config) {
    const std::vector<std::size_t> schedule = channel_schedule(config_);
    std::size_t in = config_.in_channels;
    for (std::size_t i = 0; i < kStemLayers; ++i) {
        const std::string name = prefix + ".stem" + std::to_string(i);
        stem_.push_back({Conv2d::create(store, name + ".conv", in, config_.stem_channels, config_.kernel_size, 1,
                                        config_.kernel_size / 2, false, rng),
                         BatchNorm2d::create(store, name + ".bn", config_.stem_channels)});
        in = config_.stem_channels;
    }
    for (std::size_t i = 0; i < config_.depth; ++i) {
        const std::string name = prefix + ".encoder" + std::to_string(i);
        encoder_.push_back({Conv2d::create(store, name + ".conv", schedule[i], schedule[i + 1], kCoderKernel, 1,
                                           kCoderKernel / 2, false, rng),
                            BatchNorm2d::create(store, name + ".bn", schedule[i + 1])});
    }
    for (std::size_t i = config_.depth; i > 0; --i) {
        const std::string name = prefix + ".decoder" + std::to_string(config_.depth - i);
        decoder_.push_back({Deconv2d::create(store, name + ".deconv", schedule[i], schedule[i - 1], kCoderKernel, 1,
                                             kCoderKernel / 2, false, rng),
                            BatchNorm2d::create(store, name + ".bn", schedule[i - 1])});
    }
}

DsaeOutput Dsae::forward(Tape& tape, Var x, Mode mode) const {
    if (x.value().rank() != 4 || x.dim(1) != config_.in_channels) {
        throw DimensionError("dsae: expected [N x " + std::to_string(config_.in_channels) + " x S x S] input, got " +
                             to_string(x.shape()));
    }
    Var h = x;
    for (const ConvStage& s : stem_) {
        h = leaky_relu(s.norm(tape, s.conv(tape, h), mode));
    }
    DsaeOutput out;
    out.features = h;
    for (const ConvStage& s : encoder_) {
        h = leaky_relu(s.norm(tape, s.conv(tape, h), mode));
    }
    out.bottleneck = h;
    for (const DeconvStage& s : decoder_) {
        h = leaky_relu(s.norm(tape, s.deconv(tape, h), mode));
    }
    out.reconstruction = h;
    return out;
}

} // namespace lgest
