// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lgest/layers.hpp"

namespace lgest {

struct DsaeConfig {
    std::size_t in_channels = 1;
    std::size_t stem_channels = 64;
    std::size_t depth = 2;
    std::size_t kernel_size = 3;

    /// ConfigError unless depth ≥ 1, stem_channels divisible by 2^depth and the
    /// stem kernel is odd.
    void validate() const;
    std::size_t bottleneck_channels() const { return stem_channels >> depth; }
};

/// Encoder channel counts [C0, C0/2, ..., C0/2^depth]; the decoder walks it in reverse.
std::vector<std::size_t> channel_schedule(const DsaeConfig& config);

struct DsaeOutput {
    Var features;       // [N x C0 x S x S] stem output
    Var bottleneck;     // [N x C0/2^depth x S x S]
    Var reconstruction; // [N x C0 x S x S]
};

/// Convolutional stem followed by a channel-halving encoder and a
/// channel-doubling transposed-conv decoder. Every stage is
/// conv → BatchNorm → LeakyReLU with 3×3 kernels, stride 1 and "same"
/// padding, so the spatial size is preserved end to end. Convolutions carry no
/// bias; the BatchNorm shift plays that role.
class Dsae {
public:
    Dsae(ParameterStore& store, const std::string& prefix, const DsaeConfig& config, Rng& rng);

    DsaeOutput forward(Tape& tape, Var x, Mode mode) const;
    const DsaeConfig& config() const noexcept { return config_; }

private:
    struct ConvStage {
        Conv2d conv;
        BatchNorm2d norm;
    };
    struct DeconvStage {
        Deconv2d deconv;
        BatchNorm2d norm;
    };

    DsaeConfig config_;
    std::vector<ConvStage> stem_;
    std::vector<ConvStage> encoder_;
    std::vector<DeconvStage> decoder_;
};

} // namespace lgest
