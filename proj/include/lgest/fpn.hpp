// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lgest/ciem.hpp"

namespace lgest {

struct FpnConfig {
    std::size_t levels = 4;
    /// Token width C of the pyramid input.
    std::size_t base_channels = 64;
    /// Experts per RMoE layer inside every CIEM block.
    std::size_t n_experts = 4;

    void validate() const;
    /// Width of the downsample branch at levels 1..L: C/2, C/4, ..., C/2^L.
    std::vector<std::size_t> down_widths() const;
    /// C + Σ_{i=1..L} C/2^i.
    std::size_t concat_width() const;
};

struct PyramidOutput {
    std::vector<Var> parallel; // L tensors [N x D x C]
    std::vector<Var> down;     // L tensors, level i is [N x D x C/2^i]
};

/// [N x C x S x S] → [N x S·S x C].
Var tokenize(Var f_hat);

/// Two-branch pyramid of CIEM blocks. Level 1 runs self-attention on the
/// input for the parallel branch and attends from the input to that result
/// for the downsample branch; every later level crosses the branches:
///   parallel[i] = CIEM(parallel[i-1], down[i-1], down[i-1])
///   down[i]     = CIEM(down[i-1], parallel[i-1], parallel[i-1])
/// The parallel branch keeps width C; the downsample branch halves it per level.
class CiemFpn {
public:
    CiemFpn(ParameterStore& store, const std::string& prefix, const FpnConfig& config, Rng& rng);

    PyramidOutput forward(Tape& tape, Var tokens) const;
    const FpnConfig& config() const noexcept { return config_; }

    const std::vector<Ciem>& parallel_blocks() const noexcept { return parallel_; }
    const std::vector<Ciem>& down_blocks() const noexcept { return down_; }

private:
    FpnConfig config_;
    std::vector<Ciem> parallel_;
    std::vector<Ciem> down_;
};

/// Mean-pools the last parallel level and every downsample level over tokens
/// and concatenates them: [N x (C + Σ C/2^i)].
Var fpn_concat(const PyramidOutput& pyramid);

} // namespace lgest
