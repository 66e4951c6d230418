// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/fpn.hpp"

#include "lgest/error.hpp"

namespace lgest {

void FpnConfig::validate() const {
    if (levels < 1) {
        throw ConfigError("fpn: at least one pyramid level is required");
    }
    if (levels >= 32 || base_channels == 0 || base_channels % (std::size_t{1} << levels) != 0) {
        throw ConfigError("fpn: base_channels " + std::to_string(base_channels) + " is not divisible by 2^" +
                          std::to_string(levels));
    }
    if (n_experts < 2) {
        throw ConfigError("fpn: CIEM blocks need at least two experts, got " + std::to_string(n_experts));
    }
}

std::vector<std::size_t> FpnConfig::down_widths() const {
    std::vector<std::size_t> widths;
    for (std::size_t i = 1; i <= levels; ++i) {
        widths.push_back(base_channels >> i);
    }
    return widths;
}

std::size_t FpnConfig::concat_width() const {
    std::size_t total = base_channels;
    for (std::size_t w : down_widths()) {
        total += w;
    }
    return total;
}

Var tokenize(Var f_hat) { return nchw_to_tokens(f_hat); }

CiemFpn::CiemFpn(ParameterStore& store, const std::string& prefix, const FpnConfig& config, Rng& rng)
    : config_(config) {
    config_.validate();
    const std::size_t c = config_.base_channels;
    const std::vector<std::size_t> widths = config_.down_widths();
    for (std::size_t i = 0; i < config_.levels; ++i) {
        const std::string level = prefix + ".level" + std::to_string(i + 1);
        // Level 1: Q = input (width C), K/V = input or parallel[1] (width C).
        // Level i>1: parallel block attends to down[i-1], down block to parallel[i-1].
        const std::size_t prev_down = i == 0 ? c : widths[i - 1];
        const CiemConfig par{.d_q = c, .d_kv = prev_down, .d_out = c, .n_experts = config_.n_experts};
        const CiemConfig dwn{.d_q = prev_down, .d_kv = c, .d_out = widths[i], .n_experts = config_.n_experts};
        parallel_.emplace_back(store, level + ".parallel", par, rng);
        down_.emplace_back(store, level + ".down", dwn, rng);
    }
}

PyramidOutput CiemFpn::forward(Tape& tape, Var tokens) const {
    if (tokens.value().rank() != 3 || tokens.dim(2) != config_.base_channels) {
        throw DimensionError("fpn: expected [N x D x " + std::to_string(config_.base_channels) + "] tokens, got " +
                             to_string(tokens.shape()));
    }
    PyramidOutput out;
    Var par = parallel_[0].forward(tape, tokens, tokens, tokens).output;
    Var dwn = down_[0].forward(tape, tokens, par, par).output;
    out.parallel.push_back(par);
    out.down.push_back(dwn);
    for (std::size_t i = 1; i < config_.levels; ++i) {
        Var next_par = parallel_[i].forward(tape, par, dwn, dwn).output;
        Var next_dwn = down_[i].forward(tape, dwn, par, par).output;
        par = next_par;
        dwn = next_dwn;
        out.parallel.push_back(par);
        out.down.push_back(dwn);
    }
    return out;
}

Var fpn_concat(const PyramidOutput& pyramid) {
    if (pyramid.parallel.empty()) {
        throw DimensionError("fpn_concat: empty pyramid");
    }
    std::vector<Var> pooled{mean_axis(pyramid.parallel.back(), 1)};
    for (const Var& d : pyramid.down) {
        pooled.push_back(mean_axis(d, 1));
    }
    return concat_last(pooled);
}

} // namespace lgest
