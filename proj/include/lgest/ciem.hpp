// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lgest/layers.hpp"

namespace lgest {

/// Record of a top-2 routing decision.
///
/// `weights` is [T x M]: the softmax gate values with every entry outside the
/// two selected experts set to zero (no renormalisation). `indices[t]` holds
/// the selected experts, larger weight first, lower index first on ties.
/// A group with fewer than two experts records weights [T x 1] of ones and no indices.
struct GateDecision {
    Tensor weights;
    std::vector<std::array<std::size_t, 2>> indices;
};

struct GateOutput {
    Var weights; // masked softmax, differentiable through the kept entries
    GateDecision decision;
};

/// softmax(x·w_gate + b_gate) over M experts, keeping the two largest entries.
/// ConfigError when M < 2.
GateOutput top2_gate(Var x, Var w_gate, std::optional<Var> b_gate = std::nullopt);

/// Selects the two largest entries of each row of probs[T×M] (ties → lower index).
std::vector<std::array<std::size_t, 2>> top2_indices(const Tensor& probs);

struct CiemConfig {
    std::size_t d_q = 0;
    std::size_t d_kv = 0;
    std::size_t d_out = 0;
    std::size_t n_experts = 4;
    /// Width of the Q/K/V projections; 0 selects d_out.
    std::size_t d_attn = 0;

    std::size_t attention_width() const { return d_attn == 0 ? d_out : d_attn; }
    void validate() const;
};

struct AttentionOutput {
    Var output;    // [N x D x d_attn]
    Var attention; // [N x D x D_k], rows sum to 1
};

/// LayerNorm on each input, bias-free Q/K/V projections, then
/// softmax(F_q F_kᵀ / sqrt(d_attn)) F_v.
class CrossAttention {
public:
    CrossAttention(ParameterStore& store, const std::string& prefix, std::size_t d_q, std::size_t d_kv,
                   std::size_t d_attn, Rng& rng);

    AttentionOutput forward(Tape& tape, Var q, Var k, Var v) const;

    LayerNorm norm_q, norm_k, norm_v;
    Linear proj_q, proj_k, proj_v;

private:
    std::size_t d_q_;
    std::size_t d_kv_;
    std::size_t d_attn_;
};

struct RmoeOutput {
    Var output;
    GateDecision gates;
};

/// Residual mixture of experts over tokens: x + Σ_top2 g_i(x) · x·W_i, with
/// square bias-free experts and a bias-free gate, routed per token.
class RmoeLayer {
public:
    RmoeLayer(ParameterStore& store, const std::string& prefix, std::size_t width, std::size_t n_experts, Rng& rng);

    /// x is [N x D x width] (or [T x width]).
    RmoeOutput forward(Tape& tape, Var x) const;

    std::size_t width() const noexcept { return width_; }
    std::size_t n_experts() const noexcept { return experts.size(); }

    Linear gate;
    std::vector<Tensor*> experts; // each [width x width]

private:
    std::size_t width_;
};

struct CiemOutput {
    Var output;
    AttentionOutput attention;
    GateDecision gates;
};

/// Cross-interactive mixed expert block: RMoE(CA(Q, K, V) + Q).
/// When d_out ≠ d_q the Q residual goes through a bias-free d_q→d_out projection.
class Ciem {
public:
    Ciem(ParameterStore& store, const std::string& prefix, const CiemConfig& config, Rng& rng);

    CiemOutput forward(Tape& tape, Var q, Var k, Var v) const;
    const CiemConfig& config() const noexcept { return config_; }

    CrossAttention attention;
    std::optional<Linear> residual_proj;
    RmoeLayer rmoe;

private:
    CiemConfig config_;
};

} // namespace lgest
