// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/ciem.hpp"

#include <cmath>

#include "lgest/error.hpp"

namespace lgest {

std::vector<std::array<std::size_t, 2>> top2_indices(const Tensor& probs) {
    if (probs.rank() != 2 || probs.dim(1) < 2) {
        throw ConfigError("top2: need at least two experts, got scores " + to_string(probs.shape()));
    }
    const std::size_t rows = probs.dim(0);
    const std::size_t m = probs.dim(1);
    std::vector<std::array<std::size_t, 2>> out(rows);
    for (std::size_t t = 0; t < rows; ++t) {
        const double* p = probs.data() + t * m;
        std::size_t first = 0;
        for (std::size_t j = 1; j < m; ++j) {
            if (p[j] > p[first]) {
                first = j;
            }
        }
        std::size_t second = first == 0 ? 1 : 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != first && p[j] > p[second]) {
                second = j;
            }
        }
        out[t] = {first, second};
    }
    return out;
}

GateOutput top2_gate(Var x, Var w_gate, std::optional<Var> b_gate) {
    if (w_gate.value().rank() != 2 || w_gate.dim(1) < 2) {
        throw ConfigError("top2_gate: need at least two experts, gate weight is " + to_string(w_gate.shape()));
    }
    Var probs = softmax(linear(x, w_gate, b_gate), 1);
    GateDecision decision;
    decision.indices = top2_indices(probs.value());
    const std::size_t m = w_gate.dim(1);
    Tensor keep(probs.shape());
    for (std::size_t t = 0; t < decision.indices.size(); ++t) {
        keep[t * m + decision.indices[t][0]] = 1.0;
        keep[t * m + decision.indices[t][1]] = 1.0;
    }
    Var weights = mask(probs, keep);
    decision.weights = Tensor(weights.shape(), std::vector<double>(weights.value().values().begin(),
                                                                   weights.value().values().end()));
    return {weights, std::move(decision)};
}

void CiemConfig::validate() const {
    if (d_q == 0 || d_kv == 0 || d_out == 0 || attention_width() == 0) {
        throw ConfigError("ciem: widths must be positive");
    }
    if (n_experts < 2) {
        throw ConfigError("ciem: the RMoE layer needs at least two experts, got " + std::to_string(n_experts));
    }
    if (attention_width() != d_out) {
        throw DimensionError("ciem: attention width " + std::to_string(attention_width()) +
                             " must equal the output width " + std::to_string(d_out));
    }
}

CrossAttention::CrossAttention(ParameterStore& store, const std::string& prefix, std::size_t d_q, std::size_t d_kv,
                               std::size_t d_attn, Rng& rng)
    : norm_q(LayerNorm::create(store, prefix + ".ln_q", d_q)),
      norm_k(LayerNorm::create(store, prefix + ".ln_k", d_kv)),
      norm_v(LayerNorm::create(store, prefix + ".ln_v", d_kv)),
      proj_q(Linear::create(store, prefix + ".w_q", d_q, d_attn, false, rng)),
      proj_k(Linear::create(store, prefix + ".w_k", d_kv, d_attn, false, rng)),
      proj_v(Linear::create(store, prefix + ".w_v", d_kv, d_attn, false, rng)),
      d_q_(d_q),
      d_kv_(d_kv),
      d_attn_(d_attn) {}

AttentionOutput CrossAttention::forward(Tape& tape, Var q, Var k, Var v) const {
    if (q.value().rank() != 3 || k.value().rank() != 3 || v.value().rank() != 3) {
        throw DimensionError("cross_attention: inputs must be [N x tokens x width]");
    }
    if (k.dim(1) != v.dim(1) || k.dim(0) != v.dim(0)) {
        throw DimensionError("cross_attention: key tokens " + to_string(k.shape()) + " do not match value tokens " +
                             to_string(v.shape()));
    }
    if (q.dim(0) != k.dim(0) || q.dim(2) != d_q_ || k.dim(2) != d_kv_ || v.dim(2) != d_kv_) {
        throw DimensionError("cross_attention: widths (" + to_string(q.shape()) + ", " + to_string(k.shape()) +
                             ") do not match the configured d_q=" + std::to_string(d_q_) +
                             ", d_kv=" + std::to_string(d_kv_));
    }
    Var fq = proj_q(tape, norm_q(tape, q));
    Var fk = proj_k(tape, norm_k(tape, k));
    Var fv = proj_v(tape, norm_v(tape, v));
    Var scores = scale(batched_matmul(fq, transpose_last(fk)), 1.0 / std::sqrt(static_cast<double>(d_attn_)));
    Var attn = softmax(scores, 2);
    return {batched_matmul(attn, fv), attn};
}

RmoeLayer::RmoeLayer(ParameterStore& store, const std::string& prefix, std::size_t width, std::size_t n_experts,
                     Rng& rng)
    : gate(Linear::create(store, prefix + ".gate", width, n_experts, false, rng)), width_(width) {
    if (n_experts < 2) {
        throw ConfigError("rmoe: at least two experts required, got " + std::to_string(n_experts));
    }
    for (std::size_t i = 0; i < n_experts; ++i) {
        experts.push_back(
            &store.add(prefix + ".expert" + std::to_string(i) + ".weight", uniform_init({width, width}, width, rng)));
    }
}

RmoeOutput RmoeLayer::forward(Tape& tape, Var x) const {
    if (x.value().rank() < 2 || x.shape().back() != width_) {
        throw DimensionError("rmoe: input " + to_string(x.shape()) + " does not have width " +
                             std::to_string(width_));
    }
    Var tokens = reshape(x, {x.size() / width_, width_});
    GateOutput g = top2_gate(tokens, tape.parameter(*gate.weight));
    std::vector<Var> weights;
    for (Tensor* e : experts) {
        weights.push_back(tape.parameter(*e));
    }
    Var mixed = sparse_expert_mix(tokens, g.weights, g.decision.indices, weights, {});
    return {add(reshape(mixed, x.shape()), x), std::move(g.decision)};
}

namespace {

const CiemConfig& checked(const CiemConfig& config) {
    config.validate();
    return config;
}

} // namespace

Ciem::Ciem(ParameterStore& store, const std::string& prefix, const CiemConfig& config, Rng& rng)
    : attention(store, prefix + ".attn", checked(config).d_q, config.d_kv, config.attention_width(), rng),
      rmoe(store, prefix + ".rmoe", config.d_out, config.n_experts, rng),
      config_(config) {
    if (config.d_out != config.d_q) {
        residual_proj = Linear::create(store, prefix + ".w_res", config.d_q, config.d_out, false, rng);
    }
}

CiemOutput Ciem::forward(Tape& tape, Var q, Var k, Var v) const {
    AttentionOutput attn = attention.forward(tape, q, k, v);
    Var residual = residual_proj ? (*residual_proj)(tape, q) : q;
    RmoeOutput moe = rmoe.forward(tape, add(attn.output, residual));
    return {moe.output, attn, std::move(moe.gates)};
}

} // namespace lgest
