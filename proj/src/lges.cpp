// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/lges.hpp"

#include "lgest/error.hpp"

namespace lgest {

ExpertGroup::ExpertGroup(ParameterStore& store, const std::string& prefix, const ExpertGroupConfig& config, Rng& rng)
    : config_(config) {
    if (config.d_in == 0 || config.n_class == 0) {
        throw ConfigError("expert group: d_in and n_class must be positive");
    }
    const std::size_t count = config.n_experts < 2 ? 1 : config.n_experts;
    if (count >= 2) {
        gate = Linear::create(store, prefix + ".gate", config.d_in, count, true, rng);
    }
    for (std::size_t i = 0; i < count; ++i) {
        experts.push_back(
            Linear::create(store, prefix + ".expert" + std::to_string(i), config.d_in, config.n_class, true, rng));
    }
}

ExpertGroupOutput ExpertGroup::forward(Tape& tape, Var x) const {
    if (x.value().rank() != 2 || x.dim(1) != config_.d_in) {
        throw DimensionError("expert group: expected [N x " + std::to_string(config_.d_in) + "] input, got " +
                             to_string(x.shape()));
    }
    if (is_linear()) {
        GateDecision trivial{Tensor::full({x.dim(0), 1}, 1.0), {}};
        return {experts[0](tape, x), std::move(trivial)};
    }
    GateOutput g = top2_gate(x, tape.parameter(*gate->weight), tape.parameter(*gate->bias));
    std::vector<Var> weights;
    std::vector<Var> biases;
    for (const Linear& e : experts) {
        weights.push_back(tape.parameter(*e.weight));
        biases.push_back(tape.parameter(*e.bias));
    }
    Var logits = sparse_expert_mix(x, g.weights, g.decision.indices, weights, biases);
    return {logits, std::move(g.decision)};
}

Lges::Lges(ParameterStore& store, const std::string& prefix, const ExpertGroupConfig& local_config,
           const ExpertGroupConfig& global_config, Rng& rng)
    : local(store, prefix + ".local", local_config, rng), global(store, prefix + ".global", global_config, rng) {
    if (local_config.n_class != global_config.n_class) {
        throw ConfigError("lges: local and global groups must share n_class");
    }
}

LgesOutput Lges::forward(Tape& tape, Var local_features, Var global_features) const {
    ExpertGroupOutput l = local.forward(tape, local_features);
    ExpertGroupOutput g = global.forward(tape, global_features);
    return {l.logits, g.logits, std::move(l.gates), std::move(g.gates)};
}

} // namespace lgest
