// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lgest/ciem.hpp"

namespace lgest {

struct ExpertGroupConfig {
    std::size_t n_experts = 4;
    std::size_t d_in = 0;
    std::size_t n_class = 0;
};

struct ExpertGroupOutput {
    Var logits; // [N x n_class]
    GateDecision gates;
};

/// Top-2 gated group of linear experts f_i(x) = xᵀW_i + b_i with a biased
/// linear gate and no residual path. With fewer than two experts the group is
/// the single linear map f_0.
class ExpertGroup {
public:
    ExpertGroup(ParameterStore& store, const std::string& prefix, const ExpertGroupConfig& config, Rng& rng);

    ExpertGroupOutput forward(Tape& tape, Var x) const;
    const ExpertGroupConfig& config() const noexcept { return config_; }
    bool is_linear() const noexcept { return experts.size() == 1; }

    std::vector<Linear> experts;
    std::optional<Linear> gate;

private:
    ExpertGroupConfig config_;
};

struct LgesOutput {
    Var local_logits;  // P_t
    Var global_logits; // P_k
    GateDecision local_gates;
    GateDecision global_gates;
};

/// Independent local and global expert groups.
class Lges {
public:
    Lges(ParameterStore& store, const std::string& prefix, const ExpertGroupConfig& local,
         const ExpertGroupConfig& global, Rng& rng);

    LgesOutput forward(Tape& tape, Var local_features, Var global_features) const;

    ExpertGroup local;
    ExpertGroup global;
};

} // namespace lgest
