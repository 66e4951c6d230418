// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "lgest/parameters.hpp"

namespace lgest {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias-corrected moments over the trainable tensors of a store.
class Adam {
public:
    Adam(ParameterStore& store, AdamOptions options);

    /// Applies one update from the gradients currently held by the parameters,
    /// then zeroes those gradients. Parameters without a gradient are skipped.
    void step();

    std::size_t steps() const noexcept { return step_; }
    const AdamOptions& options() const noexcept { return options_; }

private:
    std::vector<Tensor*> params_;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
    AdamOptions options_;
    std::size_t step_ = 0;
};

} // namespace lgest
