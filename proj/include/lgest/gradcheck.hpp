// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lgest/tape.hpp"

namespace lgest {

struct GradCheckOptions {
    double eps = 1e-5;
    double tolerance = 1e-5;
    /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
    double scale_floor = 1e-3;
    /// Entries probed per tensor; 0 probes every entry. Sampled entries are
    /// drawn with `sample_seed`.
    std::size_t max_entries_per_tensor = 0;
    std::uint64_t sample_seed = 0x5eed;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t checked = 0;
    bool passed = true;
    /// "tensor#index" of the worst entry.
    std::string worst;
};

/// Scalar loss built on a fresh tape. It must bind the checked tensors with
/// tape.parameter() so the reverse sweep deposits their gradients.
using LossBuilder = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients of `loss` w.r.t. `params` against central
/// finite differences. Parameter values are perturbed in place and restored.
GradCheckReport grad_check(const LossBuilder& loss, std::span<Tensor* const> params,
                           const GradCheckOptions& options = {});

/// Checks f over owned copies of `inputs`.
GradCheckReport grad_check(const std::function<Var(Tape&, std::span<const Var>)>& f, std::vector<Tensor> inputs,
                           const GradCheckOptions& options = {});

} // namespace lgest
