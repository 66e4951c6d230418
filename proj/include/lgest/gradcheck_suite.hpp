// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lgest/gradcheck.hpp"

namespace lgest {

inline constexpr double kPrimitiveTolerance = 1e-5;
inline constexpr double kCompositeTolerance = 1e-4;

struct GradCheckCase {
    std::string name;
    bool composite = false;
    std::function<GradCheckReport(const GradCheckOptions&)> run;
};

struct GradCheckResult {
    std::string name;
    double tolerance = 0.0;
    GradCheckReport report;
};

/// Every differentiable primitive on small random inputs, followed by the
/// composed blocks and a tiny end-to-end network.
std::vector<GradCheckCase> gradient_suite();

/// A case whose backward rule is deliberately wrong; it must fail.
GradCheckCase faulty_gradient_case();

/// Runs the cases with the primitive or composite tolerance.
std::vector<GradCheckResult> run_gradient_suite(const std::vector<GradCheckCase>& cases,
                                                GradCheckOptions options = {},
                                                const std::function<void(const GradCheckResult&)>& on_result = {});

} // namespace lgest
