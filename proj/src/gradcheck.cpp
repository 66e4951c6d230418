// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgest/error.hpp"
#include "lgest/rng.hpp"

namespace lgest {

namespace {

double evaluate(const LossBuilder& loss) {
    Tape tape;
    const double v = loss(tape).value().item();
    if (!std::isfinite(v)) {
        throw NumericError("grad_check: non-finite loss");
    }
    return v;
}

std::vector<std::size_t> probe_indices(std::size_t size, const GradCheckOptions& options, Rng& rng) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.max_entries_per_tensor == 0 || size <= options.max_entries_per_tensor) {
        return idx;
    }
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(options.max_entries_per_tensor);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

GradCheckReport grad_check(const LossBuilder& loss, std::span<Tensor* const> params, const GradCheckOptions& options) {
    std::vector<std::vector<double>> analytic;
    for (Tensor* p : params) {
        p->set_requires_grad(true);
        p->clear_grad();
    }
    {
        Tape tape;
        Var root = loss(tape);
        if (!std::isfinite(root.value().item())) {
            throw NumericError("grad_check: non-finite loss");
        }
        tape.backward(root);
    }
    for (Tensor* p : params) {
        if (p->has_grad()) {
            analytic.emplace_back(p->grad().begin(), p->grad().end());
        } else {
            analytic.emplace_back(p->size(), 0.0);
        }
    }

    GradCheckReport report;
    Rng rng(options.sample_seed);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = *params[pi];
        for (std::size_t i : probe_indices(p.size(), options, rng)) {
            const double original = p[i];
            p[i] = original + options.eps;
            const double plus = evaluate(loss);
            p[i] = original - options.eps;
            const double minus = evaluate(loss);
            p[i] = original;
            const double numeric = (plus - minus) / (2.0 * options.eps);
            const double a = analytic[pi][i];
            const double abs_err = std::abs(a - numeric);
            const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), options.scale_floor});
            report.max_abs_error = std::max(report.max_abs_error, abs_err);
            if (rel_err > report.max_rel_error || report.checked == 0) {
                report.max_rel_error = std::max(report.max_rel_error, rel_err);
                report.worst = "tensor" + std::to_string(pi) + "#" + std::to_string(i);
            }
            ++report.checked;
        }
    }
    report.passed = report.max_rel_error < options.tolerance;
    return report;
}

GradCheckReport grad_check(const std::function<Var(Tape&, std::span<const Var>)>& f, std::vector<Tensor> inputs,
                           const GradCheckOptions& options) {
    std::vector<Tensor*> params;
    for (Tensor& t : inputs) {
        params.push_back(&t);
    }
    const LossBuilder loss = [&](Tape& tape) {
        std::vector<Var> vars;
        for (Tensor& t : inputs) {
            vars.push_back(tape.parameter(t));
        }
        return f(tape, vars);
    };
    return grad_check(loss, params, options);
}

} // namespace lgest
