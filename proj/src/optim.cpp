// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/optim.hpp"

#include <cmath>

namespace lgest {

Adam::Adam(ParameterStore& store, AdamOptions options) : params_(store.trainable()), options_(options) {
    for (Tensor* p : params_) {
        first_.emplace_back(p->size(), 0.0);
        second_.emplace_back(p->size(), 0.0);
    }
}

void Adam::step() {
    ++step_;
    const double t = static_cast<double>(step_);
    const double correction1 = 1.0 - std::pow(options_.beta1, t);
    const double correction2 = 1.0 - std::pow(options_.beta2, t);
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Tensor& p = *params_[k];
        if (!p.has_grad()) {
            continue;
        }
        std::span<double> g = p.grad();
        std::vector<double>& m = first_[k];
        std::vector<double>& v = second_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g[i];
            v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
        }
        p.zero_grad();
    }
}

} // namespace lgest
