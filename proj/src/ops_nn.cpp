// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "lgest/error.hpp"
#include "lgest/ops.hpp"

namespace lgest {

namespace {

struct AxisSplit {
    std::size_t outer = 1;
    std::size_t n = 1;
    std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
    AxisSplit s;
    s.n = shape[axis];
    for (std::size_t i = 0; i < axis; ++i) {
        s.outer *= shape[i];
    }
    for (std::size_t i = axis + 1; i < shape.size(); ++i) {
        s.inner *= shape[i];
    }
    return s;
}

} // namespace

Var softmax(Var x, std::size_t axis) {
    const Shape& shape = x.shape();
    if (axis >= shape.size() || shape[axis] == 0) {
        throw DimensionError("softmax: invalid axis " + std::to_string(axis) + " for " + to_string(shape));
    }
    if (!x.value().all_finite()) {
        throw NumericError("softmax: non-finite input");
    }
    const AxisSplit s = split_at(shape, axis);
    Tensor out(shape);
    const double* src = x.value().data();
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t base = o * s.n * s.inner + i;
            double peak = src[base];
            for (std::size_t j = 1; j < s.n; ++j) {
                peak = std::max(peak, src[base + j * s.inner]);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < s.n; ++j) {
                const double e = std::exp(src[base + j * s.inner] - peak);
                out[base + j * s.inner] = e;
                total += e;
            }
            for (std::size_t j = 0; j < s.n; ++j) {
                out[base + j * s.inner] /= total;
            }
        }
    }
    const std::array inputs{x};
    return x.tape().record(std::move(out), inputs, [x, s](std::span<const double> g, const Tensor& y) {
        const double* p = y.data();
        std::span<double> dx = x.tape().grad_buffer(x);
        for (std::size_t o = 0; o < s.outer; ++o) {
            for (std::size_t i = 0; i < s.inner; ++i) {
                const std::size_t base = o * s.n * s.inner + i;
                double dot = 0.0;
                for (std::size_t j = 0; j < s.n; ++j) {
                    dot += g[base + j * s.inner] * p[base + j * s.inner];
                }
                for (std::size_t j = 0; j < s.n; ++j) {
                    dx[base + j * s.inner] += p[base + j * s.inner] * (g[base + j * s.inner] - dot);
                }
            }
        }
    }, "softmax");
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    if (x.value().rank() == 0) {
        throw DimensionError("layer_norm: scalar input");
    }
    const std::size_t d = x.shape().back();
    if (d == 0 || gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
        throw DimensionError("layer_norm: gamma/beta must have shape [" + std::to_string(d) + "]");
    }
    const std::size_t rows = x.size() / d;
    Tensor out(x.shape());
    std::vector<double> xhat(x.size());
    std::vector<double> rstd(rows);
    const double* src = x.value().data();
    const double* gm = gamma.value().data();
    const double* bt = beta.value().data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = src + r * d;
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            mean += row[j];
        }
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            var += (row[j] - mean) * (row[j] - mean);
        }
        var /= static_cast<double>(d);
        rstd[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) {
            const double h = (row[j] - mean) * rstd[r];
            xhat[r * d + j] = h;
            out[r * d + j] = gm[j] * h + bt[j];
        }
    }
    const std::array inputs{x, gamma, beta};
    return x.tape().record(std::move(out), inputs,
                           [x, gamma, beta, rows, d, xhat = std::move(xhat),
                            rstd = std::move(rstd)](std::span<const double> g, const Tensor&) {
        Tape& tape = x.tape();
        const double* gm = gamma.value().data();
        if (gamma.requires_grad() || beta.requires_grad()) {
            std::span<double> dg = tape.grad_buffer(gamma);
            std::span<double> db = tape.grad_buffer(beta);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t j = 0; j < d; ++j) {
                    dg[j] += g[r * d + j] * xhat[r * d + j];
                    db[j] += g[r * d + j];
                }
            }
        }
        if (x.requires_grad()) {
            std::span<double> dx = tape.grad_buffer(x);
            const double inv_d = 1.0 / static_cast<double>(d);
            for (std::size_t r = 0; r < rows; ++r) {
                double mean_dh = 0.0;
                double mean_dh_h = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double dh = g[r * d + j] * gm[j];
                    mean_dh += dh;
                    mean_dh_h += dh * xhat[r * d + j];
                }
                mean_dh *= inv_d;
                mean_dh_h *= inv_d;
                for (std::size_t j = 0; j < d; ++j) {
                    const double dh = g[r * d + j] * gm[j];
                    dx[r * d + j] += rstd[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
                }
            }
        }
    }, "layer_norm");
}

Var batch_norm(Var x, Var gamma, Var beta, BatchNormStats stats, Mode mode, double momentum, double eps) {
    if (x.value().rank() < 2) {
        throw DimensionError("batch_norm: expected [N x C x ...], got " + to_string(x.shape()));
    }
    const std::size_t n = x.dim(0);
    const std::size_t c = x.dim(1);
    const std::size_t plane = x.size() / (n * c);
    if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
        throw DimensionError("batch_norm: gamma/beta must have shape [" + std::to_string(c) + "]");
    }
    if (stats.running_mean == nullptr || stats.running_var == nullptr || stats.steps == nullptr) {
        throw StateError("batch_norm: running statistics not bound");
    }
    if (n == 0) {
        throw DimensionError("batch_norm: empty batch");
    }
    const double* src = x.value().data();
    std::vector<double> mean(c, 0.0);
    std::vector<double> var(c, 0.0);
    const double count = static_cast<double>(n * plane);
    if (mode == Mode::train) {
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double* p = src + (b * c + ch) * plane;
                for (std::size_t k = 0; k < plane; ++k) {
                    mean[ch] += p[k];
                }
            }
        }
        for (double& m : mean) {
            m /= count;
        }
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double* p = src + (b * c + ch) * plane;
                for (std::size_t k = 0; k < plane; ++k) {
                    var[ch] += (p[k] - mean[ch]) * (p[k] - mean[ch]);
                }
            }
        }
        for (double& v : var) {
            v /= count;
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
            (*stats.running_mean)[ch] = (1.0 - momentum) * (*stats.running_mean)[ch] + momentum * mean[ch];
            (*stats.running_var)[ch] = (1.0 - momentum) * (*stats.running_var)[ch] + momentum * var[ch];
        }
        (*stats.steps)[0] += 1.0;
    } else {
        if ((*stats.steps)[0] <= 0.0) {
            throw StateError("batch_norm: eval mode before any train step");
        }
        std::copy(stats.running_mean->values().begin(), stats.running_mean->values().end(), mean.begin());
        std::copy(stats.running_var->values().begin(), stats.running_var->values().end(), var.begin());
    }
    std::vector<double> rstd(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        rstd[ch] = 1.0 / std::sqrt(var[ch] + eps);
    }
    Tensor out(x.shape());
    std::vector<double> xhat(x.size());
    const double* gm = gamma.value().data();
    const double* bt = beta.value().data();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (b * c + ch) * plane;
            for (std::size_t k = 0; k < plane; ++k) {
                const double h = (src[base + k] - mean[ch]) * rstd[ch];
                xhat[base + k] = h;
                out[base + k] = gm[ch] * h + bt[ch];
            }
        }
    }
    const bool batch_stats = mode == Mode::train;
    const std::array inputs{x, gamma, beta};
    return x.tape().record(std::move(out), inputs,
                           [x, gamma, beta, n, c, plane, count, batch_stats, xhat = std::move(xhat),
                            rstd = std::move(rstd)](std::span<const double> g, const Tensor&) {
        Tape& tape = x.tape();
        std::vector<double> sum_g(c, 0.0);
        std::vector<double> sum_gh(c, 0.0);
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t base = (b * c + ch) * plane;
                for (std::size_t k = 0; k < plane; ++k) {
                    sum_g[ch] += g[base + k];
                    sum_gh[ch] += g[base + k] * xhat[base + k];
                }
            }
        }
        if (gamma.requires_grad()) {
            std::span<double> dg = tape.grad_buffer(gamma);
            for (std::size_t ch = 0; ch < c; ++ch) {
                dg[ch] += sum_gh[ch];
            }
        }
        if (beta.requires_grad()) {
            std::span<double> db = tape.grad_buffer(beta);
            for (std::size_t ch = 0; ch < c; ++ch) {
                db[ch] += sum_g[ch];
            }
        }
        if (!x.requires_grad()) {
            return;
        }
        const double* gm = gamma.value().data();
        std::span<double> dx = tape.grad_buffer(x);
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t base = (b * c + ch) * plane;
                const double scale_ch = gm[ch] * rstd[ch];
                for (std::size_t k = 0; k < plane; ++k) {
                    if (batch_stats) {
                        dx[base + k] +=
                            scale_ch * (g[base + k] - sum_g[ch] / count - xhat[base + k] * sum_gh[ch] / count);
                    } else {
                        dx[base + k] += scale_ch * g[base + k];
                    }
                }
            }
        }
    }, "batch_norm");
}

Var cross_entropy(Var logits, std::span<const std::size_t> labels) {
    if (logits.value().rank() != 2) {
        throw DimensionError("cross_entropy: expected [N x n] logits, got " + to_string(logits.shape()));
    }
    const std::size_t n = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    if (labels.size() != n) {
        throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                             " rows");
    }
    if (n == 0 || classes == 0) {
        throw DimensionError("cross_entropy: empty logits");
    }
    for (std::size_t label : labels) {
        if (label >= classes) {
            throw IndexError("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                             std::to_string(classes) + ")");
        }
    }
    const double* z = logits.value().data();
    std::vector<double> probs(n * classes);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = z + r * classes;
        const double peak = *std::max_element(row, row + classes);
        double denom = 0.0;
        for (std::size_t j = 0; j < classes; ++j) {
            denom += std::exp(row[j] - peak);
        }
        const double log_denom = std::log(denom) + peak;
        for (std::size_t j = 0; j < classes; ++j) {
            probs[r * classes + j] = std::exp(row[j] - log_denom);
        }
        total += log_denom - row[labels[r]];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<std::size_t> targets(labels.begin(), labels.end());
    const std::array inputs{logits};
    return logits.tape().record(Tensor::scalar(total * inv_n), inputs,
                                [logits, n, classes, inv_n, probs = std::move(probs),
                                 targets = std::move(targets)](std::span<const double> g, const Tensor&) {
        std::span<double> dz = logits.tape().grad_buffer(logits);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < classes; ++j) {
                const double onehot = j == targets[r] ? 1.0 : 0.0;
                dz[r * classes + j] += g[0] * inv_n * (probs[r * classes + j] - onehot);
            }
        }
    }, "cross_entropy");
}

Var sparse_expert_mix(Var x, Var gates, std::span<const std::array<std::size_t, 2>> selected,
                      std::span<const Var> weights, std::span<const Var> biases) {
    if (x.value().rank() != 2 || gates.value().rank() != 2) {
        throw DimensionError("sparse_expert_mix: x and gates must be rank-2");
    }
    const std::size_t tokens = x.dim(0);
    const std::size_t d = x.dim(1);
    const std::size_t experts = weights.size();
    if (experts < 2 || gates.dim(0) != tokens || gates.dim(1) != experts || selected.size() != tokens) {
        throw DimensionError("sparse_expert_mix: gates " + to_string(gates.shape()) + " / " +
                             std::to_string(selected.size()) + " selections do not match " +
                             std::to_string(tokens) + " tokens and " + std::to_string(experts) + " experts");
    }
    if (!biases.empty() && biases.size() != experts) {
        throw DimensionError("sparse_expert_mix: expected " + std::to_string(experts) + " biases");
    }
    const std::size_t o = weights[0].value().rank() == 2 ? weights[0].dim(1) : 0;
    for (std::size_t j = 0; j < experts; ++j) {
        if (weights[j].shape() != Shape{d, o}) {
            throw DimensionError("sparse_expert_mix: expert " + std::to_string(j) + " weight " +
                                 to_string(weights[j].shape()) + ", expected " + to_string(Shape{d, o}));
        }
        if (!biases.empty() && biases[j].shape() != Shape{o}) {
            throw DimensionError("sparse_expert_mix: expert " + std::to_string(j) + " bias shape " +
                                 to_string(biases[j].shape()));
        }
    }
    // routes[j] lists the tokens that selected expert j, in token order.
    std::vector<std::vector<std::size_t>> routes(experts);
    for (std::size_t t = 0; t < tokens; ++t) {
        const auto [first, second] = selected[t];
        if (first >= experts || second >= experts || first == second) {
            throw IndexError("sparse_expert_mix: invalid expert pair for token " + std::to_string(t));
        }
        routes[first].push_back(t);
        routes[second].push_back(t);
    }
    for (auto& rows : routes) {
        std::sort(rows.begin(), rows.end());
    }
    Tensor out({tokens, o});
    // expert_out[j] holds x[t]·W_j + b_j for each routed token, kept for backward.
    std::vector<std::vector<double>> expert_out(experts);
    std::vector<double> gathered;
    const double* xv = x.value().data();
    const double* gv = gates.value().data();
    for (std::size_t j = 0; j < experts; ++j) {
        const std::vector<std::size_t>& rows = routes[j];
        if (rows.empty()) {
            continue;
        }
        gathered.resize(rows.size() * d);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::copy(xv + rows[r] * d, xv + (rows[r] + 1) * d, gathered.data() + r * d);
        }
        std::vector<double>& e = expert_out[j];
        e.resize(rows.size() * o);
        kernels::gemm(gathered.data(), false, weights[j].value().data(), false, e.data(), rows.size(), o, d, false);
        if (!biases.empty()) {
            const double* b = biases[j].value().data();
            for (std::size_t r = 0; r < rows.size(); ++r) {
                for (std::size_t k = 0; k < o; ++k) {
                    e[r * o + k] += b[k];
                }
            }
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const double w = gv[rows[r] * experts + j];
            double* dst = out.data() + rows[r] * o;
            for (std::size_t k = 0; k < o; ++k) {
                dst[k] += w * e[r * o + k];
            }
        }
    }
    std::vector<Var> inputs{x, gates};
    inputs.insert(inputs.end(), weights.begin(), weights.end());
    inputs.insert(inputs.end(), biases.begin(), biases.end());
    std::vector<Var> weight_vars(weights.begin(), weights.end());
    std::vector<Var> bias_vars(biases.begin(), biases.end());
    return x.tape().record(std::move(out), inputs,
                           [x, gates, weight_vars = std::move(weight_vars), bias_vars = std::move(bias_vars),
                            routes = std::move(routes), expert_out = std::move(expert_out), experts, d,
                            o](std::span<const double> g, const Tensor&) {
        Tape& tape = x.tape();
        const double* xv = x.value().data();
        const double* gv = gates.value().data();
        std::vector<double> gathered;
        std::vector<double> d_expert;
        for (std::size_t j = 0; j < experts; ++j) {
            const std::vector<std::size_t>& rows = routes[j];
            if (rows.empty()) {
                continue;
            }
            const std::vector<double>& e = expert_out[j];
            if (gates.requires_grad()) {
                std::span<double> dg = tape.grad_buffer(gates);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    double dot = 0.0;
                    for (std::size_t k = 0; k < o; ++k) {
                        dot += g[rows[r] * o + k] * e[r * o + k];
                    }
                    dg[rows[r] * experts + j] += dot;
                }
            }
            d_expert.resize(rows.size() * o);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const double w = gv[rows[r] * experts + j];
                for (std::size_t k = 0; k < o; ++k) {
                    d_expert[r * o + k] = w * g[rows[r] * o + k];
                }
            }
            if (!bias_vars.empty() && bias_vars[j].requires_grad()) {
                std::span<double> db = tape.grad_buffer(bias_vars[j]);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    for (std::size_t k = 0; k < o; ++k) {
                        db[k] += d_expert[r * o + k];
                    }
                }
            }
            if (weight_vars[j].requires_grad()) {
                gathered.resize(rows.size() * d);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    std::copy(xv + rows[r] * d, xv + (rows[r] + 1) * d, gathered.data() + r * d);
                }
                kernels::gemm(gathered.data(), true, d_expert.data(), false,
                              tape.grad_buffer(weight_vars[j]).data(), d, o, rows.size(), true);
            }
            if (x.requires_grad()) {
                gathered.resize(rows.size() * d);
                kernels::gemm(d_expert.data(), false, weight_vars[j].value().data(), true, gathered.data(),
                              rows.size(), d, o, false);
                std::span<double> dx = tape.grad_buffer(x);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    for (std::size_t k = 0; k < d; ++k) {
                        dx[rows[r] * d + k] += gathered[r * d + k];
                    }
                }
            }
        }
    }, "sparse_expert_mix");
}

} // namespace lgest
