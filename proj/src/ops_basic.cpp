// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "lgest/error.hpp"
#include "lgest/ops.hpp"

namespace lgest {

namespace {

void require_rank(Var v, std::size_t rank, const char* op) {
    if (v.value().rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                             to_string(v.shape()));
    }
}

void require_same_shape(Var a, Var b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                             to_string(b.shape()));
    }
}

} // namespace

Var matmul(Var a, Var b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0);
    const std::size_t k = a.dim(1);
    const std::size_t n = b.dim(1);
    if (b.dim(0) != k) {
        throw DimensionError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " +
                             to_string(b.shape()));
    }
    Tensor out({m, n});
    kernels::gemm(a.value().data(), false, b.value().data(), false, out.data(), m, n, k, false);
    const std::array inputs{a, b};
    return a.tape().record(std::move(out), inputs, [a, b, m, n, k](std::span<const double> g, const Tensor&) {
        Tape& tape = a.tape();
        if (a.requires_grad()) {
            kernels::gemm(g.data(), false, b.value().data(), true, tape.grad_buffer(a).data(), m, k, n, true);
        }
        if (b.requires_grad()) {
            kernels::gemm(a.value().data(), true, g.data(), false, tape.grad_buffer(b).data(), k, n, m, true);
        }
    }, "matmul");
}

Var batched_matmul(Var a, Var b) {
    require_rank(a, 3, "batched_matmul");
    require_rank(b, 3, "batched_matmul");
    const std::size_t batch = a.dim(0);
    const std::size_t m = a.dim(1);
    const std::size_t k = a.dim(2);
    const std::size_t n = b.dim(2);
    if (b.dim(0) != batch || b.dim(1) != k) {
        throw DimensionError("batched_matmul: incompatible shapes " + to_string(a.shape()) + " x " +
                             to_string(b.shape()));
    }
    Tensor out({batch, m, n});
    for (std::size_t i = 0; i < batch; ++i) {
        kernels::gemm(a.value().data() + i * m * k, false, b.value().data() + i * k * n, false,
                      out.data() + i * m * n, m, n, k, false);
    }
    const std::array inputs{a, b};
    return a.tape().record(std::move(out), inputs, [a, b, batch, m, n, k](std::span<const double> g, const Tensor&) {
        Tape& tape = a.tape();
        for (std::size_t i = 0; i < batch; ++i) {
            const double* gi = g.data() + i * m * n;
            if (a.requires_grad()) {
                kernels::gemm(gi, false, b.value().data() + i * k * n, true, tape.grad_buffer(a).data() + i * m * k,
                              m, k, n, true);
            }
            if (b.requires_grad()) {
                kernels::gemm(a.value().data() + i * m * k, true, gi, false, tape.grad_buffer(b).data() + i * k * n,
                              k, n, m, true);
            }
        }
    }, "batched_matmul");
}

Var transpose_last(Var a) {
    require_rank(a, 3, "transpose_last");
    const std::size_t batch = a.dim(0);
    const std::size_t m = a.dim(1);
    const std::size_t n = a.dim(2);
    Tensor out({batch, n, m});
    const double* src = a.value().data();
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out[(b * n + j) * m + i] = src[(b * m + i) * n + j];
            }
        }
    }
    const std::array inputs{a};
    return a.tape().record(std::move(out), inputs, [a, batch, m, n](std::span<const double> g, const Tensor&) {
        std::span<double> da = a.tape().grad_buffer(a);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    da[(b * m + i) * n + j] += g[(b * n + j) * m + i];
                }
            }
        }
    }, "transpose_last");
}

Var linear(Var x, Var w, std::optional<Var> bias) {
    require_rank(w, 2, "linear");
    if (x.value().rank() == 0 || x.shape().back() != w.dim(0)) {
        throw DimensionError("linear: input " + to_string(x.shape()) + " does not match weight " +
                             to_string(w.shape()));
    }
    const std::size_t d = w.dim(0);
    const std::size_t o = w.dim(1);
    const std::size_t rows = x.size() / d;
    if (bias && (bias->value().rank() != 1 || bias->dim(0) != o)) {
        throw DimensionError("linear: bias " + to_string(bias->shape()) + " does not match output width " +
                             std::to_string(o));
    }
    Shape out_shape = x.shape();
    out_shape.back() = o;
    Tensor out(out_shape);
    kernels::gemm(x.value().data(), false, w.value().data(), false, out.data(), rows, o, d, false);
    std::vector<Var> inputs{x, w};
    if (bias) {
        const double* b = bias->value().data();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < o; ++j) {
                out[r * o + j] += b[j];
            }
        }
        inputs.push_back(*bias);
    }
    return x.tape().record(std::move(out), inputs, [x, w, bias, rows, d, o](std::span<const double> g, const Tensor&) {
        Tape& tape = x.tape();
        if (x.requires_grad()) {
            kernels::gemm(g.data(), false, w.value().data(), true, tape.grad_buffer(x).data(), rows, d, o, true);
        }
        if (w.requires_grad()) {
            kernels::gemm(x.value().data(), true, g.data(), false, tape.grad_buffer(w).data(), d, o, rows, true);
        }
        if (bias && bias->requires_grad()) {
            std::span<double> db = tape.grad_buffer(*bias);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t j = 0; j < o; ++j) {
                    db[j] += g[r * o + j];
                }
            }
        }
    }, "linear");
}

Var add(Var a, Var b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.value()[i] + b.value()[i];
    }
    const std::array inputs{a, b};
    return a.tape().record(std::move(out), inputs, [a, b](std::span<const double> g, const Tensor&) {
        a.tape().accumulate(a, g);
        a.tape().accumulate(b, g);
    }, "add");
}

Var sub(Var a, Var b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.value()[i] - b.value()[i];
    }
    const std::array inputs{a, b};
    return a.tape().record(std::move(out), inputs, [a, b](std::span<const double> g, const Tensor&) {
        a.tape().accumulate(a, g);
        if (b.requires_grad()) {
            std::span<double> db = b.tape().grad_buffer(b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                db[i] -= g[i];
            }
        }
    }, "sub");
}

Var mul(Var a, Var b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.value()[i] * b.value()[i];
    }
    const std::array inputs{a, b};
    return a.tape().record(std::move(out), inputs, [a, b](std::span<const double> g, const Tensor&) {
        Tape& tape = a.tape();
        if (a.requires_grad()) {
            std::span<double> da = tape.grad_buffer(a);
            for (std::size_t i = 0; i < g.size(); ++i) {
                da[i] += g[i] * b.value()[i];
            }
        }
        if (b.requires_grad()) {
            std::span<double> db = tape.grad_buffer(b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                db[i] += g[i] * a.value()[i];
            }
        }
    }, "mul");
}

Var scale(Var a, double factor) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.value()[i] * factor;
    }
    const std::array inputs{a};
    return a.tape().record(std::move(out), inputs, [a, factor](std::span<const double> g, const Tensor&) {
        std::span<double> da = a.tape().grad_buffer(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i] * factor;
        }
    }, "scale");
}

Var mask(Var a, const Tensor& m) {
    if (a.shape() != m.shape()) {
        throw DimensionError("mask: shape mismatch " + to_string(a.shape()) + " vs " + to_string(m.shape()));
    }
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.value()[i] * m[i];
    }
    std::vector<double> factors(m.values().begin(), m.values().end());
    const std::array inputs{a};
    return a.tape().record(std::move(out), inputs, [a, factors = std::move(factors)](std::span<const double> g, const Tensor&) {
        std::span<double> da = a.tape().grad_buffer(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i] * factors[i];
        }
    }, "mask");
}

Var leaky_relu(Var x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) {
        throw ConfigError("leaky_relu: slope must lie in (0, 1)");
    }
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x.value()[i];
        out[i] = v >= 0.0 ? v : slope * v;
    }
    const std::array inputs{x};
    return x.tape().record(std::move(out), inputs, [x, slope](std::span<const double> g, const Tensor&) {
        std::span<double> dx = x.tape().grad_buffer(x);
        for (std::size_t i = 0; i < g.size(); ++i) {
            dx[i] += x.value()[i] >= 0.0 ? g[i] : slope * g[i];
        }
    }, "leaky_relu");
}

Var sum(Var a) {
    double total = 0.0;
    for (double v : a.value().values()) {
        total += v;
    }
    const std::array inputs{a};
    return a.tape().record(Tensor::scalar(total), inputs, [a](std::span<const double> g, const Tensor&) {
        std::span<double> da = a.tape().grad_buffer(a);
        for (double& v : da) {
            v += g[0];
        }
    }, "sum");
}

Var mean_axis(Var a, std::size_t axis) {
    const Shape& shape = a.shape();
    if (axis >= shape.size()) {
        throw DimensionError("mean_axis: axis " + std::to_string(axis) + " out of range for " + to_string(shape));
    }
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t i = 0; i < axis; ++i) {
        outer *= shape[i];
    }
    for (std::size_t i = axis + 1; i < shape.size(); ++i) {
        inner *= shape[i];
    }
    const std::size_t n = shape[axis];
    Shape out_shape;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != axis) {
            out_shape.push_back(shape[i]);
        }
    }
    if (out_shape.empty()) {
        out_shape.push_back(1);
    }
    Tensor out(out_shape);
    const double* src = a.value().data();
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < inner; ++i) {
                out[o * inner + i] += src[(o * n + j) * inner + i];
            }
        }
    }
    for (double& v : out.values()) {
        v *= inv;
    }
    const std::array inputs{a};
    return a.tape().record(std::move(out), inputs, [a, outer, n, inner, inv](std::span<const double> g, const Tensor&) {
        std::span<double> da = a.tape().grad_buffer(a);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < inner; ++i) {
                    da[(o * n + j) * inner + i] += g[o * inner + i] * inv;
                }
            }
        }
    }, "mean_axis");
}

Var reshape(Var a, Shape shape) {
    Tensor out = a.value().reshaped(std::move(shape));
    const std::array inputs{a};
    return a.tape().record(std::move(out), inputs, [a](std::span<const double> g, const Tensor&) { a.tape().accumulate(a, g); },
                           "reshape");
}

Var concat_last(std::span<const Var> parts) {
    if (parts.empty()) {
        throw DimensionError("concat_last: nothing to concatenate");
    }
    const std::size_t rows = parts[0].value().rank() == 2 ? parts[0].dim(0) : 0;
    std::size_t total = 0;
    std::vector<std::size_t> widths;
    for (const Var& p : parts) {
        if (p.value().rank() != 2 || p.dim(0) != rows) {
            throw DimensionError("concat_last: parts must be rank-2 with " + std::to_string(rows) + " rows, got " +
                                 to_string(p.shape()));
        }
        widths.push_back(p.dim(1));
        total += p.dim(1);
    }
    Tensor out({rows, total});
    std::size_t offset = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const double* src = parts[k].value().data();
        for (std::size_t r = 0; r < rows; ++r) {
            std::copy(src + r * widths[k], src + (r + 1) * widths[k], out.data() + r * total + offset);
        }
        offset += widths[k];
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return parts[0].tape().record(std::move(out), inputs,
                                  [inputs, widths, rows, total](std::span<const double> g, const Tensor&) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            if (inputs[k].requires_grad()) {
                std::span<double> dp = inputs[k].tape().grad_buffer(inputs[k]);
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < widths[k]; ++j) {
                        dp[r * widths[k] + j] += g[r * total + off + j];
                    }
                }
            }
            off += widths[k];
        }
    }, "concat_last");
}

Var nchw_to_tokens(Var x) {
    require_rank(x, 4, "nchw_to_tokens");
    const std::size_t n = x.dim(0);
    const std::size_t c = x.dim(1);
    const std::size_t plane = x.dim(2) * x.dim(3);
    Tensor out({n, plane, c});
    const double* src = x.value().data();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t p = 0; p < plane; ++p) {
                out[(b * plane + p) * c + ch] = src[(b * c + ch) * plane + p];
            }
        }
    }
    const std::array inputs{x};
    return x.tape().record(std::move(out), inputs, [x, n, c, plane](std::span<const double> g, const Tensor&) {
        std::span<double> dx = x.tape().grad_buffer(x);
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                for (std::size_t p = 0; p < plane; ++p) {
                    dx[(b * c + ch) * plane + p] += g[(b * plane + p) * c + ch];
                }
            }
        }
    }, "nchw_to_tokens");
}

Var tokens_to_nchw(Var x, std::size_t height, std::size_t width) {
    require_rank(x, 3, "tokens_to_nchw");
    const std::size_t n = x.dim(0);
    const std::size_t plane = x.dim(1);
    const std::size_t c = x.dim(2);
    if (plane != height * width) {
        throw DimensionError("tokens_to_nchw: " + std::to_string(plane) + " tokens cannot form a " +
                             std::to_string(height) + "x" + std::to_string(width) + " grid");
    }
    Tensor out({n, c, height, width});
    const double* src = x.value().data();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t p = 0; p < plane; ++p) {
                out[(b * c + ch) * plane + p] = src[(b * plane + p) * c + ch];
            }
        }
    }
    const std::array inputs{x};
    return x.tape().record(std::move(out), inputs, [x, n, c, plane](std::span<const double> g, const Tensor&) {
        std::span<double> dx = x.tape().grad_buffer(x);
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                for (std::size_t p = 0; p < plane; ++p) {
                    dx[(b * plane + p) * c + ch] += g[(b * c + ch) * plane + p];
                }
            }
        }
    }, "tokens_to_nchw");
}

} // namespace lgest
