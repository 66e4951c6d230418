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

std::size_t kernel_side(Var w, const char* op) {
    if (w.value().rank() != 4 || w.dim(2) != w.dim(3) || w.dim(2) == 0) {
        throw DimensionError(std::string(op) + ": weight must be [A x B x k x k], got " + to_string(w.shape()));
    }
    return w.dim(2);
}

std::size_t conv_out_side(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding,
                          const char* op) {
    const std::size_t span = in + 2 * padding;
    if (stride == 0 || span < kernel || (span - kernel) % stride != 0) {
        throw DimensionError(std::string(op) + ": input side " + std::to_string(in) + " with kernel " +
                             std::to_string(kernel) + ", stride " + std::to_string(stride) + ", padding " +
                             std::to_string(padding) + " gives a non-integral output size");
    }
    return (span - kernel) / stride + 1;
}

void check_bias(const std::optional<Var>& bias, std::size_t channels, const char* op) {
    if (bias && bias->shape() != Shape{channels}) {
        throw DimensionError(std::string(op) + ": bias must have shape [" + std::to_string(channels) + "]");
    }
}

void add_bias(Tensor& out, const Var& bias, std::size_t n, std::size_t channels, std::size_t plane) {
    const double* b = bias.value().data();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            double* p = out.data() + (i * channels + c) * plane;
            for (std::size_t k = 0; k < plane; ++k) {
                p[k] += b[c];
            }
        }
    }
}

void bias_grad(Tape& tape, const Var& bias, std::span<const double> g, std::size_t n, std::size_t channels,
               std::size_t plane) {
    std::span<double> db = tape.grad_buffer(bias);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const double* p = g.data() + (i * channels + c) * plane;
            for (std::size_t k = 0; k < plane; ++k) {
                db[c] += p[k];
            }
        }
    }
}

} // namespace

Var conv2d(Var x, Var w, std::optional<Var> bias, std::size_t stride, std::size_t padding) {
    if (x.value().rank() != 4) {
        throw DimensionError("conv2d: input must be [N x C x H x W], got " + to_string(x.shape()));
    }
    const std::size_t k = kernel_side(w, "conv2d");
    const std::size_t n = x.dim(0);
    const std::size_t c_in = x.dim(1);
    const std::size_t c_out = w.dim(0);
    if (w.dim(1) != c_in) {
        throw DimensionError("conv2d: weight " + to_string(w.shape()) + " expects " + std::to_string(w.dim(1)) +
                             " input channels, got " + std::to_string(c_in));
    }
    check_bias(bias, c_out, "conv2d");
    const kernels::ConvGeometry geo{c_in,
                                    x.dim(2),
                                    x.dim(3),
                                    k,
                                    stride,
                                    padding,
                                    conv_out_side(x.dim(2), k, stride, padding, "conv2d"),
                                    conv_out_side(x.dim(3), k, stride, padding, "conv2d")};
    const std::size_t in_plane = geo.height * geo.width;
    const std::size_t out_plane = geo.out_height * geo.out_width;
    const std::size_t patch = c_in * k * k;
    Tensor out({n, c_out, geo.out_height, geo.out_width});
    std::vector<double> cols(patch * out_plane);
    for (std::size_t i = 0; i < n; ++i) {
        kernels::im2col(x.value().data() + i * c_in * in_plane, geo, cols.data());
        kernels::gemm(w.value().data(), false, cols.data(), false, out.data() + i * c_out * out_plane, c_out,
                      out_plane, patch, false);
    }
    std::vector<Var> inputs{x, w};
    if (bias) {
        add_bias(out, *bias, n, c_out, out_plane);
        inputs.push_back(*bias);
    }
    return x.tape().record(std::move(out), inputs,
                           [x, w, bias, geo, n, c_in, c_out, in_plane, out_plane, patch](std::span<const double> g,
                                                                                          const Tensor&) {
        Tape& tape = x.tape();
        if (bias && bias->requires_grad()) {
            bias_grad(tape, *bias, g, n, c_out, out_plane);
        }
        std::vector<double> cols(patch * out_plane);
        for (std::size_t i = 0; i < n; ++i) {
            const double* gi = g.data() + i * c_out * out_plane;
            if (w.requires_grad()) {
                kernels::im2col(x.value().data() + i * c_in * in_plane, geo, cols.data());
                kernels::gemm(gi, false, cols.data(), true, tape.grad_buffer(w).data(), c_out, patch, out_plane,
                              true);
            }
            if (x.requires_grad()) {
                kernels::gemm(w.value().data(), true, gi, false, cols.data(), patch, out_plane, c_out, false);
                kernels::col2im(cols.data(), geo, tape.grad_buffer(x).data() + i * c_in * in_plane);
            }
        }
    }, "conv2d");
}

Var deconv2d(Var x, Var w, std::optional<Var> bias, std::size_t stride, std::size_t padding) {
    if (x.value().rank() != 4) {
        throw DimensionError("deconv2d: input must be [N x C x H x W], got " + to_string(x.shape()));
    }
    const std::size_t k = kernel_side(w, "deconv2d");
    const std::size_t n = x.dim(0);
    const std::size_t c_in = x.dim(1);
    const std::size_t c_out = w.dim(1);
    if (w.dim(0) != c_in) {
        throw DimensionError("deconv2d: weight " + to_string(w.shape()) + " expects " + std::to_string(w.dim(0)) +
                             " input channels, got " + std::to_string(c_in));
    }
    check_bias(bias, c_out, "deconv2d");
    if (stride == 0 || x.dim(2) == 0 || x.dim(3) == 0) {
        throw DimensionError("deconv2d: stride and input sides must be positive");
    }
    const std::size_t full_h = (x.dim(2) - 1) * stride + k;
    const std::size_t full_w = (x.dim(3) - 1) * stride + k;
    if (full_h <= 2 * padding || full_w <= 2 * padding) {
        throw DimensionError("deconv2d: padding " + std::to_string(padding) + " leaves no output for input " +
                             to_string(x.shape()));
    }
    // Geometry of the adjoint convolution: output image → x.
    const kernels::ConvGeometry geo{c_out, full_h - 2 * padding, full_w - 2 * padding, k, stride, padding,
                                    x.dim(2), x.dim(3)};
    const std::size_t in_plane = geo.out_height * geo.out_width;
    const std::size_t out_plane = geo.height * geo.width;
    const std::size_t patch = c_out * k * k;
    Tensor out({n, c_out, geo.height, geo.width});
    std::vector<double> cols(patch * in_plane);
    for (std::size_t i = 0; i < n; ++i) {
        kernels::gemm(w.value().data(), true, x.value().data() + i * c_in * in_plane, false, cols.data(), patch,
                      in_plane, c_in, false);
        kernels::col2im(cols.data(), geo, out.data() + i * c_out * out_plane);
    }
    std::vector<Var> inputs{x, w};
    if (bias) {
        add_bias(out, *bias, n, c_out, out_plane);
        inputs.push_back(*bias);
    }
    return x.tape().record(std::move(out), inputs,
                           [x, w, bias, geo, n, c_in, c_out, in_plane, out_plane, patch](std::span<const double> g,
                                                                                          const Tensor&) {
        Tape& tape = x.tape();
        if (bias && bias->requires_grad()) {
            bias_grad(tape, *bias, g, n, c_out, out_plane);
        }
        std::vector<double> cols(patch * in_plane);
        for (std::size_t i = 0; i < n; ++i) {
            kernels::im2col(g.data() + i * c_out * out_plane, geo, cols.data());
            if (x.requires_grad()) {
                kernels::gemm(w.value().data(), false, cols.data(), false,
                              tape.grad_buffer(x).data() + i * c_in * in_plane, c_in, in_plane, patch, true);
            }
            if (w.requires_grad()) {
                kernels::gemm(x.value().data() + i * c_in * in_plane, false, cols.data(), true,
                              tape.grad_buffer(w).data(), c_in, patch, in_plane, true);
            }
        }
    }, "deconv2d");
}

} // namespace lgest
