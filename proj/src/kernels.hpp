// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace lgest::kernels {

/// Row-major C[m×n] = op(A)·op(B) (or += when accumulate). op(A) is [m×k].
void gemm(const double* a, bool transpose_a, const double* b, bool transpose_b, double* c, std::size_t m,
          std::size_t n, std::size_t k, bool accumulate);

struct ConvGeometry {
    std::size_t channels;
    std::size_t height;
    std::size_t width;
    std::size_t kernel;
    std::size_t stride;
    std::size_t padding;
    std::size_t out_height;
    std::size_t out_width;
};

/// image[channels×H×W] → cols[(channels·k·k) × (out_h·out_w)]
void im2col(const double* image, const ConvGeometry& g, double* cols);
/// Scatter-add of cols back into image[channels×H×W] (image is not cleared).
void col2im(const double* cols, const ConvGeometry& g, double* image);

} // namespace lgest::kernels
