// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "kernels.hpp"

#include <algorithm>
#include <cstddef>

#include <Eigen/Core>

namespace lgest::kernels {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

} // namespace

void gemm(const double* a, bool transpose_a, const double* b, bool transpose_b, double* c, std::size_t m,
          std::size_t n, std::size_t k, bool accumulate) {
    const auto em = static_cast<Eigen::Index>(m);
    const auto en = static_cast<Eigen::Index>(n);
    const auto ek = static_cast<Eigen::Index>(k);
    ConstMap ma(a, transpose_a ? ek : em, transpose_a ? em : ek);
    ConstMap mb(b, transpose_b ? en : ek, transpose_b ? ek : en);
    MutMap mc(c, em, en);
    if (!accumulate) {
        mc.setZero();
    }
    if (transpose_a && transpose_b) {
        mc.noalias() += ma.transpose() * mb.transpose();
    } else if (transpose_a) {
        mc.noalias() += ma.transpose() * mb;
    } else if (transpose_b) {
        mc.noalias() += ma * mb.transpose();
    } else {
        mc.noalias() += ma * mb;
    }
}

void im2col(const double* image, const ConvGeometry& g, double* cols) {
    const std::size_t out_plane = g.out_height * g.out_width;
    for (std::size_t c = 0; c < g.channels; ++c) {
        const double* plane = image + c * g.height * g.width;
        for (std::size_t ki = 0; ki < g.kernel; ++ki) {
            for (std::size_t kj = 0; kj < g.kernel; ++kj) {
                double* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * out_plane;
                for (std::size_t oy = 0; oy < g.out_height; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) -
                                              static_cast<std::ptrdiff_t>(g.padding);
                    double* dst = row + oy * g.out_width;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
                        std::fill(dst, dst + g.out_width, 0.0);
                        continue;
                    }
                    const double* src = plane + static_cast<std::size_t>(iy) * g.width;
                    for (std::size_t ox = 0; ox < g.out_width; ++ox) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) -
                                                  static_cast<std::ptrdiff_t>(g.padding);
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width))
                                      ? 0.0
                                      : src[static_cast<std::size_t>(ix)];
                    }
                }
            }
        }
    }
}

void col2im(const double* cols, const ConvGeometry& g, double* image) {
    const std::size_t out_plane = g.out_height * g.out_width;
    for (std::size_t c = 0; c < g.channels; ++c) {
        double* plane = image + c * g.height * g.width;
        for (std::size_t ki = 0; ki < g.kernel; ++ki) {
            for (std::size_t kj = 0; kj < g.kernel; ++kj) {
                const double* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * out_plane;
                for (std::size_t oy = 0; oy < g.out_height; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) -
                                              static_cast<std::ptrdiff_t>(g.padding);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
                        continue;
                    }
                    double* dst = plane + static_cast<std::size_t>(iy) * g.width;
                    const double* src = row + oy * g.out_width;
                    for (std::size_t ox = 0; ox < g.out_width; ++ox) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) -
                                                  static_cast<std::ptrdiff_t>(g.padding);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) {
                            dst[static_cast<std::size_t>(ix)] += src[ox];
                        }
                    }
                }
            }
        }
    }
}

} // namespace lgest::kernels
