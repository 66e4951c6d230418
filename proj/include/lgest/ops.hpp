// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "lgest/tape.hpp"
#include "lgest/tensor.hpp"

// Differentiable primitives. Every function records one node on the tape of
// its inputs and throws DimensionError on incompatible shapes.
namespace lgest {

enum class Mode { train, eval };

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// --- linear algebra -------------------------------------------------------

/// [m×k] · [k×n] → [m×n]
Var matmul(Var a, Var b);
/// [B×m×k] · [B×k×n] → [B×m×n]
Var batched_matmul(Var a, Var b);
/// [B×m×n] → [B×n×m]
Var transpose_last(Var a);
/// x[...×d] · w[d×o] (+ bias[o]) applied to every row of x.
Var linear(Var x, Var w, std::optional<Var> bias = std::nullopt);

// --- elementwise ----------------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// Elementwise product with a constant tensor; no gradient flows into `m`.
Var mask(Var a, const Tensor& m);
Var leaky_relu(Var x, double slope = kLeakySlope);

// --- shape and reductions -------------------------------------------------

Var sum(Var a);
/// Mean over one axis; the axis is removed from the shape.
Var mean_axis(Var a, std::size_t axis);
Var reshape(Var a, Shape shape);
/// Concatenates rank-2 tensors with equal leading dimension along axis 1.
Var concat_last(std::span<const Var> parts);
/// [N×C×H×W] → [N×(H·W)×C], one token per spatial position.
Var nchw_to_tokens(Var x);
/// Inverse of nchw_to_tokens.
Var tokens_to_nchw(Var x, std::size_t height, std::size_t width);

// --- normalisation --------------------------------------------------------

/// Max-subtracted softmax along `axis`.
Var softmax(Var x, std::size_t axis);
/// Normalises the last axis (population variance) then applies gamma/beta.
Var layer_norm(Var x, Var gamma, Var beta, double eps = kNormEps);

/// Running statistics of one BatchNorm layer. `steps` is a one-element
/// tensor counting train-mode updates; eval mode requires steps > 0.
struct BatchNormStats {
    Tensor* running_mean = nullptr;
    Tensor* running_var = nullptr;
    Tensor* steps = nullptr;
};

/// Per-channel normalisation of x[N×C×...]. Train mode uses batch statistics
/// (population variance) and updates the running stats with `momentum`.
Var batch_norm(Var x, Var gamma, Var beta, BatchNormStats stats, Mode mode, double momentum = kBatchNormMomentum,
               double eps = kNormEps);

// --- convolution ----------------------------------------------------------

/// Cross-correlation. x[N×Cin×H×W], w[Cout×Cin×k×k], bias[Cout].
Var conv2d(Var x, Var w, std::optional<Var> bias, std::size_t stride = 1, std::size_t padding = 0);
/// Transposed convolution (adjoint of conv2d). x[N×Cin×H×W], w[Cin×Cout×k×k].
/// Output side is (H-1)·stride - 2·padding + k.
Var deconv2d(Var x, Var w, std::optional<Var> bias, std::size_t stride = 1, std::size_t padding = 0);

// --- loss -----------------------------------------------------------------

/// Mean over the batch of -log softmax(logits)[label]. logits[N×n].
Var cross_entropy(Var logits, std::span<const std::size_t> labels);

// --- mixture of experts ---------------------------------------------------

/// Per-row sparse mixture: out[t] = Σ_{j ∈ selected[t]} gates[t, j] · (x[t] · weights[j] + biases[j]).
///
/// x[T×d], gates[T×M], weights: M tensors [d×o], biases: empty or M tensors [o].
/// Only the selected experts are evaluated, so unselected expert parameters
/// never touch the output or receive gradient.
Var sparse_expert_mix(Var x, Var gates, std::span<const std::array<std::size_t, 2>> selected,
                      std::span<const Var> weights, std::span<const Var> biases);

} // namespace lgest
