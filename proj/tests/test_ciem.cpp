// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "lgest/ciem.hpp"
#include "lgest/error.hpp"

using namespace lgest;
using test::random_tensor;

namespace {

std::vector<double> softmax_row(const Tensor& x, const Tensor& w, std::size_t row) {
    const std::size_t d = w.dim(0), m = w.dim(1);
    std::vector<double> z(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
            z[j] += x[row * d + k] * w[k * m + j];
        }
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        s += v;
    }
    for (double& v : z) {
        v /= s;
    }
    return z;
}

} // namespace

TEST_CASE("top2 gate keeps the two largest probabilities unrenormalized") {
    Rng rng(8);
    for (std::size_t m : {2u, 4u, 8u, 16u}) {
        const Tensor x = random_tensor({20, 5}, rng);
        const Tensor w = random_tensor({5, m}, rng, -2.0, 2.0);
        Tape tape;
        const GateOutput g = top2_gate(tape.constant(x), tape.constant(w));
        for (std::size_t t = 0; t < 20; ++t) {
            std::vector<double> p = softmax_row(x, w, t);
            std::vector<double> sorted = p;
            std::sort(sorted.rbegin(), sorted.rend());
            std::size_t nonzero = 0;
            for (std::size_t j = 0; j < m; ++j) {
                const double v = g.decision.weights[t * m + j];
                if (v != 0.0) {
                    ++nonzero;
                    CHECK(v == doctest::Approx(p[j]).epsilon(1e-12));
                }
            }
            CHECK(nonzero == 2);
            const auto [a, b] = g.decision.indices[t];
            CHECK(p[a] == doctest::Approx(sorted[0]).epsilon(1e-12));
            CHECK(p[b] == doctest::Approx(sorted[1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("top2 ties go to the lower index") {
    CHECK(top2_indices(Tensor::from({1, 4}, {0.25, 0.25, 0.25, 0.25}))[0] == std::array<std::size_t, 2>{0, 1});
    CHECK(top2_indices(Tensor::from({1, 3}, {0.2, 0.4, 0.4}))[0] == std::array<std::size_t, 2>{1, 2});
    CHECK(top2_indices(Tensor::from({1, 2}, {0.9, 0.1}))[0] == std::array<std::size_t, 2>{0, 1});
    Tape tape;
    CHECK_THROWS_AS(top2_gate(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 1}))), ConfigError);
}

TEST_CASE("rmoe with zero experts is the identity") {
    Rng rng(2);
    ParameterStore store;
    RmoeLayer layer(store, "r", 6, 4, rng);
    for (Tensor* e : layer.experts) {
        std::fill(e->values().begin(), e->values().end(), 0.0);
    }
    const Tensor x = random_tensor({2, 5, 6}, rng);
    Tape tape;
    const RmoeOutput out = layer.forward(tape, tape.constant(x));
    CHECK(test::bit_equal(out.output.value(), x));
}

TEST_CASE("unselected experts never influence a token") {
    Rng rng(4);
    ParameterStore store;
    RmoeLayer layer(store, "r", 5, 8, rng);
    const Tensor x = random_tensor({1, 12, 5}, rng);
    Tape before;
    const RmoeOutput ref = layer.forward(before, before.constant(x));
    const Tensor baseline = ref.output.value();
    for (std::size_t j = 0; j < 8; ++j) {
        const Tensor saved = *layer.experts[j];
        std::fill(layer.experts[j]->values().begin(), layer.experts[j]->values().end(), 0.0);
        Tape tape;
        const Tensor out = layer.forward(tape, tape.constant(x)).output.value();
        for (std::size_t t = 0; t < 12; ++t) {
            const auto sel = ref.gates.indices[t];
            if (sel[0] == j || sel[1] == j) {
                continue;
            }
            for (std::size_t c = 0; c < 5; ++c) {
                CHECK(out[t * 5 + c] == baseline[t * 5 + c]);
            }
        }
        *layer.experts[j] = saved;
    }
}

TEST_CASE("cross attention shapes and row-stochastic weights") {
    Rng rng(6);
    ParameterStore store;
    CrossAttention attn(store, "ca", 4, 6, 8, rng);
    Tape tape;
    const AttentionOutput out = attn.forward(tape, tape.constant(random_tensor({2, 5, 4}, rng)),
                                             tape.constant(random_tensor({2, 3, 6}, rng)),
                                             tape.constant(random_tensor({2, 3, 6}, rng)));
    CHECK(out.output.shape() == Shape{2, 5, 8});
    CHECK(out.attention.shape() == Shape{2, 5, 3});
    for (std::size_t r = 0; r < 10; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            s += out.attention.value()[r * 3 + j];
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(attn.forward(tape, tape.constant(random_tensor({2, 5, 4}, rng)),
                                 tape.constant(random_tensor({2, 3, 6}, rng)),
                                 tape.constant(random_tensor({2, 4, 6}, rng))),
                    DimensionError);
}

TEST_CASE("attention with identical keys averages the values") {
    Rng rng(7);
    ParameterStore store;
    CrossAttention attn(store, "ca", 3, 3, 3, rng);
    Tensor k({1, 4, 3});
    for (std::size_t t = 0; t < 4; ++t) {
        k[t * 3 + 0] = 1.0;
        k[t * 3 + 1] = -2.0;
        k[t * 3 + 2] = 0.5;
    }
    Tape tape;
    const AttentionOutput out =
        attn.forward(tape, tape.constant(random_tensor({1, 2, 3}, rng)), tape.constant(k), tape.constant(k));
    for (double a : out.attention.value().values()) {
        CHECK(a == doctest::Approx(0.25).epsilon(1e-14));
    }
}

TEST_CASE("ciem blocks map widths and validate configs") {
    Rng rng(9);
    ParameterStore store;
    Ciem same(store, "a", CiemConfig{.d_q = 8, .d_kv = 8, .d_out = 8}, rng);
    CHECK_FALSE(same.residual_proj.has_value());
    Ciem down(store, "b", CiemConfig{.d_q = 8, .d_kv = 4, .d_out = 4}, rng);
    CHECK(down.residual_proj.has_value());
    Tape tape;
    const CiemOutput out = down.forward(tape, tape.constant(random_tensor({2, 9, 8}, rng)),
                                        tape.constant(random_tensor({2, 9, 4}, rng)),
                                        tape.constant(random_tensor({2, 9, 4}, rng)));
    CHECK(out.output.shape() == Shape{2, 9, 4});
    CHECK(out.gates.indices.size() == 18);
    CHECK_THROWS_AS(CiemConfig({.d_q = 8, .d_kv = 8, .d_out = 8, .n_experts = 1}).validate(), ConfigError);
    CHECK_THROWS_AS(CiemConfig({.d_q = 8, .d_kv = 8, .d_out = 8, .n_experts = 4, .d_attn = 6}).validate(),
                    DimensionError);
}
