// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "lgest/error.hpp"
#include "lgest/ops.hpp"

using namespace lgest;
using lgest::test::random_tensor;

namespace {

// Direct loop cross-correlation used as the convolution oracle.
Tensor naive_conv(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad) {
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
    Tensor out({n, cout, oh, ow});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < cout; ++o)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < cin; ++c)
                        for (std::size_t u = 0; u < k; ++u)
                            for (std::size_t v = 0; v < k; ++v) {
                                const long r = static_cast<long>(i * stride + u) - static_cast<long>(pad);
                                const long s = static_cast<long>(j * stride + v) - static_cast<long>(pad);
                                if (r < 0 || s < 0 || r >= static_cast<long>(h) || s >= static_cast<long>(wd)) {
                                    continue;
                                }
                                acc += x[((b * cin + c) * h + r) * wd + s] * w[((o * cin + c) * k + u) * k + v];
                            }
                    out[((b * cout + o) * oh + i) * ow + j] = acc;
                }
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace

TEST_CASE("matmul hand example") {
    Tape tape;
    Var a = tape.constant(Tensor::from({2, 2}, {1, 2, 3, 4}));
    Var b = tape.constant(Tensor::from({2, 2}, {5, 6, 7, 8}));
    const Tensor& c = matmul(a, b).value();
    CHECK(c[0] == 19.0);
    CHECK(c[1] == 22.0);
    CHECK(c[2] == 43.0);
    CHECK(c[3] == 50.0);
    CHECK_THROWS_AS(matmul(a, tape.constant(Tensor({3, 2}))), DimensionError);
}

TEST_CASE("linear applies to every row and adds the bias") {
    Tape tape;
    Var x = tape.constant(Tensor::from({2, 1, 2}, {1, 0, 0, 1}));
    Var w = tape.constant(Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6}));
    Var b = tape.constant(Tensor::from({3}, {10, 20, 30}));
    const Tensor& y = linear(x, w, b).value();
    CHECK(y.shape() == Shape{2, 1, 3});
    CHECK(y[0] == 11.0);
    CHECK(y[5] == 36.0);
}

TEST_CASE("elementwise ops and shape checks") {
    Tape tape;
    Var a = tape.constant(Tensor::from({3}, {1, -2, 3}));
    Var b = tape.constant(Tensor::from({3}, {4, 5, -6}));
    CHECK(add(a, b).value()[2] == -3.0);
    CHECK(sub(a, b).value()[1] == -7.0);
    CHECK(mul(a, b).value()[2] == -18.0);
    CHECK(scale(a, 0.5).value()[1] == -1.0);
    CHECK(leaky_relu(a).value()[1] == doctest::Approx(-0.02));
    CHECK(sum(a).value().item() == 2.0);
    CHECK_THROWS_AS(add(a, tape.constant(Tensor({2}))), DimensionError);
    CHECK_THROWS_AS(leaky_relu(a, 1.5), ConfigError);
    CHECK_THROWS_AS(leaky_relu(a, 0.0), ConfigError);
}

TEST_CASE("token layout round trip") {
    Rng rng(1);
    Tape tape;
    const Tensor x = random_tensor({2, 3, 2, 4}, rng);
    Var tokens = nchw_to_tokens(tape.constant(x));
    CHECK(tokens.shape() == Shape{2, 8, 3});
    // token (b, i*W + j) channel c equals x[b, c, i, j]
    CHECK(tokens.value()[(1 * 8 + 5) * 3 + 2] == x[((1 * 3 + 2) * 2 + 1) * 4 + 1]);
    CHECK(test::bit_equal(tokens_to_nchw(tokens, 2, 4).value(), x));
}

TEST_CASE("concat_last and mean_axis") {
    Tape tape;
    Var a = tape.constant(Tensor::from({2, 1}, {1, 2}));
    Var b = tape.constant(Tensor::from({2, 2}, {3, 4, 5, 6}));
    const Tensor& c = concat_last(std::vector<Var>{a, b}).value();
    CHECK(c.shape() == Shape{2, 3});
    CHECK(c[3] == 2.0);
    CHECK(c[5] == 6.0);
    const Tensor& m = mean_axis(b, 0).value();
    CHECK(m.shape() == Shape{2});
    CHECK(m[0] == 4.0);
    CHECK(m[1] == 5.0);
}

TEST_CASE("softmax rows are distributions and shift invariant") {
    Rng rng(2);
    const Tensor x = random_tensor({4, 6}, rng, -3.0, 3.0);
    Tensor shifted = x;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            shifted[i * 6 + j] += 100.0 * static_cast<double>(i + 1);
        }
    }
    Tape tape;
    const Tensor& p = softmax(tape.constant(x), 1).value();
    const Tensor& q = softmax(tape.constant(shifted), 1).value();
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            s += p[i * 6 + j];
            CHECK(p[i * 6 + j] == doctest::Approx(q[i * 6 + j]).epsilon(1e-12));
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
    const Tensor big = Tensor::from({1, 2}, {1000.0, 0.0});
    CHECK(softmax(tape.constant(big), 1).value()[0] == 1.0);
}

TEST_CASE("layer_norm standardizes the last axis") {
    Rng rng(3);
    Tape tape;
    const Tensor x = random_tensor({3, 8}, rng, -5.0, 5.0);
    const Tensor& y =
        layer_norm(tape.constant(x), tape.constant(Tensor::full({8}, 1.0)), tape.constant(Tensor({8}))).value();
    for (std::size_t r = 0; r < 3; ++r) {
        double mean = 0.0, var = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            mean += y[r * 8 + j] / 8.0;
        }
        for (std::size_t j = 0; j < 8; ++j) {
            var += (y[r * 8 + j] - mean) * (y[r * 8 + j] - mean) / 8.0;
        }
        CHECK(std::abs(mean) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("batch_norm train statistics and running averages") {
    Tensor mean({1}), var = Tensor::full({1}, 1.0), steps({1});
    Tape tape;
    Var x = tape.constant(Tensor::from({2, 1, 1, 2}, {1, 2, 3, 4}));
    Var g = tape.constant(Tensor::full({1}, 1.0));
    Var b = tape.constant(Tensor({1}));
    const Tensor& y = batch_norm(x, g, b, {&mean, &var, &steps}, Mode::train).value();
    // batch mean 2.5, population variance 1.25
    CHECK(y[0] == doctest::Approx(-1.5 / std::sqrt(1.25 + 1e-5)));
    CHECK(mean[0] == doctest::Approx(0.25));
    CHECK(var[0] == doctest::Approx(0.9 + 0.125));
    CHECK(steps[0] == 1.0);

    Tensor m2({1}), v2 = Tensor::full({1}, 1.0), s2({1});
    CHECK_THROWS_AS(batch_norm(x, g, b, {&m2, &v2, &s2}, Mode::eval), StateError);
    s2[0] = 1.0;
    m2[0] = 1.0;
    v2[0] = 4.0;
    const Tensor& e = batch_norm(x, g, b, {&m2, &v2, &s2}, Mode::eval).value();
    CHECK(e[3] == doctest::Approx(3.0 / std::sqrt(4.0 + 1e-5)));
}

TEST_CASE("conv2d matches the direct loop oracle") {
    Rng rng(4);
    for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 0}, {1, 1}, {2, 1}, {2, 0}}) {
        const Tensor x = random_tensor({2, 3, 5, 5}, rng);
        const Tensor w = random_tensor({4, 3, 3, 3}, rng);
        Tape tape;
        const Tensor& y = conv2d(tape.constant(x), tape.constant(w), std::nullopt, stride, pad).value();
        const Tensor expected = naive_conv(x, w, stride, pad);
        REQUIRE(y.shape() == expected.shape());
        CHECK(test::max_abs_diff(y, expected) < 1e-12);
    }
    Tape tape;
    CHECK_THROWS_AS(conv2d(tape.constant(Tensor({1, 1, 4, 4})), tape.constant(Tensor({1, 1, 3, 3})), std::nullopt,
                           2, 0),
                    DimensionError);
}

TEST_CASE("deconv2d is the adjoint of conv2d with the same weights") {
    Rng rng(5);
    for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 1}, {1, 0}}) {
        const Tensor w = random_tensor({4, 3, 3, 3}, rng); // conv: 3 -> 4 channels
        const Tensor x = random_tensor({2, 3, 7, 7}, rng);
        Tape tape;
        const Tensor cx = conv2d(tape.constant(x), tape.constant(w), std::nullopt, stride, pad).value();
        const Tensor y = random_tensor(cx.shape(), rng);
        const Tensor& dy = deconv2d(tape.constant(y), tape.constant(w), std::nullopt, stride, pad).value();
        REQUIRE(dy.shape() == x.shape());
        CHECK(dot(cx, y) == doctest::Approx(dot(x, dy)).epsilon(1e-12));
    }
}

TEST_CASE("deconv2d output size") {
    Tape tape;
    Var y = deconv2d(tape.constant(Tensor({1, 2, 4, 4})), tape.constant(Tensor({2, 5, 3, 3})), std::nullopt, 2, 1);
    CHECK(y.shape() == Shape{1, 5, 7, 7});
}

TEST_CASE("cross_entropy closed forms") {
    Tape tape;
    const std::vector<std::size_t> labels{0, 3};
    CHECK(cross_entropy(tape.constant(Tensor({2, 4})), labels).value().item() ==
          doctest::Approx(std::log(4.0)).epsilon(1e-15));
    const Tensor sure = Tensor::from({1, 2}, {50.0, -50.0});
    const std::vector<std::size_t> zero{0};
    CHECK(cross_entropy(tape.constant(sure), zero).value().item() < 1e-40);
    const std::vector<std::size_t> bad{4, 0};
    CHECK_THROWS_AS(cross_entropy(tape.constant(Tensor({2, 4})), bad), IndexError);
}

TEST_CASE("sparse_expert_mix equals the dense masked oracle") {
    Rng rng(6);
    const std::size_t t = 5, d = 3, o = 2, m = 4;
    const Tensor x = random_tensor({t, d}, rng);
    const Tensor gates = random_tensor({t, m}, rng, 0.0, 1.0);
    std::vector<Tensor> w, b;
    for (std::size_t j = 0; j < m; ++j) {
        w.push_back(random_tensor({d, o}, rng));
        b.push_back(random_tensor({o}, rng));
    }
    const std::vector<std::array<std::size_t, 2>> sel{{0, 1}, {3, 2}, {1, 3}, {2, 0}, {1, 2}};
    Tape tape;
    std::vector<Var> wv, bv;
    for (std::size_t j = 0; j < m; ++j) {
        wv.push_back(tape.constant(w[j]));
        bv.push_back(tape.constant(b[j]));
    }
    const Tensor& y = sparse_expert_mix(tape.constant(x), tape.constant(gates), sel, wv, bv).value();
    for (std::size_t r = 0; r < t; ++r) {
        for (std::size_t c = 0; c < o; ++c) {
            double expected = 0.0;
            for (std::size_t e : sel[r]) {
                double z = b[e][c];
                for (std::size_t k = 0; k < d; ++k) {
                    z += x[r * d + k] * w[e][k * o + c];
                }
                expected += gates[r * m + e] * z;
            }
            CHECK(y[r * o + c] == doctest::Approx(expected).epsilon(1e-14));
        }
    }
}
