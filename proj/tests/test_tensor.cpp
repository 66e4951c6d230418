// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgest/error.hpp"
#include "lgest/rng.hpp"
#include "lgest/tape.hpp"
#include "lgest/tensor.hpp"

using namespace lgest;

TEST_CASE("tensor construction and access") {
    Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.rank() == 2);
    CHECK(t.dim(1) == 3);
    CHECK(std::all_of(t.values().begin(), t.values().end(), [](double v) { return v == 0.0; }));
    CHECK_THROWS_AS(t.dim(2), DimensionError);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);

    const Tensor f = Tensor::from({2, 2}, {1, 2, 3, 4});
    CHECK(f[3] == 4.0);
    CHECK(f.reshaped({4})[2] == 3.0);
    CHECK_THROWS_AS(f.reshaped({3}), DimensionError);
    CHECK(Tensor::scalar(2.5).item() == 2.5);
    CHECK_THROWS(f.item());
    CHECK(to_string(Shape{2, 3, 4}) == "[2,3,4]");
}

TEST_CASE("gradient buffer is lazily allocated") {
    Tensor t({3});
    CHECK_FALSE(t.has_grad());
    const Tensor& ct = t;
    CHECK_THROWS_AS(ct.grad(), StateError);
    t.grad()[1] = 2.0;
    CHECK(t.has_grad());
    t.zero_grad();
    CHECK(t.grad()[1] == 0.0);
    t.clear_grad();
    CHECK_FALSE(t.has_grad());
}

TEST_CASE("all_finite detects nan and inf") {
    Tensor t({2});
    CHECK(t.all_finite());
    t[0] = std::nan("");
    CHECK_FALSE(t.all_finite());
    t[0] = INFINITY;
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("rng matches the reference splitmix64 stream") {
    Rng rng(0);
    CHECK(rng.next_u64() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next_u64() == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("rng is reproducible and well distributed") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng r(3);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7);
    }
}

TEST_CASE("shuffle is a seeded permutation") {
    std::vector<int> a(50), b(50);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    Rng ra(9), rb(9);
    ra.shuffle(std::span<int>(a));
    rb.shuffle(std::span<int>(b));
    CHECK(a == b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) {
        CHECK(sorted[i] == i);
    }
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("tape backward runs once from a scalar root") {
    Tensor w = Tensor::from({2}, {1.0, 2.0});
    w.set_requires_grad(true);
    Tape tape;
    Var x = tape.parameter(w);
    Var y = tape.record(Tensor::scalar(w[0] * w[1]), std::span<const Var>(&x, 1),
                        [&tape, x](std::span<const double> g, const Tensor&) {
                            const Tensor& v = x.value();
                            const std::vector<double> dx{g[0] * v[1], g[0] * v[0]};
                            tape.accumulate(x, dx);
                        },
                        "product");
    tape.backward(y);
    CHECK(w.grad()[0] == 2.0);
    CHECK(w.grad()[1] == 1.0);
    CHECK_THROWS_AS(tape.backward(y), StateError);

    Tape other;
    Var v = other.constant(Tensor({2}));
    CHECK_THROWS_AS(other.backward(v), DimensionError);
}

TEST_CASE("recording a non-finite value is a numeric error") {
    Tape tape;
    Var x = tape.constant(Tensor::scalar(1.0));
    CHECK_THROWS_AS(tape.record(Tensor::scalar(std::nan("")), std::span<const Var>(&x, 1), nullptr, "bad"),
                    NumericError);
}
