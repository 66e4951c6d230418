// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "lgest/error.hpp"
#include "lgest/metrics.hpp"
#include "lgest/rng.hpp"

using namespace lgest;

namespace {

ConfusionMatrix cm2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return ConfusionMatrix(2, {a, b, c, d});
}

} // namespace

TEST_CASE("confusion matrix counting") {
    const std::vector<std::size_t> t{0, 1}, p{0, 1};
    const ConfusionMatrix diag = confusion_matrix(t, p, 2);
    CHECK(diag.counts() == std::vector<std::uint64_t>{1, 0, 0, 1});
    const std::vector<std::size_t> t2{0, 0}, p2{1, 1};
    CHECK(confusion_matrix(t2, p2, 2).at(0, 1) == 2);
    const ConfusionMatrix empty = confusion_matrix({}, {}, 3);
    CHECK(empty.total() == 0);
    const std::vector<std::size_t> bad{2};
    const std::vector<std::size_t> zero{0};
    CHECK_THROWS_AS(confusion_matrix(bad, zero, 2), IndexError);
    CHECK_THROWS_AS(confusion_matrix(t, zero, 2), DimensionError);
}

TEST_CASE("hand examples") {
    CHECK(overall_accuracy(cm2(50, 0, 0, 50)) == 1.0);
    CHECK(overall_accuracy(cm2(40, 10, 20, 30)) == 0.7);
    CHECK(overall_accuracy(cm2(0, 10, 10, 0)) == 0.0);
    CHECK(average_accuracy(cm2(40, 10, 20, 30)) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(average_accuracy(cm2(3, 0, 0, 9)) == 1.0);
    CHECK(average_accuracy(ConfusionMatrix(3, {4, 1, 0, 0, 0, 0, 0, 1, 1})) == doctest::Approx((0.8 + 0.5) / 2));
    CHECK(kappa(cm2(50, 0, 0, 50)) == 1.0);
    CHECK(kappa(cm2(25, 25, 25, 25)) == 0.0);
    CHECK(kappa(cm2(40, 10, 20, 30)) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(kappa(cm2(7, 0, 0, 0)) == 1.0);
    CHECK_THROWS_AS(overall_accuracy(ConfusionMatrix(2)), NumericError);
    CHECK_THROWS_AS(kappa(ConfusionMatrix(2)), NumericError);
}

TEST_CASE("metrics match a brute-force oracle on random matrices") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(16);
        std::vector<std::uint64_t> counts(n * n);
        for (auto& c : counts) {
            c = rng.uniform() < 0.3 ? 0 : rng.below(40);
        }
        counts[0] += 1;
        const ConfusionMatrix cm(n, counts);
        double total = 0, agree = 0, chance = 0, recall_sum = 0;
        std::size_t present = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0, col = 0;
            for (std::size_t j = 0; j < n; ++j) {
                row += static_cast<double>(counts[i * n + j]);
                col += static_cast<double>(counts[j * n + i]);
            }
            total += row;
            agree += static_cast<double>(counts[i * n + i]);
            chance += row * col;
            if (row > 0) {
                recall_sum += static_cast<double>(counts[i * n + i]) / row;
                ++present;
            }
        }
        const double po = agree / total, pe = chance / (total * total);
        CHECK(std::abs(overall_accuracy(cm) - po) < 1e-12);
        CHECK(std::abs(average_accuracy(cm) - recall_sum / static_cast<double>(present)) < 1e-12);
        const double k = kappa(cm);
        if (pe < 1.0) {
            CHECK(std::abs(k - (po - pe) / (1 - pe)) < 1e-12);
        }
        CHECK(k >= -1.0 - 1e-12);
        CHECK(k <= 1.0 + 1e-12);
    }
}

TEST_CASE("kappa is one exactly for diagonal matrices") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(6);
        std::vector<std::uint64_t> counts(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            counts[i * n + i] = 1 + rng.below(20);
        }
        const bool off = trial % 2 == 1;
        if (off) {
            counts[1] += 1;
        }
        CHECK((kappa(ConfusionMatrix(n, counts)) == doctest::Approx(1.0).epsilon(1e-15)) == !off);
    }
}

TEST_CASE("oa and aa survive relabeling") {
    Rng rng(6);
    const std::size_t n = 5;
    std::vector<std::uint64_t> counts(n * n);
    for (auto& c : counts) {
        c = rng.below(30);
    }
    const std::size_t perm[5] = {3, 0, 4, 1, 2};
    std::vector<std::uint64_t> permuted(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            permuted[perm[i] * n + perm[j]] = counts[i * n + j];
        }
    }
    const ConfusionMatrix a(n, counts), b(n, permuted);
    CHECK(overall_accuracy(a) == overall_accuracy(b));
    CHECK(average_accuracy(a) == doctest::Approx(average_accuracy(b)).epsilon(1e-15));
}

TEST_CASE("report format carries every key") {
    const MetricsReport r = summarize(ConfusionMatrix(3, {4, 1, 0, 0, 0, 0, 0, 1, 1}));
    CHECK(r.per_class_recall[1] == 0.0);
    const std::string text = format_metrics(r);
    for (const char* key : {"samples=7\n", "oa=0.714286\n", "aa=0.650000\n", "kappa=", "per_class_recall_1=0.800000\n",
                            "per_class_recall_3=0.500000\n", "per_class_support_2=0\n"}) {
        CHECK_MESSAGE(text.find(key) != std::string::npos, key);
    }
}

TEST_CASE("class map rendering") {
    const std::vector<std::uint8_t> one = render_class_map(LabelMap{1, 1, 1, {1}});
    const std::string header = "P6\n1 1\n255\n";
    REQUIRE(one.size() == header.size() + 3);
    CHECK(std::string(one.begin(), one.begin() + header.size()) == header);
    CHECK(one[header.size()] == 230);
    CHECK(one[header.size() + 1] == 25);
    CHECK(one[header.size() + 2] == 75);

    const std::vector<std::uint8_t> check = render_class_map(LabelMap{2, 2, 2, {1, 2, 2, 1}});
    const std::string h2 = "P6\n2 2\n255\n";
    const std::vector<std::uint8_t> pixels(check.begin() + h2.size(), check.end());
    CHECK(pixels == std::vector<std::uint8_t>{230, 25, 75, 60, 180, 75, 60, 180, 75, 230, 25, 75});
    CHECK(render_class_map(LabelMap{2, 2, 2, {1, 2, 2, 1}}) == check);

    const std::vector<std::uint8_t> blank = render_class_map(LabelMap{1, 1, 1, {0}});
    CHECK(blank.back() == 0);
    CHECK(class_color(17) == class_color(1));
}
