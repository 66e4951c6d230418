// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "helpers.hpp"
#include "lgest/error.hpp"
#include "lgest/fpn.hpp"

using namespace lgest;

TEST_CASE("pyramid width arithmetic") {
    const FpnConfig c{.levels = 4, .base_channels = 64};
    CHECK(c.down_widths() == std::vector<std::size_t>{32, 16, 8, 4});
    CHECK(c.concat_width() == 64 + 32 + 16 + 8 + 4);
    CHECK_THROWS_AS(FpnConfig({.levels = 3, .base_channels = 12}).validate(), ConfigError);
    CHECK_THROWS_AS(FpnConfig({.levels = 0, .base_channels = 8}).validate(), ConfigError);
}

TEST_CASE("random pyramids follow the width schedule") {
    Rng rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t levels = 1 + rng.below(3);
        const std::size_t c = (std::size_t{1} << levels) * (1 + rng.below(2));
        const FpnConfig config{.levels = levels, .base_channels = c, .n_experts = 2 + rng.below(3)};
        ParameterStore store;
        CiemFpn fpn(store, "fpn", config, rng);
        const std::size_t d = 1 + rng.below(9);
        Tape tape;
        const PyramidOutput out = fpn.forward(tape, tape.constant(test::random_tensor({2, d, c}, rng)));
        REQUIRE(out.parallel.size() == levels);
        REQUIRE(out.down.size() == levels);
        std::size_t sum = c;
        for (std::size_t i = 0; i < levels; ++i) {
            CHECK(out.parallel[i].shape() == Shape{2, d, c});
            CHECK(out.down[i].shape() == Shape{2, d, c >> (i + 1)});
            sum += c >> (i + 1);
        }
        const Var p = fpn_concat(out);
        CHECK(p.shape() == Shape{2, sum});
        CHECK(p.dim(1) == config.concat_width());
    }
}

TEST_CASE("concat pools tokens of each level") {
    Tape tape;
    PyramidOutput pyramid;
    pyramid.parallel.push_back(tape.constant(Tensor::from({1, 2, 2}, {1, 2, 3, 4})));
    pyramid.down.push_back(tape.constant(Tensor::from({1, 2, 1}, {10, 20})));
    const Tensor& p = fpn_concat(pyramid).value();
    CHECK(p.shape() == Shape{1, 3});
    CHECK(p[0] == 2.0);
    CHECK(p[1] == 3.0);
    CHECK(p[2] == 15.0);
}

TEST_CASE("tokenize flattens spatial positions") {
    Tape tape;
    const Var t = tokenize(tape.constant(Tensor({2, 8, 3, 3})));
    CHECK(t.shape() == Shape{2, 9, 8});
}
