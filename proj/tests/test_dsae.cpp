// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "helpers.hpp"
#include "lgest/dsae.hpp"
#include "lgest/error.hpp"

using namespace lgest;

TEST_CASE("channel schedule halves per encoder stage") {
    CHECK(channel_schedule(DsaeConfig{.in_channels = 3, .stem_channels = 64, .depth = 2}) ==
          std::vector<std::size_t>{64, 32, 16});
    CHECK(channel_schedule(DsaeConfig{.in_channels = 1, .stem_channels = 8, .depth = 3}) ==
          std::vector<std::size_t>{8, 4, 2, 1});
    CHECK_THROWS_AS(DsaeConfig({.in_channels = 1, .stem_channels = 12, .depth = 3}).validate(), ConfigError);
    CHECK_THROWS_AS(DsaeConfig({.in_channels = 1, .stem_channels = 8, .depth = 0}).validate(), ConfigError);
    CHECK_THROWS_AS(DsaeConfig({.in_channels = 1, .stem_channels = 8, .depth = 1, .kernel_size = 4}).validate(),
                    ConfigError);
}

TEST_CASE("random valid configs produce the bottleneck width") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t depth = 1 + rng.below(3);
        const std::size_t c0 = (std::size_t{1} << depth) * (1 + rng.below(3));
        const std::size_t s = 1 + 2 * rng.below(3);
        const DsaeConfig config{.in_channels = 1 + rng.below(4), .stem_channels = c0, .depth = depth};
        ParameterStore store;
        Dsae ae(store, "ae", config, rng);
        Tape tape;
        const Tensor x = test::random_tensor({2, config.in_channels, s, s}, rng);
        const DsaeOutput out = ae.forward(tape, tape.constant(x), Mode::train);
        CHECK(out.bottleneck.shape() == Shape{2, c0 >> depth, s, s});
        CHECK(out.bottleneck.dim(1) == config.bottleneck_channels());
        CHECK(out.features.shape() == Shape{2, c0, s, s});
        CHECK(out.reconstruction.shape() == out.features.shape());
    }
}

TEST_CASE("eval mode is per-sample and needs trained statistics") {
    Rng rng(5);
    ParameterStore store;
    Dsae ae(store, "ae", DsaeConfig{.in_channels = 2, .stem_channels = 4, .depth = 1}, rng);
    const Tensor x = test::random_tensor({3, 2, 3, 3}, rng);
    {
        Tape tape;
        CHECK_THROWS_AS(ae.forward(tape, tape.constant(x), Mode::eval), StateError);
    }
    {
        Tape tape;
        ae.forward(tape, tape.constant(x), Mode::train);
    }
    Tape full;
    const Tensor all = ae.forward(full, full.constant(x), Mode::eval).reconstruction.value();
    Tape one;
    const Tensor first = ae.forward(one, one.constant(Tensor({1, 2, 3, 3}, std::vector<double>(x.data(), x.data() + 18))),
                                    Mode::eval)
                             .reconstruction.value();
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i] == all[i]);
    }
}

TEST_CASE("parameter names follow the stage layout") {
    Rng rng(1);
    ParameterStore store;
    Dsae ae(store, "dsae", DsaeConfig{.in_channels = 3, .stem_channels = 8, .depth = 2}, rng);
    CHECK(store.contains("dsae.stem0.conv.weight"));
    CHECK(store.contains("dsae.stem2.bn.running_var"));
    CHECK(store.contains("dsae.encoder1.conv.weight"));
    CHECK(store.contains("dsae.decoder1.deconv.weight"));
    CHECK(store.at("dsae.encoder0.conv.weight").shape() == Shape{4, 8, 3, 3});
    CHECK(store.at("dsae.decoder0.deconv.weight").shape() == Shape{2, 4, 3, 3});
    CHECK_FALSE(store.at("dsae.stem0.bn.running_mean").requires_grad());
}
