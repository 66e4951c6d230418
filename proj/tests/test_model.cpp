// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lgest/checkpoint.hpp"
#include "lgest/error.hpp"
#include "lgest/model.hpp"

using namespace lgest;
using test::random_tensor;

namespace {

LgestConfig small_config() {
    LgestConfig c;
    c.bands = 4;
    c.n_class = 3;
    c.patch_size = 5;
    c.stem_channels = 8;
    c.dsae_depth = 1;
    c.fpn_levels = 2;
    c.ciem_experts = 4;
    c.local_experts = 4;
    c.global_experts = 4;
    c.batch_size = 16;
    c.epochs = 3;
    c.seed = 5;
    return c;
}

PatchBatch small_task(const LgestConfig& c) {
    const Dataset ds = synth_cube(c.n_class, 12, 8, c.bands, 0.05, 3);
    return extract_patches(normalize(ds.cube), ds.labels, c.patch_size);
}

} // namespace

TEST_CASE("loss reduces to the weighted sum of branch cross-entropies") {
    Tape tape;
    const std::vector<std::size_t> labels{0, 1, 2, 3};
    Var uniform = tape.constant(Tensor({4, 4}));
    const double total = lgest_loss(uniform, uniform, labels, 1.0, 0.5).value().item();
    CHECK(std::abs(total - 1.5 * std::log(4.0)) < 1e-12);
    CHECK(total == doctest::Approx(2.07944).epsilon(1e-5));

    Rng rng(1);
    Var pt = tape.constant(random_tensor({4, 4}, rng, -3, 3));
    Var pk = tape.constant(random_tensor({4, 4}, rng, -3, 3));
    CHECK(lgest_loss(pt, pk, labels, 1.0, 0.0).value().item() == cross_entropy(pt, labels).value().item());

    Tensor sure({2, 2}, {800.0, 0.0, 0.0, 800.0});
    const std::vector<std::size_t> right{0, 1};
    CHECK(lgest_loss(tape.constant(sure), tape.constant(sure), right, 1.0, 0.5).value().item() == 0.0);
    CHECK_THROWS_AS(lgest_loss(pt, tape.constant(Tensor({4, 3})), labels, 1.0, 0.5), DimensionError);
}

TEST_CASE("prediction sums branch logits and breaks ties low") {
    CHECK(predict_from_logits(Tensor::from({1, 2}, {2, 0}), Tensor::from({1, 2}, {0, 1})) ==
          std::vector<std::size_t>{0});
    CHECK(predict_from_logits(Tensor::from({1, 3}, {1, 1, 1}), Tensor::from({1, 3}, {2, 2, 2})) ==
          std::vector<std::size_t>{0});
    Rng rng(2);
    const Tensor a = random_tensor({50, 6}, rng, -5, 5);
    const Tensor b = random_tensor({50, 6}, rng, -5, 5);
    Tensor a2 = a, b2 = b;
    for (std::size_t i = 0; i < 50; ++i) {
        const double shift = rng.uniform(-100, 100);
        for (std::size_t c = 0; c < 6; ++c) {
            a2[i * 6 + c] += shift;
            b2[i * 6 + c] -= 0.5 * shift;
        }
    }
    CHECK(predict_from_logits(a, b) == predict_from_logits(a2, b2));
}

TEST_CASE("config validation") {
    LgestConfig c = small_config();
    c.validate();
    CHECK(c.lambda == 1.0);
    CHECK(c.beta == 0.5);
    CHECK(c.lr == 1e-3);
    CHECK(LgestConfig{}.batch_size == 100);
    CHECK(LgestConfig{}.epochs == 100);
    c.lambda = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.beta = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.patch_size = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(small_config().global_group().d_in == 8 + 4 + 2);
}

TEST_CASE("forward output shapes and eval-mode batch independence") {
    const LgestConfig c = small_config();
    LgestModel model(c);
    const PatchBatch data = small_task(c);
    fit(model, data.subset(std::vector<std::size_t>{0, 5, 9, 14, 20, 30}));
    Tape tape;
    const LgesOutput all = model.forward(tape, data.patches, Mode::eval);
    CHECK(all.local_logits.shape() == Shape{data.size(), 3});
    CHECK(all.global_logits.shape() == Shape{data.size(), 3});
    const PatchBatch one = data.subset(std::vector<std::size_t>{7});
    Tape t1;
    const LgesOutput single = model.forward(t1, one.patches, Mode::eval);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(single.local_logits.value()[k] == doctest::Approx(all.local_logits.value()[7 * 3 + k]).epsilon(1e-12));
        CHECK(single.global_logits.value()[k] ==
              doctest::Approx(all.global_logits.value()[7 * 3 + k]).epsilon(1e-12));
    }
    Tape bad;
    CHECK_THROWS_AS(model.forward(bad, Tensor({1, 4, 3, 3}), Mode::eval), DimensionError);
}

TEST_CASE("zero weights leave only the class biases") {
    LgestConfig c = small_config();
    c.local_experts = 1;
    c.global_experts = 1;
    LgestModel model(c);
    for (const std::string& name : model.parameters().names()) {
        Tensor& t = model.parameters().at(name);
        const bool bias = name.size() > 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
        if (t.requires_grad() && !bias) {
            std::fill(t.values().begin(), t.values().end(), 0.0);
        }
    }
    Tensor& bl = model.parameters().at("lges.local.expert0.bias");
    Tensor& bg = model.parameters().at("lges.global.expert0.bias");
    Tape tape;
    const LgesOutput out = model.forward(tape, small_task(c).subset(std::vector<std::size_t>{0, 1}).patches, Mode::train);
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(out.local_logits.value()[n * 3 + k] == bl[k]);
            CHECK(out.global_logits.value()[n * 3 + k] == bg[k]);
        }
    }
}

TEST_CASE("training is bit-reproducible for a seed") {
    const LgestConfig c = small_config();
    const PatchBatch data = small_task(c);
    LgestModel a(c), b(c);
    const TrainReport ra = fit(a, data);
    const TrainReport rb = fit(b, data);
    CHECK(ra.epoch_losses == rb.epoch_losses);
    CHECK(encode_checkpoint(a.parameters()) == encode_checkpoint(b.parameters()));
    CHECK(ra.seed == 5);
    CHECK(ra.steps == 3 * ((data.size() + 15) / 16));

    LgestConfig other = c;
    other.seed = 6;
    LgestModel d(other);
    CHECK(encode_checkpoint(d.parameters()) != encode_checkpoint(LgestModel(c).parameters()));
}

TEST_CASE("zero learning rate keeps parameters and loss fixed") {
    LgestConfig c = small_config();
    c.lr = 0.0;
    const PatchBatch data = small_task(c);
    c.batch_size = data.size();
    LgestModel model(c);
    LgestModel init(c);
    const TrainReport r = fit(model, data);
    for (const std::string& name : model.parameters().names()) {
        if (model.parameters().at(name).requires_grad()) {
            CHECK(test::bit_equal(model.parameters().at(name), init.parameters().at(name)));
        }
    }
    for (double loss : r.epoch_losses) {
        CHECK(loss == doctest::Approx(r.epoch_losses.front()).epsilon(1e-12));
    }
}

TEST_CASE("empty training set is an input error") {
    LgestModel model(small_config());
    PatchBatch empty;
    CHECK_THROWS_AS(fit(model, empty), InputError);
}

TEST_CASE("loss decreases over the first epochs on the separable scene") {
    LgestConfig c = small_config();
    c.epochs = 5;
    c.batch_size = 100;
    c.patch_size = 5;
    c.bands = 16;
    c.n_class = 4;
    c.seed = 7;
    const Dataset ds = synth_cube(4, 32, 32, 16, 0.05, 7);
    const Split split = split_train_test(extract_patches(normalize(ds.cube), ds.labels, 5), 0.1, 7);
    LgestModel model(c);
    const TrainReport r = fit(model, split.train);
    REQUIRE(r.epoch_losses.size() == 5);
    for (std::size_t e = 1; e < 5; ++e) {
        CHECK(r.epoch_losses[e] < r.epoch_losses[e - 1]);
    }
}

TEST_CASE("predict matches the forward pass in eval mode") {
    LgestConfig c = small_config();
    c.batch_size = 7;
    LgestModel model(c);
    const PatchBatch data = small_task(c);
    fit(model, data);
    const Prediction p = predict(model, data.patches);
    Tape tape;
    const LgesOutput out = model.forward(tape, data.patches, Mode::eval);
    CHECK(p.classes == predict_from_logits(out.local_logits.value(), out.global_logits.value()));
    CHECK(p.classes.size() == data.size());
}
