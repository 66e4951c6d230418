// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/model.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "lgest/error.hpp"
#include "lgest/optim.hpp"
#include "lgest/rng.hpp"

namespace lgest {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5f1e;

const LgestConfig& validated(const LgestConfig& config) {
    config.validate();
    return config;
}

Tensor rows(const Tensor& t, std::size_t begin, std::size_t end) {
    Shape shape = t.shape();
    const std::size_t stride = t.size() / shape[0];
    shape[0] = end - begin;
    return Tensor(std::move(shape), std::vector<double>(t.data() + begin * stride, t.data() + end * stride));
}

} // namespace

void LgestConfig::validate() const {
    if (bands == 0) {
        throw ConfigError("bands must be positive");
    }
    if (n_class < 2) {
        throw ConfigError("n_class must be at least 2, got " + std::to_string(n_class));
    }
    if (patch_size == 0 || patch_size % 2 == 0) {
        throw ConfigError("patch_size must be odd, got " + std::to_string(patch_size));
    }
    if (!(lambda > 0.0)) {
        throw ConfigError("lambda must be positive");
    }
    if (!(beta >= 0.0)) {
        throw ConfigError("beta must be non-negative");
    }
    if (!(lr >= 0.0)) {
        throw ConfigError("lr must be non-negative");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    if (local_experts == 0 || global_experts == 0) {
        throw ConfigError("expert groups need at least one expert");
    }
    dsae().validate();
    fpn().validate();
}

DsaeConfig LgestConfig::dsae() const {
    return DsaeConfig{.in_channels = bands, .stem_channels = stem_channels, .depth = dsae_depth,
                      .kernel_size = stem_kernel};
}

FpnConfig LgestConfig::fpn() const {
    return FpnConfig{.levels = fpn_levels, .base_channels = stem_channels, .n_experts = ciem_experts};
}

ExpertGroupConfig LgestConfig::local_group() const {
    return ExpertGroupConfig{.n_experts = local_experts, .d_in = stem_channels, .n_class = n_class};
}

ExpertGroupConfig LgestConfig::global_group() const {
    return ExpertGroupConfig{.n_experts = global_experts, .d_in = fpn().concat_width(), .n_class = n_class};
}

LgestModel::LgestModel(const LgestConfig& config)
    : LgestModel(validated(config), Rng(mix_seed(config.seed, kInitStream))) {}

LgestModel::LgestModel(const LgestConfig& config, Rng rng)
    : config_(config),
      dsae_(store_, "dsae", config.dsae(), rng),
      fpn_(store_, "fpn", config.fpn(), rng),
      lges_(store_, "lges", config.local_group(), config.global_group(), rng) {}

LgesOutput LgestModel::forward(Tape& tape, const Tensor& patches, Mode mode) const {
    const Shape& shape = patches.shape();
    if (shape.size() != 4 || shape[1] != config_.bands || shape[2] != config_.patch_size ||
        shape[3] != config_.patch_size) {
        throw DimensionError("lgest: expected patches [N x " + std::to_string(config_.bands) + " x " +
                             std::to_string(config_.patch_size) + " x " + std::to_string(config_.patch_size) +
                             "], got " + to_string(shape));
    }
    const Var x = tape.constant(patches);
    const DsaeOutput ae = dsae_.forward(tape, x, mode);
    const PyramidOutput pyramid = fpn_.forward(tape, tokenize(ae.reconstruction));
    const Var global = fpn_concat(pyramid);
    const Var local = mean_axis(nchw_to_tokens(ae.features), 1);
    return lges_.forward(tape, local, global);
}

Var lgest_loss(Var local_logits, Var global_logits, std::span<const std::size_t> labels, double lambda,
               double beta) {
    if (local_logits.shape() != global_logits.shape()) {
        throw DimensionError("lgest_loss: branch logits " + to_string(local_logits.shape()) + " vs " +
                             to_string(global_logits.shape()));
    }
    return add(scale(cross_entropy(local_logits, labels), lambda),
               scale(cross_entropy(global_logits, labels), beta));
}

TrainReport fit(LgestModel& model, const PatchBatch& train, const EpochCallback& on_epoch) {
    if (train.size() == 0) {
        throw InputError("fit: empty training set");
    }
    const LgestConfig& config = model.config();
    const auto start = std::chrono::steady_clock::now();
    Adam adam(model.parameters(), AdamOptions{.lr = config.lr});
    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
    std::vector<std::size_t> order(train.size());
    TrainReport report;
    report.seed = config.seed;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        double total = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const PatchBatch batch =
                train.subset(std::span<const std::size_t>(order).subspan(begin, end - begin));
            model.parameters().zero_grad();
            Tape tape;
            const LgesOutput out = model.forward(tape, batch.patches, Mode::train);
            const Var loss = lgest_loss(out.local_logits, out.global_logits, batch.labels, config.lambda, config.beta);
            tape.backward(loss);
            adam.step();
            total += loss.value().item() * static_cast<double>(end - begin);
        }
        const double epoch_loss = total / static_cast<double>(order.size());
        report.epoch_losses.push_back(epoch_loss);
        if (on_epoch) {
            on_epoch(epoch, epoch_loss);
        }
    }
    report.steps = adam.steps();
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

Prediction predict(const LgestModel& model, const Tensor& patches) {
    const std::size_t n = patches.rank() == 0 ? 0 : patches.dim(0);
    const std::size_t n_class = model.config().n_class;
    Prediction out{{}, Tensor({n, n_class}), Tensor({n, n_class})};
    const std::size_t chunk = model.config().batch_size;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(n, begin + chunk);
        Tape tape;
        const LgesOutput logits = model.forward(tape, rows(patches, begin, end), Mode::eval);
        std::copy_n(logits.local_logits.value().data(), (end - begin) * n_class,
                    out.local_logits.data() + begin * n_class);
        std::copy_n(logits.global_logits.value().data(), (end - begin) * n_class,
                    out.global_logits.data() + begin * n_class);
    }
    out.classes = predict_from_logits(out.local_logits, out.global_logits);
    return out;
}

std::vector<std::size_t> predict_from_logits(const Tensor& local_logits, const Tensor& global_logits) {
    if (local_logits.shape() != global_logits.shape() || local_logits.rank() != 2) {
        throw DimensionError("predict: branch logits " + to_string(local_logits.shape()) + " vs " +
                             to_string(global_logits.shape()));
    }
    const std::size_t n = local_logits.dim(0);
    const std::size_t k = local_logits.dim(1);
    std::vector<std::size_t> classes(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_score = local_logits[i * k] + global_logits[i * k];
        for (std::size_t c = 1; c < k; ++c) {
            const double score = local_logits[i * k + c] + global_logits[i * k + c];
            if (score > best_score) {
                best = c;
                best_score = score;
            }
        }
        classes[i] = best;
    }
    return classes;
}

} // namespace lgest
