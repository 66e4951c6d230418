// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lgest/dsae.hpp"
#include "lgest/fpn.hpp"
#include "lgest/hsi_data.hpp"
#include "lgest/lges.hpp"
#include "lgest/parameters.hpp"
#include "lgest/rng.hpp"

namespace lgest {

struct LgestConfig {
    std::size_t bands = 0;
    std::size_t n_class = 0;
    std::size_t patch_size = 9;

    std::size_t stem_channels = 64;
    std::size_t dsae_depth = 2;
    std::size_t stem_kernel = 3;
    std::size_t fpn_levels = 4;
    std::size_t ciem_experts = 4;
    std::size_t local_experts = 4;
    std::size_t global_experts = 4;

    double lambda = 1.0;
    double beta = 0.5;
    double lr = 1e-3;
    std::size_t batch_size = 100;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;

    /// ConfigError on any inconsistent field.
    void validate() const;

    DsaeConfig dsae() const;
    FpnConfig fpn() const;
    ExpertGroupConfig local_group() const;
    ExpertGroupConfig global_group() const;
};

/// The full network: DSAE, CIEM pyramid over the reconstruction tokens, and
/// the two expert groups. Parameters are initialized from config.seed.
class LgestModel {
public:
    explicit LgestModel(const LgestConfig& config);

    /// patches is [N x bands x S x S].
    LgesOutput forward(Tape& tape, const Tensor& patches, Mode mode) const;

    const LgestConfig& config() const noexcept { return config_; }
    ParameterStore& parameters() noexcept { return store_; }
    const ParameterStore& parameters() const noexcept { return store_; }

    const Dsae& dsae() const noexcept { return dsae_; }
    const CiemFpn& fpn() const noexcept { return fpn_; }
    const Lges& lges() const noexcept { return lges_; }

private:
    LgestModel(const LgestConfig& config, Rng rng);

    LgestConfig config_;
    ParameterStore store_;
    Dsae dsae_;
    CiemFpn fpn_;
    Lges lges_;
};

/// lambda · CE(local_logits, y) + beta · CE(global_logits, y).
Var lgest_loss(Var local_logits, Var global_logits, std::span<const std::size_t> labels, double lambda, double beta);

struct TrainReport {
    std::vector<double> epoch_losses;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Adam over seeded mini-batch shuffles for config.epochs epochs. Each epoch
/// loss is the sample-weighted mean of its batch losses. InputError on an
/// empty training set.
TrainReport fit(LgestModel& model, const PatchBatch& train, const EpochCallback& on_epoch = {});

struct Prediction {
    std::vector<std::size_t> classes;
    Tensor local_logits;  // [N x n_class]
    Tensor global_logits; // [N x n_class]
};

/// Eval-mode inference in chunks of config.batch_size.
Prediction predict(const LgestModel& model, const Tensor& patches);

/// argmax over local + global logits per row, ties to the lower index.
std::vector<std::size_t> predict_from_logits(const Tensor& local_logits, const Tensor& global_logits);

} // namespace lgest
