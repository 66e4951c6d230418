// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lgest/model.hpp"

namespace lgest::cli {

struct RunConfig {
    // data
    std::string cube;
    std::string labels;
    bool synthetic = false;
    std::size_t synth_classes = 4;
    std::size_t synth_width = 32;
    std::size_t synth_height = 32;
    std::size_t synth_bands = 16;
    double synth_noise = 0.05;
    std::uint64_t synth_seed = 7;
    double train_fraction = 0.1;
    std::string eval_set = "test";

    // model and optimizer
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

    // outputs
    std::string out_dir = "lgest_run";
    std::string checkpoint;

    // ablation
    std::string axis;
    std::string grid;
    std::size_t repeats = 3;

    // gradient check
    bool inject_fault = false;

    /// `checkpoint` if set, else <out_dir>/model.lgw.
    std::filesystem::path checkpoint_path() const;
    LgestConfig model_config(std::size_t bands, std::size_t n_class) const;
};

struct FieldSpec {
    std::string key;
    std::string help;
    bool is_switch = false;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

/// Every RunConfig key in echo order.
const std::vector<FieldSpec>& config_fields();

/// Sets one key; ConfigError for unknown keys or unparsable values.
void set_field(RunConfig& config, const std::string& key, const std::string& value);

/// Applies a flat `key=value` text (blank lines and `#` comments ignored).
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// One `key=value` line per field in config_fields() order.
std::string format_config(const RunConfig& config);

/// "1" when LGEST_DETERMINISTIC is set to a value other than "0".
bool deterministic_requested();

} // namespace lgest::cli
