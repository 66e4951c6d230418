// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "cli/run_config.hpp"
#include "lgest/hsi_data.hpp"
#include "lgest/metrics.hpp"

namespace lgest::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitVerification = 3,
};

/// Parses argv, resolves the configuration and runs one command.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct PreparedData {
    Dataset scene;
    PatchBatch patches;
    Split split;
};

/// Loads (or synthesizes), normalizes, extracts and splits the data set.
PreparedData prepare_data(const RunConfig& config, std::ostream& err);

int cmd_synth(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_ablate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);

using ExpertPair = std::array<std::size_t, 2>;

/// "[2,2],[4,4]" → {{2,2},{4,4}}; a bare "4" means [4,4].
std::vector<ExpertPair> parse_expert_grid(const std::string& grid);
std::vector<std::size_t> parse_size_grid(const std::string& grid);
std::vector<double> parse_fraction_grid(const std::string& grid);

struct AblationRow {
    std::string axis;
    std::string value;
    std::size_t repeats = 0;
    std::array<double, 2> oa{};
    std::array<double, 2> aa{};
    std::array<double, 2> kappa{};
};

inline constexpr const char* kAblationHeader =
    "axis,value,repeats,oa_mean,oa_std,aa_mean,aa_std,kappa_mean,kappa_std";

std::string format_ablation_row(const AblationRow& row);

/// Mean and sample standard deviation (0 for a single value).
std::array<double, 2> mean_std(const std::vector<double>& values);

} // namespace lgest::cli
