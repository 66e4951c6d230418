// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lgest/parameters.hpp"

// LGW1 parameter checkpoint:
//   magic "LGW1"
//   repeated until end of file:
//     u16 LE name length, UTF-8 name bytes,
//     u8 rank, rank × u32 LE dims,
//     product(dims) × f64 LE values
namespace lgest {

struct NamedTensor {
    std::string name;
    Tensor value;
};

std::vector<std::uint8_t> encode_checkpoint(const ParameterStore& store);
std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

/// Overwrites every tensor of `store` from the checkpoint. Names and shapes
/// must match one-to-one; FormatError otherwise.
void load_checkpoint(const std::filesystem::path& path, ParameterStore& store);
void assign_checkpoint(const std::vector<NamedTensor>& entries, ParameterStore& store);

} // namespace lgest
