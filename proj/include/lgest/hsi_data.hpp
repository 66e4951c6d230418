// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lgest/tensor.hpp"

namespace lgest {

/// W×H×C reflectance volume, band-sequential: all of band 0 (row-major),
/// then band 1, and so on.
struct HsiCube {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t bands = 0;
    std::vector<float> data;

    float at(std::size_t band, std::size_t row, std::size_t col) const {
        return data[(band * height + row) * width + col];
    }
    float& at(std::size_t band, std::size_t row, std::size_t col) { return data[(band * height + row) * width + col]; }
    void validate() const;
};

/// Per-pixel class labels, row-major. 0 is unlabeled, classes are 1..n_class.
struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::uint16_t n_class = 0;
    std::vector<std::uint16_t> labels;

    std::uint16_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
    void validate() const;
};

struct Dataset {
    HsiCube cube;
    LabelMap labels;
};

struct PixelCoord {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const PixelCoord&) const = default;
};

/// Patches [N x C x S x S] around labeled pixels with 0-based labels.
struct PatchBatch {
    Tensor patches;
    std::vector<std::size_t> labels;
    std::vector<PixelCoord> centers;
    std::size_t n_class = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t bands() const { return patches.dim(1); }
    std::size_t patch_size() const { return patches.dim(2); }
    /// Rows `indices` in the given order.
    PatchBatch subset(std::span<const std::size_t> indices) const;
};

// HSIC: "HSIC", u8 version 1, u32 W, u32 H, u32 C, W·H·C f32 (band-sequential), all LE.
std::vector<std::uint8_t> encode_cube(const HsiCube& cube);
HsiCube decode_cube(std::span<const std::uint8_t> bytes);
// HSIL: "HSIL", u8 version 1, u32 W, u32 H, u16 n_class, W·H u16 labels (row-major), all LE.
std::vector<std::uint8_t> encode_labels(const LabelMap& labels);
LabelMap decode_labels(std::span<const std::uint8_t> bytes);

void save_cube(const std::filesystem::path& path, const HsiCube& cube);
HsiCube load_cube(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const LabelMap& labels);
LabelMap load_labels(const std::filesystem::path& path);
/// Loads both files and checks that their dimensions agree.
Dataset load_dataset(const std::filesystem::path& cube_path, const std::filesystem::path& labels_path);

/// Per-band min-max scaling to [0, 1]; constant bands become 0.
HsiCube normalize(HsiCube cube);

/// Mirror index for borders: ..., 2, 1, [0, 1, ..., n-1], n-2, ... (edge not repeated).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

/// One S×S patch per labeled pixel in row-major pixel order, mirror-padded
/// at the borders. ConfigError for even S.
PatchBatch extract_patches(const HsiCube& cube, const LabelMap& labels, std::size_t size);

/// ceil(fraction · count), robust to representation error in the product.
std::size_t stratified_train_count(std::size_t count, double fraction);

struct Split {
    PatchBatch train;
    PatchBatch test;
    /// 0-based classes without any sample; they are skipped.
    std::vector<std::size_t> empty_classes;
};

/// Stratified split: each class contributes stratified_train_count samples,
/// picked by a seeded shuffle, to the train set and the rest to the test set.
/// Both sets keep the original sample order.
Split split_train_test(const PatchBatch& batch, double fraction, std::uint64_t seed);

/// Minimum pairwise L2 distance guaranteed between synthetic class spectra.
double signature_separation_floor(std::size_t bands);

/// Seeded class spectra in [0.05, 0.95], pairwise at least
/// signature_separation_floor(bands) apart.
std::vector<std::vector<double>> class_signatures(std::size_t n_class, std::size_t bands, std::uint64_t seed);

/// Fully labeled synthetic scene: n_class vertical stripes of equal width
/// (the last stripe absorbs the remainder), each filled with its class
/// signature plus N(0, noise_sigma²) noise.
Dataset synth_cube(std::size_t n_class, std::size_t width, std::size_t height, std::size_t bands,
                   double noise_sigma, std::uint64_t seed);

} // namespace lgest
