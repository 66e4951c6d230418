// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/hsi_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lgest/binary_io.hpp"
#include "lgest/error.hpp"
#include "lgest/rng.hpp"

namespace lgest {

namespace {

constexpr std::uint8_t kFormatVersion = 1;

void check_magic(io::ByteReader& r, const char* magic, const char* what) {
    if (r.remaining() < 4) {
        throw FormatError(std::string(what) + ": truncated header at byte offset 0, expected 4-byte magic");
    }
    const std::string found = r.text(4);
    if (found != magic) {
        throw FormatError(std::string(what) + ": bad magic at byte offset 0, expected \"" + magic + "\"");
    }
    const std::size_t at = r.offset();
    const std::uint8_t version = r.u8();
    if (version != kFormatVersion) {
        throw FormatError(std::string(what) + ": unsupported version " + std::to_string(version) +
                          " at byte offset " + std::to_string(at));
    }
}

void check_payload(const io::ByteReader& r, std::size_t expected, const char* what) {
    if (r.remaining() != expected) {
        throw FormatError(std::string(what) + ": data section at byte offset " + std::to_string(r.offset()) +
                          " holds " + std::to_string(r.remaining()) + " bytes, expected " + std::to_string(expected));
    }
}

} // namespace

void HsiCube::validate() const {
    if (width == 0 || height == 0 || bands == 0) {
        throw FormatError("cube: dimensions must be positive");
    }
    if (data.size() != width * height * bands) {
        throw FormatError("cube: " + std::to_string(data.size()) + " values for " + std::to_string(width) + "x" +
                          std::to_string(height) + "x" + std::to_string(bands));
    }
}

void LabelMap::validate() const {
    if (width == 0 || height == 0) {
        throw FormatError("labels: dimensions must be positive");
    }
    if (labels.size() != width * height) {
        throw FormatError("labels: " + std::to_string(labels.size()) + " labels for " + std::to_string(width) + "x" +
                          std::to_string(height));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > n_class) {
            throw FormatError("labels: pixel " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                              " above n_class " + std::to_string(n_class));
        }
    }
}

PatchBatch PatchBatch::subset(std::span<const std::size_t> indices) const {
    PatchBatch out;
    out.n_class = n_class;
    Shape shape = patches.shape();
    const std::size_t stride = numel(shape) / std::max<std::size_t>(shape[0], 1);
    shape[0] = indices.size();
    std::vector<double> values(indices.size() * stride);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t i = indices[k];
        if (i >= size()) {
            throw IndexError("patch batch: index " + std::to_string(i) + " out of range");
        }
        std::copy_n(patches.data() + i * stride, stride, values.data() + k * stride);
        out.labels.push_back(labels[i]);
        out.centers.push_back(centers[i]);
    }
    out.patches = Tensor(std::move(shape), std::move(values));
    return out;
}

std::vector<std::uint8_t> encode_cube(const HsiCube& cube) {
    cube.validate();
    io::ByteWriter w;
    w.text("HSIC");
    w.u8(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(cube.width));
    w.u32(static_cast<std::uint32_t>(cube.height));
    w.u32(static_cast<std::uint32_t>(cube.bands));
    for (float v : cube.data) {
        w.f32(v);
    }
    return w.take();
}

HsiCube decode_cube(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes, "cube");
    check_magic(r, "HSIC", "cube");
    HsiCube cube;
    cube.width = r.u32();
    cube.height = r.u32();
    cube.bands = r.u32();
    check_payload(r, cube.width * cube.height * cube.bands * sizeof(float), "cube");
    cube.data.resize(cube.width * cube.height * cube.bands);
    for (float& v : cube.data) {
        v = r.f32();
    }
    cube.validate();
    return cube;
}

std::vector<std::uint8_t> encode_labels(const LabelMap& labels) {
    labels.validate();
    io::ByteWriter w;
    w.text("HSIL");
    w.u8(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(labels.width));
    w.u32(static_cast<std::uint32_t>(labels.height));
    w.u16(labels.n_class);
    for (std::uint16_t v : labels.labels) {
        w.u16(v);
    }
    return w.take();
}

LabelMap decode_labels(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes, "labels");
    check_magic(r, "HSIL", "labels");
    LabelMap labels;
    labels.width = r.u32();
    labels.height = r.u32();
    labels.n_class = r.u16();
    check_payload(r, labels.width * labels.height * sizeof(std::uint16_t), "labels");
    labels.labels.resize(labels.width * labels.height);
    for (std::uint16_t& v : labels.labels) {
        v = r.u16();
    }
    labels.validate();
    return labels;
}

void save_cube(const std::filesystem::path& path, const HsiCube& cube) { io::write_file(path, encode_cube(cube)); }

HsiCube load_cube(const std::filesystem::path& path) { return decode_cube(io::read_file(path)); }

void save_labels(const std::filesystem::path& path, const LabelMap& labels) {
    io::write_file(path, encode_labels(labels));
}

LabelMap load_labels(const std::filesystem::path& path) { return decode_labels(io::read_file(path)); }

Dataset load_dataset(const std::filesystem::path& cube_path, const std::filesystem::path& labels_path) {
    Dataset ds{load_cube(cube_path), load_labels(labels_path)};
    if (ds.cube.width != ds.labels.width || ds.cube.height != ds.labels.height) {
        throw FormatError("dataset: cube is " + std::to_string(ds.cube.width) + "x" + std::to_string(ds.cube.height) +
                          " but labels are " + std::to_string(ds.labels.width) + "x" +
                          std::to_string(ds.labels.height));
    }
    return ds;
}

HsiCube normalize(HsiCube cube) {
    cube.validate();
    const std::size_t plane = cube.width * cube.height;
    for (std::size_t b = 0; b < cube.bands; ++b) {
        float* band = cube.data.data() + b * plane;
        const auto [lo, hi] = std::minmax_element(band, band + plane);
        const double min = *lo;
        const double range = static_cast<double>(*hi) - min;
        for (std::size_t i = 0; i < plane; ++i) {
            band[i] = range > 0.0 ? static_cast<float>((band[i] - min) / range) : 0.0f;
        }
    }
    return cube;
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) {
        return 0;
    }
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t m = i % period;
    if (m < 0) {
        m += period;
    }
    return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - m);
}

PatchBatch extract_patches(const HsiCube& cube, const LabelMap& labels, std::size_t size) {
    if (size == 0 || size % 2 == 0) {
        throw ConfigError("extract_patches: patch size must be odd, got " + std::to_string(size));
    }
    cube.validate();
    labels.validate();
    if (cube.width != labels.width || cube.height != labels.height) {
        throw DimensionError("extract_patches: cube and label map dimensions differ");
    }
    const auto half = static_cast<std::ptrdiff_t>(size / 2);
    PatchBatch batch;
    batch.n_class = labels.n_class;
    for (std::size_t row = 0; row < labels.height; ++row) {
        for (std::size_t col = 0; col < labels.width; ++col) {
            if (labels.at(row, col) != 0) {
                batch.centers.push_back({row, col});
                batch.labels.push_back(labels.at(row, col) - 1u);
            }
        }
    }
    const std::size_t n = batch.centers.size();
    const std::size_t per_patch = cube.bands * size * size;
    std::vector<double> values(n * per_patch);
    for (std::size_t k = 0; k < n; ++k) {
        const auto [row, col] = batch.centers[k];
        double* dst = values.data() + k * per_patch;
        for (std::size_t b = 0; b < cube.bands; ++b) {
            for (std::size_t i = 0; i < size; ++i) {
                const std::size_t r =
                    reflect_index(static_cast<std::ptrdiff_t>(row) + static_cast<std::ptrdiff_t>(i) - half,
                                  cube.height);
                for (std::size_t j = 0; j < size; ++j) {
                    const std::size_t c =
                        reflect_index(static_cast<std::ptrdiff_t>(col) + static_cast<std::ptrdiff_t>(j) - half,
                                      cube.width);
                    dst[(b * size + i) * size + j] = cube.at(b, r, c);
                }
            }
        }
    }
    batch.patches = Tensor({n, cube.bands, size, size}, std::move(values));
    return batch;
}

std::size_t stratified_train_count(std::size_t count, double fraction) {
    const double raw = std::ceil(fraction * static_cast<double>(count) - 1e-9);
    return std::min(count, static_cast<std::size_t>(std::max(raw, 0.0)));
}

Split split_train_test(const PatchBatch& batch, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("split_train_test: fraction must lie in (0, 1)");
    }
    std::size_t n_class = batch.n_class;
    for (std::size_t label : batch.labels) {
        n_class = std::max(n_class, label + 1);
    }
    std::vector<std::vector<std::size_t>> by_class(n_class);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        by_class[batch.labels[i]].push_back(i);
    }
    Rng rng(mix_seed(seed, 0x5b17));
    Split split;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t c = 0; c < n_class; ++c) {
        std::vector<std::size_t>& members = by_class[c];
        if (members.empty()) {
            split.empty_classes.push_back(c);
            continue;
        }
        rng.shuffle(std::span<std::size_t>(members));
        const std::size_t take = stratified_train_count(members.size(), fraction);
        train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
        test_idx.insert(test_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    split.train = batch.subset(train_idx);
    split.test = batch.subset(test_idx);
    return split;
}

double signature_separation_floor(std::size_t bands) {
    return std::min(1.0, 0.25 * std::sqrt(static_cast<double>(bands)));
}

std::vector<std::vector<double>> class_signatures(std::size_t n_class, std::size_t bands, std::uint64_t seed) {
    if (n_class < 2 || bands == 0) {
        throw ConfigError("class_signatures: need n_class >= 2 and bands >= 1");
    }
    const double floor = signature_separation_floor(bands);
    Rng rng(mix_seed(seed, 0x516e));
    std::vector<std::vector<double>> signatures;
    constexpr int kMaxAttempts = 10000;
    for (int attempt = 0; signatures.size() < n_class; ++attempt) {
        if (attempt == kMaxAttempts) {
            throw ConfigError("class_signatures: cannot place " + std::to_string(n_class) + " spectra " +
                              std::to_string(floor) + " apart in " + std::to_string(bands) + " bands");
        }
        std::vector<double> candidate(bands);
        for (double& v : candidate) {
            v = rng.uniform(0.05, 0.95);
        }
        bool separated = true;
        for (const auto& s : signatures) {
            double d2 = 0.0;
            for (std::size_t b = 0; b < bands; ++b) {
                d2 += (s[b] - candidate[b]) * (s[b] - candidate[b]);
            }
            separated = separated && std::sqrt(d2) >= floor;
        }
        if (separated) {
            signatures.push_back(std::move(candidate));
        }
    }
    return signatures;
}

Dataset synth_cube(std::size_t n_class, std::size_t width, std::size_t height, std::size_t bands,
                   double noise_sigma, std::uint64_t seed) {
    if (n_class < 2) {
        throw ConfigError("synth_cube: n_class must be at least 2");
    }
    if (n_class > width || n_class > std::numeric_limits<std::uint16_t>::max() || height == 0 || bands == 0) {
        throw ConfigError("synth_cube: a " + std::to_string(width) + "x" + std::to_string(height) +
                          " scene cannot hold " + std::to_string(n_class) + " class stripes");
    }
    if (noise_sigma < 0.0) {
        throw ConfigError("synth_cube: noise_sigma must be non-negative");
    }
    const auto signatures = class_signatures(n_class, bands, seed);
    Dataset ds;
    ds.labels.width = width;
    ds.labels.height = height;
    ds.labels.n_class = static_cast<std::uint16_t>(n_class);
    ds.labels.labels.resize(width * height);
    const std::size_t stripe = width / n_class;
    for (std::size_t row = 0; row < height; ++row) {
        for (std::size_t col = 0; col < width; ++col) {
            const std::size_t cls = std::min(col / stripe, n_class - 1);
            ds.labels.labels[row * width + col] = static_cast<std::uint16_t>(cls + 1);
        }
    }
    ds.cube.width = width;
    ds.cube.height = height;
    ds.cube.bands = bands;
    ds.cube.data.resize(width * height * bands);
    Rng noise(mix_seed(seed, 0x401e));
    for (std::size_t b = 0; b < bands; ++b) {
        for (std::size_t row = 0; row < height; ++row) {
            for (std::size_t col = 0; col < width; ++col) {
                const std::size_t cls = ds.labels.labels[row * width + col] - 1u;
                const double eps = noise_sigma > 0.0 ? noise_sigma * noise.normal() : 0.0;
                ds.cube.at(b, row, col) = static_cast<float>(signatures[cls][b] + eps);
            }
        }
    }
    return ds;
}

} // namespace lgest
