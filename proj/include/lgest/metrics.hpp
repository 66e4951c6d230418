// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lgest/hsi_data.hpp"

namespace lgest {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t n_class = 0);
    ConfusionMatrix(std::size_t n_class, std::vector<std::uint64_t> counts);

    std::size_t n_class() const noexcept { return n_class_; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const;
    void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);

    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t col_sum(std::size_t predicted) const;
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

private:
    std::size_t n_class_;
    std::vector<std::uint64_t> counts_;
};

/// IndexError for labels ≥ n_class, DimensionError for unequal lengths.
ConfusionMatrix confusion_matrix(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                 std::size_t n_class);

/// trace / total. NumericError when the matrix is empty.
double overall_accuracy(const ConfusionMatrix& cm);
/// Recall per class; 0 for classes without true samples.
std::vector<double> per_class_recall(const ConfusionMatrix& cm);
/// Mean recall over classes with at least one true sample. NumericError if none.
double average_accuracy(const ConfusionMatrix& cm);
/// Cohen's kappa; 1 when both observed and chance agreement are 1.
double kappa(const ConfusionMatrix& cm);

struct MetricsReport {
    double oa = 0.0;
    double aa = 0.0;
    double kappa = 0.0;
    std::vector<double> per_class_recall;
    std::vector<std::uint64_t> per_class_support;
    std::uint64_t total = 0;
};

MetricsReport summarize(const ConfusionMatrix& cm);

/// key=value lines: samples, oa, aa, kappa, per_class_recall_<k>, per_class_support_<k>
/// (k 1-based), fixed six decimals.
std::string format_metrics(const MetricsReport& report);

using Rgb = std::array<std::uint8_t, 3>;

/// Class k (1-based) is drawn with kClassPalette[(k - 1) % 16]; unlabeled is black.
inline constexpr std::array<Rgb, 16> kClassPalette{{
    {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},  {145, 30, 180},
    {70, 240, 240},  {240, 50, 230},  {210, 245, 60}, {250, 190, 212}, {0, 128, 128}, {220, 190, 255},
    {170, 110, 40},  {255, 250, 200}, {128, 0, 0},    {170, 255, 195},
}};

Rgb class_color(std::uint16_t label);

/// Binary PPM (P6) of a label map, header "P6\n<W> <H>\n255\n".
std::vector<std::uint8_t> render_class_map(const LabelMap& map);

} // namespace lgest
