// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/metrics.hpp"

#include <cstdio>

#include "lgest/error.hpp"

namespace lgest {

ConfusionMatrix::ConfusionMatrix(std::size_t n_class) : n_class_(n_class), counts_(n_class * n_class, 0) {}

ConfusionMatrix::ConfusionMatrix(std::size_t n_class, std::vector<std::uint64_t> counts)
    : n_class_(n_class), counts_(std::move(counts)) {
    if (counts_.size() != n_class * n_class) {
        throw DimensionError("confusion matrix: " + std::to_string(counts_.size()) + " counts for " +
                             std::to_string(n_class) + " classes");
    }
}

std::uint64_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
    if (truth >= n_class_ || predicted >= n_class_) {
        throw IndexError("confusion matrix: cell (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                         ") out of range");
    }
    return counts_[truth * n_class_ + predicted];
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
    if (truth >= n_class_ || predicted >= n_class_) {
        throw IndexError("confusion matrix: label pair (" + std::to_string(truth) + ", " +
                         std::to_string(predicted) + ") outside " + std::to_string(n_class_) + " classes");
    }
    counts_[truth * n_class_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) {
        t += c;
    }
    return t;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_class_; ++i) {
        t += counts_[i * n_class_ + i];
    }
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < n_class_; ++j) {
        s += at(truth, j);
    }
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n_class_; ++i) {
        s += at(i, predicted);
    }
    return s;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                 std::size_t n_class) {
    if (truth.size() != predicted.size()) {
        throw DimensionError("confusion_matrix: " + std::to_string(truth.size()) + " true labels vs " +
                             std::to_string(predicted.size()) + " predictions");
    }
    ConfusionMatrix cm(n_class);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        cm.add(truth[i], predicted[i]);
    }
    return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
    const std::uint64_t total = cm.total();
    if (total == 0) {
        throw NumericError("overall_accuracy: undefined for an empty confusion matrix");
    }
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::vector<double> per_class_recall(const ConfusionMatrix& cm) {
    std::vector<double> recall(cm.n_class(), 0.0);
    for (std::size_t c = 0; c < cm.n_class(); ++c) {
        const std::uint64_t support = cm.row_sum(c);
        if (support > 0) {
            recall[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(support);
        }
    }
    return recall;
}

double average_accuracy(const ConfusionMatrix& cm) {
    long double sum = 0.0L;
    std::size_t present = 0;
    for (std::size_t c = 0; c < cm.n_class(); ++c) {
        const std::uint64_t support = cm.row_sum(c);
        if (support > 0) {
            sum += static_cast<long double>(cm.at(c, c)) / static_cast<long double>(support);
            ++present;
        }
    }
    if (present == 0) {
        throw NumericError("average_accuracy: no class has true samples");
    }
    return static_cast<double>(sum / static_cast<long double>(present));
}

double kappa(const ConfusionMatrix& cm) {
    const auto total = static_cast<long double>(cm.total());
    if (total == 0.0L) {
        throw NumericError("kappa: undefined for an empty confusion matrix");
    }
    // (p_o - p_e) / (1 - p_e) scaled by total^2, so one rounding happens at the end.
    long double chance = 0.0L;
    for (std::size_t c = 0; c < cm.n_class(); ++c) {
        chance += static_cast<long double>(cm.row_sum(c)) * static_cast<long double>(cm.col_sum(c));
    }
    const long double agreement = total * static_cast<long double>(cm.trace());
    const long double denominator = total * total - chance;
    if (denominator == 0.0L) {
        return agreement == chance ? 1.0 : 0.0;
    }
    return static_cast<double>((agreement - chance) / denominator);
}

MetricsReport summarize(const ConfusionMatrix& cm) {
    MetricsReport r;
    r.oa = overall_accuracy(cm);
    r.aa = average_accuracy(cm);
    r.kappa = kappa(cm);
    r.per_class_recall = per_class_recall(cm);
    for (std::size_t c = 0; c < cm.n_class(); ++c) {
        r.per_class_support.push_back(cm.row_sum(c));
    }
    r.total = cm.total();
    return r;
}

std::string format_metrics(const MetricsReport& report) {
    std::string out;
    char line[96];
    auto put = [&](const std::string& key, double value) {
        std::snprintf(line, sizeof line, "%.6f", value);
        out += key + "=" + line + "\n";
    };
    out += "samples=" + std::to_string(report.total) + "\n";
    put("oa", report.oa);
    put("aa", report.aa);
    put("kappa", report.kappa);
    for (std::size_t c = 0; c < report.per_class_recall.size(); ++c) {
        put("per_class_recall_" + std::to_string(c + 1), report.per_class_recall[c]);
    }
    for (std::size_t c = 0; c < report.per_class_support.size(); ++c) {
        out += "per_class_support_" + std::to_string(c + 1) + "=" + std::to_string(report.per_class_support[c]) +
               "\n";
    }
    return out;
}

Rgb class_color(std::uint16_t label) {
    if (label == 0) {
        return {0, 0, 0};
    }
    return kClassPalette[(label - 1u) % kClassPalette.size()];
}

std::vector<std::uint8_t> render_class_map(const LabelMap& map) {
    if (map.labels.size() != map.width * map.height) {
        throw DimensionError("render_class_map: label count does not match dimensions");
    }
    const std::string header = "P6\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(header.size() + 3 * map.labels.size());
    for (std::uint16_t label : map.labels) {
        const Rgb rgb = class_color(label);
        bytes.insert(bytes.end(), rgb.begin(), rgb.end());
    }
    return bytes;
}

} // namespace lgest
