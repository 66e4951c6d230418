// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace lgest {

/// SplitMix64 stream. The integer sequence is fully specified, so a seed
/// reproduces the same draws on every platform and in every language port.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one draw per call, no cached spare).
    double normal() noexcept;

    /// Uniform integer in [0, n); n must be positive.
    std::size_t below(std::size_t n) noexcept;

    /// Independent child stream; the parent state is not advanced.
    Rng fork(std::uint64_t stream) const noexcept;

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// One SplitMix64 finalisation round; used for deriving sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

} // namespace lgest
