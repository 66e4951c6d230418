// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/rng.hpp"

#include <cmath>
#include <numbers>

namespace lgest {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t Rng::next_u64() noexcept {
    state_ += kGolden;
    return finalize(state_);
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() noexcept {
    // 1 - u keeps the log argument in (0, 1].
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) noexcept {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw = next_u64();
    while (draw >= limit) {
        draw = next_u64();
    }
    return static_cast<std::size_t>(draw % bound);
}

Rng Rng::fork(std::uint64_t stream) const noexcept { return Rng(mix_seed(state_, stream)); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return finalize(seed + kGolden * (stream + 1));
}

} // namespace lgest
