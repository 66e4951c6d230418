// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

// Little-endian byte packing shared by the checkpoint and cube formats.
namespace lgest::io {

class ByteWriter {
public:
    void bytes(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }
    void text(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v); }
    void u32(std::uint32_t v) { put_le(v); }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }

    const std::vector<std::uint8_t>& buffer() const noexcept { return out_; }
    std::vector<std::uint8_t> take() noexcept { return std::move(out_); }

private:
    template <typename U>
    void put_le(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    std::vector<std::uint8_t> out_;
};

/// Bounds-checked reader; every failure names the byte offset.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string what) : data_(data), what_(std::move(what)) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool done() const noexcept { return pos_ == data_.size(); }

    std::string text(std::size_t n);
    std::uint8_t u8() { return get_le<std::uint8_t>(); }
    std::uint16_t u16() { return get_le<std::uint16_t>(); }
    std::uint32_t u32() { return get_le<std::uint32_t>(); }
    float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

    /// Throws FormatError unless `n` more bytes are available.
    void require(std::size_t n, const std::string& field) const;

private:
    template <typename U>
    U get_le() {
        require(sizeof(U), "value");
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            v = static_cast<U>(v | static_cast<U>(static_cast<U>(data_[pos_ + i]) << (8 * i)));
        }
        pos_ += sizeof(U);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace lgest::io
