// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/binary_io.hpp"

#include <fstream>
#include <iterator>

#include "lgest/error.hpp"

namespace lgest::io {

std::string ByteReader::text(std::size_t n) {
    require(n, "text");
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

void ByteReader::require(std::size_t n, const std::string& field) const {
    if (remaining() < n) {
        throw FormatError(what_ + ": truncated " + field + " at byte offset " + std::to_string(pos_) + ", expected " +
                          std::to_string(n) + " bytes, found " + std::to_string(remaining()));
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw InputError("write failed for '" + path.string() + "'");
    }
}

} // namespace lgest::io
