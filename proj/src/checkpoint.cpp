// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/checkpoint.hpp"

#include <limits>
#include <unordered_set>

#include "lgest/binary_io.hpp"
#include "lgest/error.hpp"

namespace lgest {

namespace {

constexpr char kMagic[] = "LGW1";

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParameterStore& store) {
    io::ByteWriter w;
    w.text(kMagic);
    for (const std::string& name : store.names()) {
        const Tensor& t = store.at(name);
        if (name.size() > std::numeric_limits<std::uint16_t>::max() || t.rank() > 255) {
            throw FormatError("checkpoint: tensor '" + name + "' cannot be encoded");
        }
        w.u16(static_cast<std::uint16_t>(name.size()));
        w.text(name);
        w.u8(static_cast<std::uint8_t>(t.rank()));
        for (std::size_t d : t.shape()) {
            w.u32(static_cast<std::uint32_t>(d));
        }
        for (double v : t.values()) {
            w.f64(v);
        }
    }
    return w.take();
}

std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes, "checkpoint");
    if (r.remaining() < 4 || r.text(4) != kMagic) {
        throw FormatError("checkpoint: bad magic at byte offset 0, expected \"LGW1\"");
    }
    std::vector<NamedTensor> entries;
    while (!r.done()) {
        const std::size_t start = r.offset();
        const std::uint16_t len = r.u16();
        std::string name = r.text(len);
        const std::uint8_t rank = r.u8();
        Shape shape;
        for (std::uint8_t i = 0; i < rank; ++i) {
            shape.push_back(r.u32());
        }
        const std::size_t count = numel(shape);
        r.require(count * sizeof(double), "values of '" + name + "' (entry at byte offset " +
                                              std::to_string(start) + ")");
        std::vector<double> values(count);
        for (double& v : values) {
            v = r.f64();
        }
        entries.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
    }
    return entries;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store) {
    io::write_file(path, encode_checkpoint(store));
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(io::read_file(path));
}

void assign_checkpoint(const std::vector<NamedTensor>& entries, ParameterStore& store) {
    std::unordered_set<std::string> seen;
    for (const NamedTensor& e : entries) {
        if (!store.contains(e.name)) {
            throw FormatError("checkpoint: unexpected tensor '" + e.name + "'");
        }
        Tensor& dst = store.at(e.name);
        if (dst.shape() != e.value.shape()) {
            throw FormatError("checkpoint: tensor '" + e.name + "' has shape " + to_string(e.value.shape()) +
                              ", model expects " + to_string(dst.shape()));
        }
        std::copy(e.value.values().begin(), e.value.values().end(), dst.values().begin());
        seen.insert(e.name);
    }
    for (const std::string& name : store.names()) {
        if (!seen.count(name)) {
            throw FormatError("checkpoint: missing tensor '" + name + "'");
        }
    }
}

void load_checkpoint(const std::filesystem::path& path, ParameterStore& store) {
    assign_checkpoint(read_checkpoint(path), store);
}

} // namespace lgest
