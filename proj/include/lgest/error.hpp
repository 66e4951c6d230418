// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lgest {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes that do not compose (matmul inner dims, conv geometry, config widths).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite values produced or consumed by an operation.
class NumericError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// Operation invoked in the wrong lifecycle state (e.g. BatchNorm eval before any train step).
class StateError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated binary file.
class FormatError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

} // namespace lgest
