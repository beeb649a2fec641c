// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dynscene {

// Root of every error the library throws. The CLI maps the three families
// below onto its exit codes (validation 2, bridge 3, I/O 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition or contract violation in caller-supplied data.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Anything that goes wrong while talking to an outpainter.
class BridgeError : public Error {
public:
    using Error::Error;
};

class ExchangeTimeout : public BridgeError {
public:
    using BridgeError::BridgeError;
};

class MalformedResult : public BridgeError {
public:
    using BridgeError::BridgeError;
};

class DimensionMismatch : public BridgeError {
public:
    using BridgeError::BridgeError;
};

class ObservedDrift : public BridgeError {
public:
    using BridgeError::BridgeError;
};

} // namespace dynscene
