// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace relight {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration (unknown kind, T = 0, bad variant name, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation's precondition (shape mismatch, wrong timestep).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Stepping below t = 0 or above t = T.
class StepRangeError : public ContractError {
public:
    using ContractError::ContractError;
};

/// Replay requested a (layer, t) entry the cache does not hold.
class CacheMissError : public Error {
public:
    CacheMissError(std::string layer, int t)
        : Error("attention cache miss: layer '" + layer + "' at t=" + std::to_string(t)),
          layer_(std::move(layer)), t_(t) {}

    const std::string& layer() const { return layer_; }
    int timestep() const { return t_; }

private:
    std::string layer_;
    int t_;
};

/// Input for which the method is undefined (all-black image, constant latent channel).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class DatasetError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace relight
