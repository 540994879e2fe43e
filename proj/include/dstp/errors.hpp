#pragma once

#include <stdexcept>
#include <string>

namespace dstp {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape disagreement between operands.
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Precondition violation (out-of-range index, non-scalar loss, empty input).
struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration (unknown architecture, bad hyperparameter).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Dataset loading / parsing failure.
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Operation not available for the given architecture.
struct UnsupportedError : Error {
    explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
    DivergenceError(const std::string& msg, int epoch, int batch)
        : Error(msg), epoch(epoch), batch(batch) {}
    int epoch;
    int batch;
};

}  // namespace dstp
