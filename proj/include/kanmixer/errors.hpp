#ifndef KANMIXER_ERRORS_HPP_
#define KANMIXER_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace kanmixer {

// Dimension/shape violations (matmul mismatch, wrong lookback, ...).
struct shape_error : std::runtime_error {
    explicit shape_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration values (pool kernel <= 0, empty split, unknown key, ...).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// API contract violations (backward on a non-scalar loss, ...).
struct contract_error : std::runtime_error {
    explicit contract_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset / file ingestion failures, with positional context where known.
struct load_error : std::runtime_error {
    explicit load_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint / report parsing failures.
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kanmixer

#endif  // KANMIXER_ERRORS_HPP_
