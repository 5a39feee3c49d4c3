#pragma once

#include <stdexcept>
#include <string>

namespace cefr {

// Thrown on bad CLI usage / bad arguments. Maps to exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on malformed or inconsistent data. Maps to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on backend/provider failures (auth, transport, bad replies).
// Maps to exit code 3.
struct ProviderError : std::runtime_error {
    explicit ProviderError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cefr
