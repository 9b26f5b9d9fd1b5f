#pragma once

#include <stdexcept>
#include <string>

namespace stdgan {

// Dataset/manifest/file problems; the CLI maps these to exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad invocation or configuration; exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace stdgan
