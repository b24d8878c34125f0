#pragma once

#include <stdexcept>
#include <string>

namespace netwave {

// Error taxonomy mirrored by the CLI exit codes: io -> 1, invalid input -> 2,
// cap/inconclusive -> 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace netwave
