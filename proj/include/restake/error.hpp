#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace restake {

// Domain error carrying a stable machine-readable code (e.g. "unknown-service",
// "unstable-attack"). The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace restake
