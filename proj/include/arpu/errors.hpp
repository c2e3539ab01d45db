#pragma once

#include <stdexcept>
#include <string>

namespace arpu {

// Invalid configuration or parameter combination; the CLI maps this to exit 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A queried point sits exactly on the hidden decision boundary.
struct degenerate_point_error : std::runtime_error {
    explicit degenerate_point_error(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace arpu
