#pragma once

#include <stdexcept>
#include <string>

namespace cmsn {

// quadrature non-convergence, invalid numeric state
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// malformed sketch files / text inputs
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad experiment configs / CLI usage
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cmsn
