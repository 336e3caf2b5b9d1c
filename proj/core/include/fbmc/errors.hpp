#pragma once

#include <stdexcept>
#include <string>

namespace fbmc {

/// Normal equations of an MMSE design could not be factorized.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A duality transform produced a non-positive scaling factor.
class DualityInfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fbmc
