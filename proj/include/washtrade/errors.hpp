#pragma once

#include <stdexcept>
#include <string>

namespace washtrade {

/// Malformed input data (bad row, unparsable field, broken schema).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or unsupported option value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace washtrade
