#pragma once

#include <stdexcept>
#include <string>

namespace secor {

// Error taxonomy shared across the library. The C API maps each type to a
// status code; inside the C++ core these are thrown and never swallowed.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct BackendError : Error { using Error::Error; };
struct IntegrityError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace secor
