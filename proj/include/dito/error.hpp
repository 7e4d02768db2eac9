#pragma once

#include <stdexcept>

namespace dito {

// Error taxonomy used across the library; the CLI maps these onto exit codes.
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dito
