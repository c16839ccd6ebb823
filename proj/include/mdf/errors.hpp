#pragma once

#include <stdexcept>
#include <string>

namespace mdf {

// Base class for all toolkit errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written, or ends prematurely.
struct io_error : error {
    using error::error;
};

// File or config contents do not match the expected format/schema.
struct format_error : error {
    using error::error;
};

}  // namespace mdf
