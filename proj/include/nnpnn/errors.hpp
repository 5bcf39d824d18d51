#ifndef NNPNN_ERRORS_HPP
#define NNPNN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nnpnn {

// Structural misuse: dimension or shape mismatches, malformed graphs.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data problems: non-finite values encountered in a forward/backward pass.
struct ValueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration or command usage.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File I/O problems, always carrying the offending path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a training loop hits a non-finite loss or gradient; the
// parameter state at the start of the failing iteration is still intact.
struct TrainAbortError : std::runtime_error {
    long long iteration;
    TrainAbortError(long long iter, const std::string& what)
        : std::runtime_error(what), iteration(iter) {}
};

}  // namespace nnpnn

#endif
