#pragma once
// Error taxonomy shared across the library. The CLI maps each category onto
// a distinct process exit code.

#include <stdexcept>
#include <string>

namespace starsvm {

// Input file contents do not match the expected schema.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration or argument validation failure.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A solver stopped without reaching its convergence criterion.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem read/write failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int schema = 2;
inline constexpr int validation = 3;
inline constexpr int convergence = 4;
inline constexpr int io = 5;
}  // namespace exit_code

}  // namespace starsvm
