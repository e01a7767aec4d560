#ifndef XFER_COMMON_HPP
#define XFER_COMMON_HPP

#include <stdexcept>
#include <string>

namespace xfer {

// Malformed or contract-violating input: bad feature files, config keys,
// dimension mismatches, degenerate datasets. CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Failure raised while fitting a model. CLI exit code 3.
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace xfer

#endif
