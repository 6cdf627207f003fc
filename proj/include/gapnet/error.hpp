#pragma once

#include <stdexcept>
#include <string>

namespace gapnet {

/// Bad input: shapes, files, configuration. The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure while training or evaluating. The CLI maps it to exit code 3.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gapnet
