#pragma once

#include <stdexcept>
#include <string>

namespace qdprobe {

// Bad user input: configs, specs, out-of-range arguments. CLI exit code 1.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Versioned file whose schema tag does not match what this build reads.
class schema_error : public std::runtime_error {
public:
    schema_error(const std::string& found, const std::string& expected)
        : std::runtime_error("schema version mismatch: found '" + found +
                             "', this build reads '" + expected + "'"),
          found_version(found), expected_version(expected) {}
    std::string found_version;
    std::string expected_version;
};

// Nonlinear fit did not converge or produced an unusable solution.
class fit_error : public std::runtime_error {
public:
    explicit fit_error(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), rms_residual(residual) {}
    double rms_residual;
};

}  // namespace qdprobe
