#pragma once

#include <stdexcept>
#include <string>

namespace covihawkes {

/// Malformed input file content; message carries file name and line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + " line " + std::to_string(line) + ": " + what) {}
};

/// Input data violates a cross-series invariant (decreasing cumulative
/// vaccination, infected plus vaccinated exceeding population, ...).
struct DataConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownRegionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyAggregationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Optimization produced a non-finite objective or gradient.
struct TrainingDivergedError : std::runtime_error {
    TrainingDivergedError(int iteration, const std::string& what)
        : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
          iteration(iteration) {}
    int iteration;
};

}  // namespace covihawkes
