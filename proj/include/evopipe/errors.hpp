#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evopipe {

/// Caller violated a documented precondition.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Structurally malformed input file (bad header, wrong cell count, ...).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unparseable cell or expression; carries a location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg), offset_(offset) {}

    /// Byte offset (expressions) or encoded position (CSV cells).
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Input was well-formed but semantically unusable (single-class labels, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A pipeline operator could not run on its intermediate dataset. Absorbed by
/// evaluate_pipeline as a failed fitness, never propagated to callers.
class PipelineFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Penetrance-table search exhausted its attempt budget.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection sampling exhausted its attempt budget.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace evopipe
