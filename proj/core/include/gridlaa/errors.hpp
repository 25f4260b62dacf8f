#pragma once

#include <stdexcept>
#include <string>

namespace gridlaa {

/// Malformed input text (case file or parameter file). Carries a 1-based
/// line/column position when the offending token is known.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line = 0, int column = 0)
        : std::runtime_error(annotate(message, line, column)),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    static std::string annotate(const std::string& message, int line, int column);
    int line_ = 0;
    int column_ = 0;
};

/// Structurally well-formed input that violates a model precondition
/// (disconnected graph, nonpositive reactance, budget violation, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside an analysis routine (singular pencil, defective
/// spectrum, non-convergent iteration).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Defense LP infeasible after exhausting the margin escalation schedule.
class DefenseInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gridlaa
