#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace entrovol {

/// Base of every error raised by the library. `kind()` is a stable
/// identifier (e.g. "MalformedRow") used in CLI diagnostics and tests.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& why)
        : Error("MalformedRow", "line " + std::to_string(line) + ": " + why), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

#define ENTROVOL_SIMPLE_ERROR(Name)                                                   \
    class Name : public Error {                                                       \
    public:                                                                           \
        explicit Name(const std::string& message) : Error(#Name, message) {}          \
    }

ENTROVOL_SIMPLE_ERROR(EmptyFile);
ENTROVOL_SIMPLE_ERROR(NonMonotonicDates);
ENTROVOL_SIMPLE_ERROR(TooShort);
ENTROVOL_SIMPLE_ERROR(IoFailure);
ENTROVOL_SIMPLE_ERROR(WindowTooWide);
ENTROVOL_SIMPLE_ERROR(InvalidConfig);
ENTROVOL_SIMPLE_ERROR(LengthMismatch);
ENTROVOL_SIMPLE_ERROR(SeriesTooShort);
ENTROVOL_SIMPLE_ERROR(DegenerateTolerance);
ENTROVOL_SIMPLE_ERROR(ConstantInput);
ENTROVOL_SIMPLE_ERROR(LagTooLarge);
ENTROVOL_SIMPLE_ERROR(InvalidDf);
ENTROVOL_SIMPLE_ERROR(SingularRegression);
ENTROVOL_SIMPLE_ERROR(NonConvergence);
ENTROVOL_SIMPLE_ERROR(SingularFit);
ENTROVOL_SIMPLE_ERROR(HorizonZero);
ENTROVOL_SIMPLE_ERROR(ConstantFeature);
ENTROVOL_SIMPLE_ERROR(InvalidHyperparameter);
ENTROVOL_SIMPLE_ERROR(InvalidK);
ENTROVOL_SIMPLE_ERROR(ZeroActualForMape);

#undef ENTROVOL_SIMPLE_ERROR

}  // namespace entrovol
