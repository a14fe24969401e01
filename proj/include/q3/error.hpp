#pragma once

#include <stdexcept>
#include <string>

namespace q3 {

enum class ErrorKind {
    Parameter,      // argument outside its documented domain
    Data,           // malformed or inconsistent input data
    Capacity,       // representable range exceeded
    Configuration,  // scenario/wiring does not fit the model
    Normalization,  // estimator normalization undefined
    Budget,         // probe budget too small
    Signal,         // no usable signal
    Domain,         // no real solution
    Fit,            // fit ill-conditioned
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so the CLI can map it
/// to an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

/// Validation failures on user input; the CLI exits with code 2 for these.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what)
        : Error(ErrorKind::Parameter, what) {}
};

}  // namespace q3
