#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace cascadecomp {

namespace detail {

// Compact numeric text for error messages.
inline std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

} // namespace detail

// Broad failure classes. The CLI maps these one-to-one onto exit codes.
enum class ErrorKind {
    validation = 1,
    design = 2,
    numerical = 3,
    io = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Shape mismatch or a non-square argument where a square one is required.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

// Malformed input values: NaN entries, bad pole sets, short histories, ...
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

// Step sizes or grids that break a stability (CFL) or consistency rule.
class ConfigurationError : public Error {
public:
    explicit ConfigurationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class SingularityError : public NumericalError {
public:
    SingularityError(const std::string& what, double rcond) : NumericalError(what), rcond_(rcond) {}

    [[nodiscard]] double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

// Integration blew up (NaN/Inf). Carries the step index and simulated time.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, long step, double time)
        : NumericalError(what + " (step " + std::to_string(step) + ", t = " + detail::fmt_g(time) + ")"),
          step_(step),
          time_(time) {}

    [[nodiscard]] long step() const noexcept { return step_; }
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    long step_;
    double time_;
};

// A control-design hypothesis does not hold (controllability, spectrum
// separation, invertibility of cosh G, ...).
class DesignError : public Error {
public:
    explicit DesignError(const std::string& what) : Error(ErrorKind::design, what) {}
};

// Spectra of the two Sylvester coefficients collide: no unique solution.
class SpectrumOverlapError : public DesignError {
public:
    SpectrumOverlapError(const std::string& what, double gap) : DesignError(what), gap_(gap) {}

    [[nodiscard]] double gap() const noexcept { return gap_; }

private:
    double gap_;
};

// Integration contour does not separate the two spectra.
class ContourError : public DesignError {
public:
    explicit ContourError(const std::string& what) : DesignError(what) {}
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::string path) : Error(ErrorKind::io, what + ": " + path), path_(std::move(path)) {}

    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace cascadecomp
