#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cevsv {

enum class ErrorKind {
    Domain,           // argument outside the function's domain
    Pole,             // Gamma at a non-positive integer
    Overflow,         // result not representable; use the log-space variant
    InvalidParameter, // e.g. Kummer b at a non-positive integer
    Order,            // t > t'
    BranchMismatch,   // operation called with the wrong model branch
    Validation,       // ModelSpec fails closed-form pricing requirements
    Convergence,      // numerical routine missed its error target
    Stability,        // Monte Carlo explosion guard tripped
    ConfigParse,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// One violated closed-form pricing requirement, reported by validate().
struct Violation {
    enum class Code {
        GammaZero,
        EpsilonNonPositive,
        ThetaNegative,
        MomentOrderInvalid,
        MomentRangeTable,       // gamma > 0 outside the beta range for moment i
        GammaBelowMinusOne,
        CoefficientPairMismatch,
        MeanReversionSign,
        MomentIntegralDiverges, // m = -gamma branch
    };
    Code code;
    std::string message;
};

const char* to_string(Violation::Code code) noexcept;

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

} // namespace cevsv
