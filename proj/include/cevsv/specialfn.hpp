#pragma once

// Special functions needed by the closed-form densities and moment formulas:
// Gamma, log-Gamma, Kummer's confluent hypergeometric M(a, b, z) and the
// modified Bessel function I_1. All functions are pure and thread-safe.

namespace cevsv::specialfn {

struct EvalResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    bool converged = false;
};

/// Value carried as log|f| and sign(f). abs_error_estimate is the absolute
/// error of log_abs, i.e. the relative error of f.
struct LogEvalResult {
    double log_abs = 0.0;
    int sign = 1;
    double abs_error_estimate = 0.0;
    bool converged = false;
};

/// I_1 result; when `scaled` is set, value holds e^{-z} I_1(z).
struct BesselResult : EvalResult {
    bool scaled = false;
};

/// Gamma(a). Throws Pole at non-positive integers, Overflow above ~171.6.
EvalResult gamma(double a);

/// log|Gamma(a)| and sign(Gamma(a)). Throws Pole at non-positive integers.
LogEvalResult log_gamma(double a);

/// Kummer M(a, b, z) = 1F1(a; b; z). Throws InvalidParameter when b is a
/// non-positive integer and Overflow when the value is not representable.
EvalResult kummer_m(double a, double b, double z);

/// log-space Kummer M; never overflows for finite z.
LogEvalResult log_kummer_m(double a, double b, double z);

/// I_1(z) for z <= 700, otherwise e^{-z} I_1(z) with `scaled` set.
BesselResult bessel_i1(double z);

/// e^{-z} I_1(z) for any z >= 0.
EvalResult bessel_i1_scaled(double z);

/// |z| at which kummer_m switches from the ascending series to the
/// large-argument asymptotic expansion.
inline constexpr double kKummerAsymptoticThreshold = 30.0;

/// Relative accuracy below which a Kummer evaluation is reported converged.
inline constexpr double kKummerRelativeTarget = 1e-10;

namespace detail {
// Individual regimes, exposed for cross-validation tests.
LogEvalResult kummer_series(double a, double b, double z);
LogEvalResult kummer_asymptotic(double a, double b, double z);
bool is_nonpositive_integer(double v) noexcept;
} // namespace detail

} // namespace cevsv::specialfn
