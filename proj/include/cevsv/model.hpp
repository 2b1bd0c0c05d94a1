#pragma once

#include "cevsv/error.hpp"

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cevsv {

/// Deterministic coefficient of time, q(t) or l(t).
class CoefficientFn {
public:
    struct Constant {
        double c;
    };
    /// scale * exp(-rate * t)
    struct ExpDecay {
        double scale;
        double rate;
    };
    /// Piecewise-linear through the knots, flat outside them.
    struct Tabulated {
        std::vector<double> t;
        std::vector<double> v;
    };
    using Kind = std::variant<Constant, ExpDecay, Tabulated>;

    static CoefficientFn constant(double c);
    static CoefficientFn exp_decay(double scale, double rate);
    static CoefficientFn tabulated(std::vector<std::pair<double, double>> knots);

    double operator()(double t) const;
    /// Exact integral over [a, b] (a <= b not required).
    double integral(double a, double b) const;

    const Kind& kind() const noexcept { return kind_; }
    std::string describe() const;

private:
    explicit CoefficientFn(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

enum class Branch { MNegGamma, MGamma, MNeg2Gamma };

const char* to_string(Branch b) noexcept;

/// One of the three solvable mean-reverting CEV volatility models
///   dx = [q(t) x + (1 - m)/2 l(t)^2 x^{2 gamma + 1}] dt + l(t) x^{gamma + 1} dZ
/// with m = -gamma, gamma or -2 gamma. Immutable once constructed.
///
/// Time arguments of the coefficient functions are backward times (time to
/// the horizon), matching the Kolmogorov equation the closed forms solve.
class ModelSpec {
public:
    /// Throws ValidationError when gamma == 0, epsilon <= 0 or theta < 0.
    ModelSpec(Branch branch, double gamma, double theta, double epsilon, CoefficientFn q, CoefficientFn l);

    /// Coefficient pair required by the m = -2 gamma closed forms:
    /// q(t) = -theta and l(t) = epsilon exp(-theta gamma t).
    static ModelSpec neg2gamma_standard(double gamma, double theta, double epsilon);

    Branch branch() const noexcept { return branch_; }
    double gamma() const noexcept { return gamma_; }
    double theta() const noexcept { return theta_; }
    double epsilon() const noexcept { return epsilon_; }
    const CoefficientFn& q() const noexcept { return q_; }
    const CoefficientFn& l() const noexcept { return l_; }

    /// The symmetry exponent m of the branch.
    double m() const noexcept;

private:
    Branch branch_;
    double gamma_;
    double theta_;
    double epsilon_;
    CoefficientFn q_;
    CoefficientFn l_;
};

// Drift and diffusion of the instantaneous-volatility SDE. Domain error for x <= 0.
double drift_vol(const ModelSpec& spec, double t, double x);
double diffusion_vol(const ModelSpec& spec, double t, double x);

/// Drift of the variance v = x^2 (Ito image of drift_vol). Domain error for v <= 0.
double drift_var(const ModelSpec& spec, double t, double v);

/// Z(t, t') = exp(gamma * int_t^t' q). Order error when t > t'.
double z_factor(const ModelSpec& spec, double t, double t_prime);

/// w(tau) = gamma^2/2 * int_0^tau l(y)^2 Z(0, y)^{-2} dy, the quadratic
/// exponent of the m = -gamma generalized Laplace transform.
double laplace_variance_term(const ModelSpec& spec, double tau);

/// True when q and l match the m = -2 gamma closed-form pair within 1e-12
/// pointwise on a probe grid over [0, t_max].
bool has_standard_coefficient_pair(const ModelSpec& spec, double t_max = 10.0);

/// Violations preventing closed-form pricing of the i-th moment; empty when
/// the spec is supported.
std::vector<Violation> validate(const ModelSpec& spec, int moment_order);

/// Throws ValidationError when validate() reports anything.
void require_valid(const ModelSpec& spec, int moment_order);

} // namespace cevsv
