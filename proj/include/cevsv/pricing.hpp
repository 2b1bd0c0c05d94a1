#pragma once

#include "cevsv/model.hpp"

#include <string>

namespace cevsv {

struct SwapQuote {
    Branch branch;
    int moment_order;
    double horizon;
    double x0;
    double value;
    double quadrature_error;
    bool flagged = false;
    std::string note;
};

/// Parameters of the confluent form Q = G phi^{1-kappa} Gamma(2-kappa) M(kappa, 2, -G).
struct MomentKernel {
    double G;
    double phi;
    double kappa;

    static MomentKernel make(const ModelSpec& spec, double tau, double x, int i);
};

/// Closed-form moment kernel Q(t, t', x) of the m = -2 gamma model,
/// evaluated in log space. Requires a valid spec (see validate) and t' > t.
/// The kernel is the expectation of y^{i - 2 gamma - 1} under the transition law.
double moment_expectation_q(const ModelSpec& spec, double t, double t_prime, double x, int i);

/// The same kernel written with e^{-G} M(2 - kappa, 2, G) before Kummer's transformation.
double moment_expectation_q_unreduced(const ModelSpec& spec, double t, double t_prime, double x, int i);

/// tau -> 0 limit of the kernel, x^{i - 2 gamma - 1}.
double moment_expectation_q_limit(const ModelSpec& spec, double x, int i);

/// int y^power p(y) dy over the continuous part of the m = -2 gamma law,
/// by adaptive quadrature. The boundary atom contributes nothing for power > 0, gamma < 0.
double moment_by_density(const ModelSpec& spec, double t, double t_prime, double x, double power);

/// Fair strike (1/T) int_0^T Q(0, t', x) dt' of the i-th moment swap, m = -2 gamma.
SwapQuote variance_swap_fair_strike(const ModelSpec& spec, double T, double x, int i);

/// Fair strike (1/T) int_0^T E[y^i] dt' with E[y^i] from quadrature of the density.
SwapQuote moment_swap_by_density(const ModelSpec& spec, double T, double x, int i);

/// m = gamma moment swap: x^i (1/T) int_0^T exp(i int_0^t' q) dt'.
SwapQuote moment_swap_m_gamma(const ModelSpec& spec, double T, double x, int i);

struct VolSwapQuote : SwapQuote {
    double v1;
    double second_moment;
    double variance;
    bool variance_clamped = false;
};

/// sqrt(V1) - Var[V]/(8 V1^{3/2}) with E[V^2] = (1/T^2) int int Q(s) Q(t) ds dt.
VolSwapQuote volatility_swap_fair_strike(const ModelSpec& spec, double T, double x);

/// Convexity-corrected quote from a given first moment and variance.
VolSwapQuote volatility_swap_from_variance(const ModelSpec& spec, double T, double x, double v1, double variance,
                                           double tolerance);

enum class Payoff { Call, Put };
enum class OptionMethod { ClosedForm, DoubleIntegral };

const char* to_string(Payoff p) noexcept;
const char* to_string(OptionMethod m) noexcept;

struct OptionQuote {
    Payoff payoff;
    int moment_order;
    double strike;
    double rate;
    double horizon;
    double value;
    double quadrature_error;
    OptionMethod method;
    bool flagged = false;
};

/// e^{-rT} (1/T) int_0^T E[(y_t^n - K)^+] dt (call) or the put analogue.
/// m = -2 gamma (gamma < 0): nested quadrature over t and the density.
/// m = gamma: integral over the deterministic slices, closed form when the
/// payoff sign is constant over [0, T].
OptionQuote option_on_moment_swap(const ModelSpec& spec, double T, double x, int n, double K, double r, Payoff payoff);

/// m = gamma closed form e^{-rT} (alpha x^n - K), put e^{-rT} (K - alpha x^n).
double option_m_gamma_closed_form(const ModelSpec& spec, double T, double x, int n, double K, double r,
                                  Payoff payoff);

/// m = gamma per-slice integral e^{-rT} (1/T) int_0^T (x^n e^{n int q} - K)^+ dt.
OptionQuote option_m_gamma_slices(const ModelSpec& spec, double T, double x, int n, double K, double r,
                                  Payoff payoff);

} // namespace cevsv
