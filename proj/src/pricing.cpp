#include "cevsv/pricing.hpp"

#include "cevsv/density.hpp"
#include "cevsv/quadrature.hpp"
#include "cevsv/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

namespace cevsv {

namespace {

void require_branch(const ModelSpec& spec, Branch b, const char* what) {
    if (spec.branch() != b) {
        throw Error(ErrorKind::BranchMismatch, std::string(what) + ": needs the " + to_string(b) + " branch, got " +
                                                   to_string(spec.branch()));
    }
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::Domain, std::string(what) + " must be positive and finite");
    }
}

struct LogKernel {
    double log_g;
    double phi;
    double kappa;
};

LogKernel log_kernel(const ModelSpec& spec, double tau, double x, int i) {
    const double g = spec.gamma();
    const double eps = spec.epsilon();
    const double phi = 2.0 * tau * g * g * eps * eps;
    const double log_g = 2.0 * tau * g * spec.theta() - 2.0 * g * std::log(x) - std::log(phi);
    return {log_g, phi, (i - 1) / (2.0 * g)};
}

double checked_g(double log_g) {
    const double G = std::exp(log_g);
    if (!std::isfinite(G)) throw Error(ErrorKind::Overflow, "moment kernel: G = A/phi is not representable");
    return G;
}

double kernel_unchecked(const ModelSpec& spec, double tau, double x, int i) {
    if (tau == 0.0) return std::exp((i - 2.0 * spec.gamma() - 1.0) * std::log(x));
    const LogKernel k = log_kernel(spec, tau, x, i);
    const double G = checked_g(k.log_g);
    const specialfn::LogEvalResult m = specialfn::log_kummer_m(k.kappa, 2.0, -G);
    if (!m.converged) throw Error(ErrorKind::Convergence, "moment kernel: Kummer M missed its accuracy target");
    const specialfn::LogEvalResult lg = specialfn::log_gamma(2.0 - k.kappa);
    const double log_q = k.log_g + (1.0 - k.kappa) * std::log(k.phi) + lg.log_abs + m.log_abs;
    return lg.sign * m.sign * std::exp(log_q);
}

void require_kernel_inputs(const ModelSpec& spec, double t, double t_prime, double x, int i) {
    require_branch(spec, Branch::MNeg2Gamma, "moment kernel");
    require_positive(x, "initial volatility");
    if (t > t_prime) throw Error(ErrorKind::Order, "moment kernel: t must not exceed t'");
    require_valid(spec, i);
}

double payoff_value(Payoff p, double s, double K) { return p == Payoff::Call ? std::max(s - K, 0.0) : std::max(K - s, 0.0); }

} // namespace

MomentKernel MomentKernel::make(const ModelSpec& spec, double tau, double x, int i) {
    require_positive(tau, "horizon");
    require_positive(x, "initial volatility");
    const LogKernel k = log_kernel(spec, tau, x, i);
    return {checked_g(k.log_g), k.phi, k.kappa};
}

double moment_expectation_q(const ModelSpec& spec, double t, double t_prime, double x, int i) {
    require_kernel_inputs(spec, t, t_prime, x, i);
    return kernel_unchecked(spec, t_prime - t, x, i);
}

double moment_expectation_q_unreduced(const ModelSpec& spec, double t, double t_prime, double x, int i) {
    require_kernel_inputs(spec, t, t_prime, x, i);
    const double tau = t_prime - t;
    if (tau == 0.0) return moment_expectation_q_limit(spec, x, i);
    const double g = spec.gamma();
    const double eps = spec.epsilon();
    const double a = (1.0 - i + 4.0 * g) / (2.0 * g);
    const double p = (1.0 - i) / (2.0 * g);
    const double G = checked_g(log_kernel(spec, tau, x, i).log_g);
    const specialfn::LogEvalResult m = specialfn::log_kummer_m(a, 2.0, G);
    if (!m.converged) throw Error(ErrorKind::Convergence, "moment kernel: Kummer M missed its accuracy target");
    const specialfn::LogEvalResult lg = specialfn::log_gamma(a);
    const double log_q = p * std::log(2.0) + (-G + 2.0 * tau * g * spec.theta()) + p * std::log(tau * g * g * eps * eps) +
                         lg.log_abs + m.log_abs - 2.0 * g * std::log(x);
    return lg.sign * m.sign * std::exp(log_q);
}

double moment_expectation_q_limit(const ModelSpec& spec, double x, int i) {
    require_positive(x, "initial volatility");
    return std::exp((i - 2.0 * spec.gamma() - 1.0) * std::log(x));
}

double moment_by_density(const ModelSpec& spec, double t, double t_prime, double x, double power) {
    const Neg2GammaDensity d(TransitionQuery(spec, x, t, t_prime));
    const quad::Result r = d.integrate([power](double y) { return std::pow(y, power); }, 0.0,
                                       std::numeric_limits<double>::infinity(), {}, {1e-15, 1e-12, 4000});
    if (!r.converged) throw Error(ErrorKind::Convergence, "density moment: quadrature missed its target");
    return r.value;
}

SwapQuote variance_swap_fair_strike(const ModelSpec& spec, double T, double x, int i) {
    require_branch(spec, Branch::MNeg2Gamma, "variance swap");
    require_positive(T, "horizon");
    require_positive(x, "initial volatility");
    require_valid(spec, i);
    const quad::Result r =
        quad::integrate([&](double t) { return kernel_unchecked(spec, t, x, i); }, 0.0, T, {1e-10 * T, 1e-11, 2000});
    SwapQuote q{spec.branch(), i, T, x, r.value / T, r.abs_error / T, false, {}};
    if (!r.converged || !(q.quadrature_error <= 1e-8)) {
        q.flagged = true;
        q.note = "time-average quadrature missed the 1e-8 target";
    }
    return q;
}

SwapQuote moment_swap_by_density(const ModelSpec& spec, double T, double x, int i) {
    require_branch(spec, Branch::MNeg2Gamma, "density moment swap");
    require_positive(T, "horizon");
    require_positive(x, "initial volatility");
    const double xi = std::pow(x, i);
    const quad::Result r = quad::integrate(
        [&](double t) { return t == 0.0 ? xi : moment_by_density(spec, 0.0, t, x, i); }, 0.0, T,
        {1e-10 * T, 1e-10, 2000});
    SwapQuote q{spec.branch(), i, T, x, r.value / T, r.abs_error / T, false, {}};
    q.flagged = !r.converged;
    return q;
}

SwapQuote moment_swap_m_gamma(const ModelSpec& spec, double T, double x, int i) {
    require_branch(spec, Branch::MGamma, "moment swap");
    require_positive(T, "horizon");
    require_positive(x, "initial volatility");
    require_valid(spec, i);
    std::vector<double> breaks{0.0, T};
    if (const auto* tab = std::get_if<CoefficientFn::Tabulated>(&spec.q().kind())) {
        for (double k : tab->t) {
            if (k > 0.0 && k < T) breaks.push_back(k);
        }
        std::sort(breaks.begin(), breaks.end());
    }
    const CoefficientFn& q = spec.q();
    const quad::Result r = quad::integrate([&](double t) { return std::exp(i * q.integral(0.0, t)); },
                                           std::span<const double>(breaks), {0.0, 1e-13, 2000});
    const double xi = std::pow(x, i);
    SwapQuote out{spec.branch(), i, T, x, xi * r.value / T, xi * r.abs_error / T, false, {}};
    out.flagged = !r.converged;
    return out;
}

VolSwapQuote volatility_swap_from_variance(const ModelSpec& spec, double T, double x, double v1, double variance,
                                           double tolerance) {
    VolSwapQuote q;
    static_cast<SwapQuote&>(q) = SwapQuote{spec.branch(), 1, T, x, 0.0, 0.0, false, {}};
    q.v1 = v1;
    q.second_moment = variance + v1 * v1;
    q.variance = variance;
    if (variance < 0.0) {
        if (variance < -tolerance) {
            q.flagged = true;
            q.note = "negative variance beyond quadrature tolerance, clamped to zero";
        }
        q.variance = 0.0;
        q.variance_clamped = true;
    }
    q.value = std::sqrt(v1) - q.variance / (8.0 * std::pow(v1, 1.5));
    return q;
}

VolSwapQuote volatility_swap_fair_strike(const ModelSpec& spec, double T, double x) {
    const SwapQuote first = variance_swap_fair_strike(spec, T, x, 1);
    auto q = [&](double t) { return kernel_unchecked(spec, t, x, 1); };
    bool converged = true;
    double inner_err = 0.0;
    const quad::Result outer = quad::integrate(
        [&](double s) {
            const quad::Result inner = quad::integrate(q, 0.0, T, {1e-13 * T, 1e-13, 2000});
            converged = converged && inner.converged;
            inner_err = std::max(inner_err, inner.abs_error);
            return q(s) * inner.value;
        },
        0.0, T, {1e-13 * T * T, 1e-13, 2000});
    const double second = outer.value / (T * T);
    const double err2 = outer.abs_error / (T * T) + first.value * inner_err / T;
    const double variance = second - first.value * first.value;
    const double tol = 2.0 * (err2 + 2.0 * first.value * first.quadrature_error) + 1e-14 * second;
    VolSwapQuote out = volatility_swap_from_variance(spec, T, x, first.value, variance, tol);
    out.quadrature_error = first.quadrature_error / (2.0 * std::sqrt(first.value)) + tol;
    if (first.flagged || !outer.converged || !converged) {
        out.flagged = true;
        if (out.note.empty()) out.note = "second-moment quadrature missed its target";
    }
    return out;
}

const char* to_string(Payoff p) noexcept { return p == Payoff::Call ? "call" : "put"; }

const char* to_string(OptionMethod m) noexcept {
    return m == OptionMethod::ClosedForm ? "closed_form" : "double_integral";
}

double option_m_gamma_closed_form(const ModelSpec& spec, double T, double x, int n, double K, double r,
                                  Payoff payoff) {
    const double alpha_xn = moment_swap_m_gamma(spec, T, x, n).value;
    const double disc = std::exp(-r * T);
    return payoff == Payoff::Call ? disc * (alpha_xn - K) : disc * (K - alpha_xn);
}

namespace {

struct SliceScan {
    std::vector<double> breaks;
    bool all_above = true;
    bool all_below = true;
};

// Locates where x^n e^{n int_0^t q} crosses K on [0, T].
SliceScan scan_slices(const ModelSpec& spec, double T, double x, int n, double K) {
    const double xn = std::pow(x, n);
    auto excess = [&](double t) { return xn * std::exp(n * spec.q().integral(0.0, t)) - K; };
    constexpr int kScan = 256;
    SliceScan s;
    s.breaks.push_back(0.0);
    double t_prev = 0.0;
    double f_prev = excess(0.0);
    for (int k = 0; k <= kScan; ++k) {
        const double t = T * k / kScan;
        const double f = excess(t);
        if (f < 0.0) s.all_above = false;
        if (f > 0.0) s.all_below = false;
        if (k > 0 && ((f_prev < 0.0) != (f < 0.0))) {
            double a = t_prev;
            double b = t;
            for (int it = 0; it < 200 && b - a > 1e-15 * T; ++it) {
                const double mid = 0.5 * (a + b);
                if ((excess(mid) < 0.0) == (f_prev < 0.0)) a = mid;
                else b = mid;
            }
            s.breaks.push_back(0.5 * (a + b));
        }
        t_prev = t;
        f_prev = f;
    }
    if (const auto* tab = std::get_if<CoefficientFn::Tabulated>(&spec.q().kind())) {
        for (double k : tab->t) {
            if (k > 0.0 && k < T) s.breaks.push_back(k);
        }
    }
    s.breaks.push_back(T);
    std::sort(s.breaks.begin(), s.breaks.end());
    s.breaks.erase(std::unique(s.breaks.begin(), s.breaks.end()), s.breaks.end());
    return s;
}

void require_option_inputs(double T, double x, int n, double K) {
    require_positive(T, "horizon");
    require_positive(x, "initial volatility");
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "option: moment order must be >= 1");
    if (!(K >= 0.0) || !std::isfinite(K)) throw Error(ErrorKind::Domain, "option: strike must be non-negative");
}

} // namespace

OptionQuote option_m_gamma_slices(const ModelSpec& spec, double T, double x, int n, double K, double r,
                                  Payoff payoff) {
    require_branch(spec, Branch::MGamma, "option on moment swap");
    require_option_inputs(T, x, n, K);
    require_valid(spec, n);
    const SliceScan scan = scan_slices(spec, T, x, n, K);
    const double xn = std::pow(x, n);
    const quad::Result q = quad::integrate(
        [&](double t) { return payoff_value(payoff, xn * std::exp(n * spec.q().integral(0.0, t)), K); },
        std::span<const double>(scan.breaks), {1e-14 * T, 1e-13, 2000});
    const double disc = std::exp(-r * T);
    OptionQuote out{payoff, n, K, r, T, disc * q.value / T, disc * q.abs_error / T, OptionMethod::DoubleIntegral};
    out.flagged = !q.converged;
    return out;
}

OptionQuote option_on_moment_swap(const ModelSpec& spec, double T, double x, int n, double K, double r,
                                  Payoff payoff) {
    require_option_inputs(T, x, n, K);
    if (spec.branch() == Branch::MGamma) {
        require_valid(spec, n);
        const SliceScan scan = scan_slices(spec, T, x, n, K);
        const bool in_the_money = payoff == Payoff::Call ? scan.all_above : scan.all_below;
        const bool out_of_the_money = payoff == Payoff::Call ? scan.all_below : scan.all_above;
        if (in_the_money || out_of_the_money) {
            const double v = in_the_money ? option_m_gamma_closed_form(spec, T, x, n, K, r, payoff) : 0.0;
            return {payoff, n, K, r, T, v, 0.0, OptionMethod::ClosedForm};
        }
        return option_m_gamma_slices(spec, T, x, n, K, r, payoff);
    }
    require_branch(spec, Branch::MNeg2Gamma, "option on moment swap");
    if (!(spec.gamma() < 0.0)) {
        throw Error(ErrorKind::Domain, "option on moment swap: the m = -2 gamma density is used only for gamma < 0");
    }
    require_valid(spec, n);
    const double y_star = K > 0.0 ? std::pow(K, 1.0 / n) : 0.0;
    bool inner_ok = true;
    double inner_err = 0.0;
    auto slice_value = [&](double tau) {
        if (tau <= 0.0) return payoff_value(payoff, std::pow(x, n), K);
        const Neg2GammaDensity d =
            Neg2GammaDensity::from_parameters(spec.gamma(), spec.theta(), spec.epsilon(), x, tau);
        const quad::Options opt{1e-14, 1e-11, 4000};
        quad::Result res;
        double atom = 0.0;
        if (payoff == Payoff::Call) {
            res = d.integrate([&](double y) { return std::pow(y, n) - K; }, y_star,
                              std::numeric_limits<double>::infinity(), {}, opt);
        } else {
            if (y_star <= 0.0) return 0.0;
            res = d.integrate([&](double y) { return K - std::pow(y, n); }, 0.0, y_star, {}, opt);
            atom = K * d.atom_mass();
        }
        inner_ok = inner_ok && res.converged;
        inner_err = std::max(inner_err, res.abs_error);
        return std::max(res.value, 0.0) + atom;
    };
    const quad::Result outer = quad::integrate(slice_value, 0.0, T, {1e-11 * T, 1e-9, 2000});
    const double disc = std::exp(-r * T);
    OptionQuote out{payoff, n, K, r, T, disc * outer.value / T, disc * (outer.abs_error / T + inner_err),
                    OptionMethod::DoubleIntegral};
    out.flagged = !outer.converged || !inner_ok;
    return out;
}

} // namespace cevsv
