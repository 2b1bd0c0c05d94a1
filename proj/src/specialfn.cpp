#include "cevsv/specialfn.hpp"

#include "cevsv/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace cevsv::specialfn {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kRescale = 1e250;
const double kLogRescale = std::log(kRescale);
constexpr int kMaxSeriesTerms = 200000;
constexpr int kMaxAsymptoticTerms = 400;
// Largest argument of exp() that does not overflow.
constexpr double kMaxLogDouble = 709.78;

double lgamma_signed(double x, int& sign) {
    int s = 1;
    const double v = ::lgamma_r(x, &s);
    sign = s;
    return v;
}

std::string describe(double a, double b, double z) {
    std::ostringstream os;
    os.precision(17);
    os << "(a=" << a << ", b=" << b << ", z=" << z << ")";
    return os.str();
}

// Ascending series sum_n (a)_n / (b)_n z^n / n!, rescaled to avoid overflow.
LogEvalResult series_direct(double a, double b, double z) {
    double term = 1.0;
    double sum = 1.0;
    double abs_sum = 1.0;
    double log_offset = 0.0;
    bool finished = false;
    int n = 0;
    for (; n < kMaxSeriesTerms; ++n) {
        const double an = a + n;
        if (an == 0.0) { // polynomial case: every later term vanishes
            term = 0.0;
            finished = true;
            break;
        }
        term *= an / (b + n) * z / (n + 1);
        sum += term;
        abs_sum += std::abs(term);
        if (abs_sum > kRescale) {
            term /= kRescale;
            sum /= kRescale;
            abs_sum /= kRescale;
            log_offset += kLogRescale;
        }
        const double next_ratio = std::abs((an + 1.0) * z / ((b + n + 1.0) * (n + 2.0)));
        if (std::abs(term) <= 1e-17 * std::abs(sum) && next_ratio < 0.5) {
            finished = true;
            break;
        }
    }

    LogEvalResult r;
    if (sum == 0.0) {
        r.log_abs = -std::numeric_limits<double>::infinity();
        r.sign = 1;
        r.abs_error_estimate = std::numeric_limits<double>::infinity();
        r.converged = false;
        return r;
    }
    const double abs_err = std::abs(term) + 4.0 * kEps * abs_sum * std::sqrt(static_cast<double>(n + 1));
    r.log_abs = std::log(std::abs(sum)) + log_offset;
    r.sign = sum > 0.0 ? 1 : -1;
    r.abs_error_estimate = abs_err / std::abs(sum);
    r.converged = finished && r.abs_error_estimate <= kKummerRelativeTarget;
    return r;
}

// Sum of an asymptotic series sum_s c_s w^{-s}, c_{s+1}/c_s = (p+s)(r+s)/(s+1),
// truncated at its smallest term. Returns the sum; last_term receives the
// first omitted term and abs_sum the sum of magnitudes.
double asymptotic_sum(double p, double r, double w, double& last_term, double& abs_sum, bool& exact) {
    double term = 1.0;
    double sum = 1.0;
    abs_sum = 1.0;
    exact = false;
    for (int s = 0; s < kMaxAsymptoticTerms; ++s) {
        const double next = term * (p + s) * (r + s) / ((s + 1.0) * w);
        if (next == 0.0) {
            exact = true;
            last_term = 0.0;
            return sum;
        }
        if (std::abs(next) >= std::abs(term)) { // divergent from here on
            last_term = next;
            return sum;
        }
        term = next;
        sum += term;
        abs_sum += std::abs(term);
        if (std::abs(term) < 1e-17 * std::abs(sum)) {
            last_term = term;
            return sum;
        }
    }
    last_term = term;
    return sum;
}

} // namespace

namespace detail {

bool is_nonpositive_integer(double v) noexcept {
    return v <= 0.0 && v == std::floor(v);
}

LogEvalResult kummer_series(double a, double b, double z) {
    if (z >= 0.0) {
        return series_direct(a, b, z);
    }
    // Kummer transformation M(a,b,z) = e^z M(b-a,b,-z): the transformed
    // series has non-alternating tail terms for z < 0.
    LogEvalResult r = series_direct(b - a, b, -z);
    r.log_abs += z;
    r.abs_error_estimate += kEps * std::abs(z);
    return r;
}

LogEvalResult kummer_asymptotic(double a, double b, double z) {
    LogEvalResult r;
    if (z == 0.0) {
        r.converged = false;
        r.abs_error_estimate = std::numeric_limits<double>::infinity();
        return r;
    }
    double last = 0.0;
    double abs_sum = 0.0;
    bool exact = false;
    if (z < 0.0) {
        const double w = -z;
        if (is_nonpositive_integer(b - a)) { // leading algebraic term vanishes
            r.converged = false;
            r.abs_error_estimate = std::numeric_limits<double>::infinity();
            return r;
        }
        const double s = asymptotic_sum(a, a - b + 1.0, w, last, abs_sum, exact);
        int sg_b = 1;
        int sg_ba = 1;
        const double lg_b = lgamma_signed(b, sg_b);
        const double lg_ba = lgamma_signed(b - a, sg_ba);
        r.log_abs = lg_b - lg_ba - a * std::log(w) + std::log(std::abs(s));
        r.sign = sg_b * sg_ba * (s > 0.0 ? 1 : -1);
        double rel = (std::abs(last) + 4.0 * kEps * abs_sum) / std::abs(s);
        if (!is_nonpositive_integer(a)) {
            // Exponentially small companion term e^{z} |z|^{a-b} / Gamma(a).
            int sg_a = 1;
            const double lg_a = lgamma_signed(a, sg_a);
            const double log_ratio = lg_ba - lg_a - w + (2.0 * a - b) * std::log(w) - std::log(std::abs(s));
            rel += std::exp(log_ratio);
        } else if (exact) {
            rel = 4.0 * kEps * abs_sum / std::abs(s);
        }
        r.abs_error_estimate = rel;
        r.converged = rel <= kKummerRelativeTarget;
        return r;
    }
    if (is_nonpositive_integer(a)) { // leading exponential term vanishes
        r.converged = false;
        r.abs_error_estimate = std::numeric_limits<double>::infinity();
        return r;
    }
    const double s = asymptotic_sum(b - a, 1.0 - a, z, last, abs_sum, exact);
    int sg_b = 1;
    int sg_a = 1;
    const double lg_b = lgamma_signed(b, sg_b);
    const double lg_a = lgamma_signed(a, sg_a);
    r.log_abs = lg_b - lg_a + z + (a - b) * std::log(z) + std::log(std::abs(s));
    r.sign = sg_b * sg_a * (s > 0.0 ? 1 : -1);
    double rel = (std::abs(last) + 4.0 * kEps * abs_sum) / std::abs(s);
    if (!is_nonpositive_integer(b - a)) {
        // Algebraic companion term |z|^{-a} / Gamma(b-a).
        int sg_ba = 1;
        const double lg_ba = lgamma_signed(b - a, sg_ba);
        const double log_ratio = lg_a - lg_ba - z + (b - 2.0 * a) * std::log(z) - std::log(std::abs(s));
        rel += std::exp(log_ratio);
    }
    r.abs_error_estimate = rel;
    r.converged = rel <= kKummerRelativeTarget;
    return r;
}

} // namespace detail

EvalResult gamma(double a) {
    if (!std::isfinite(a)) {
        throw Error(ErrorKind::Domain, "gamma: non-finite argument");
    }
    if (detail::is_nonpositive_integer(a)) {
        throw Error(ErrorKind::Pole, "gamma: pole at non-positive integer " + std::to_string(a));
    }
    if (a > 171.62) {
        throw Error(ErrorKind::Overflow, "gamma: overflow for a=" + std::to_string(a) + "; use log_gamma");
    }
    const double v = std::tgamma(a);
    // glibc tgamma is accurate to a few ulp; the pow inside amplifies by |log v|.
    const double rel = 8.0 * kEps * (1.0 + std::abs(std::log(std::abs(v))));
    return {v, std::abs(v) * rel, true};
}

LogEvalResult log_gamma(double a) {
    if (!std::isfinite(a)) {
        throw Error(ErrorKind::Domain, "log_gamma: non-finite argument");
    }
    if (detail::is_nonpositive_integer(a)) {
        throw Error(ErrorKind::Pole, "log_gamma: pole at non-positive integer " + std::to_string(a));
    }
    int sign = 1;
    const double v = lgamma_signed(a, sign);
    return {v, sign, 8.0 * kEps * (1.0 + std::abs(v)), true};
}

LogEvalResult log_kummer_m(double a, double b, double z) {
    if (detail::is_nonpositive_integer(b)) {
        throw Error(ErrorKind::InvalidParameter, "kummer_m: b is a non-positive integer " + describe(a, b, z));
    }
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z)) {
        throw Error(ErrorKind::Domain, "kummer_m: non-finite argument " + describe(a, b, z));
    }
    if (z == 0.0 || a == 0.0) {
        return {0.0, 1, 0.0, true};
    }
    const bool terminating = (z > 0.0 && detail::is_nonpositive_integer(a)) ||
                             (z < 0.0 && detail::is_nonpositive_integer(b - a));
    if (std::abs(z) <= kKummerAsymptoticThreshold || terminating) {
        return detail::kummer_series(a, b, z);
    }
    const LogEvalResult asym = detail::kummer_asymptotic(a, b, z);
    if (asym.converged) {
        return asym;
    }
    const LogEvalResult series = detail::kummer_series(a, b, z);
    if (series.converged) {
        return series;
    }
    return series.abs_error_estimate < asym.abs_error_estimate ? series : asym;
}

EvalResult kummer_m(double a, double b, double z) {
    const LogEvalResult r = log_kummer_m(a, b, z);
    if (r.log_abs > kMaxLogDouble) {
        throw Error(ErrorKind::Overflow, "kummer_m: value overflows " + describe(a, b, z) + "; use log_kummer_m");
    }
    const double v = r.sign * std::exp(r.log_abs);
    return {v, std::abs(v) * r.abs_error_estimate, r.converged};
}

namespace {

// e^{-z} I_1(z) from the ascending series; accurate for z <= 20.
EvalResult i1_series_scaled(double z) {
    const double q = 0.25 * z * z;
    double term = 0.5 * z;
    double sum = term;
    int k = 0;
    for (; k < 200; ++k) {
        term *= q / ((k + 1.0) * (k + 2.0));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    const double scale = std::exp(-z);
    const double v = sum * scale;
    return {v, v * 4.0 * kEps * std::sqrt(k + 1.0), true};
}

// e^{-z} I_1(z) from the Hankel expansion; accurate for z > 20.
EvalResult i1_asymptotic_scaled(double z) {
    double term = 1.0;
    double sum = 1.0;
    double last = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (odd * odd - 4.0) / (8.0 * k * z);
        if (std::abs(next) >= std::abs(term)) {
            last = next;
            break;
        }
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) {
            last = term;
            break;
        }
    }
    const double pre = 1.0 / std::sqrt(2.0 * std::numbers::pi * z);
    const double v = pre * sum;
    return {v, pre * (std::abs(last) + 4.0 * kEps), true};
}

constexpr double kBesselSeriesLimit = 20.0;
constexpr double kBesselScaleLimit = 700.0;

} // namespace

EvalResult bessel_i1_scaled(double z) {
    if (!(z >= 0.0)) {
        throw Error(ErrorKind::Domain, "bessel_i1: negative or NaN argument");
    }
    if (std::isinf(z)) {
        return {0.0, 0.0, true};
    }
    if (z == 0.0) {
        return {0.0, 0.0, true};
    }
    return z <= kBesselSeriesLimit ? i1_series_scaled(z) : i1_asymptotic_scaled(z);
}

BesselResult bessel_i1(double z) {
    const EvalResult s = bessel_i1_scaled(z);
    BesselResult r;
    r.converged = s.converged;
    if (z > kBesselScaleLimit) {
        r.value = s.value;
        r.abs_error_estimate = s.abs_error_estimate;
        r.scaled = true;
        return r;
    }
    const double e = std::exp(z);
    r.value = s.value * e;
    r.abs_error_estimate = s.abs_error_estimate * e;
    r.scaled = false;
    return r;
}

} // namespace cevsv::specialfn
