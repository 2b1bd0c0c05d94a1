#include "cevsv/density.hpp"

#include "cevsv/specialfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace cevsv {

namespace {

void require_neg2gamma(const ModelSpec& spec, const char* what) {
    if (spec.branch() != Branch::MNeg2Gamma) {
        throw Error(ErrorKind::BranchMismatch, std::string(what) + ": needs the m = -2 gamma branch, got " +
                                                   to_string(spec.branch()));
    }
}

void require_pair(const ModelSpec& spec, double tau, const char* what) {
    if (!has_standard_coefficient_pair(spec, std::max(10.0, tau))) {
        throw Error(ErrorKind::BranchMismatch,
                    std::string(what) + ": closed form needs q(t) = -theta and l(t) = epsilon*exp(-theta*gamma*t)");
    }
}

// (sqrt(a) - sqrt(b))^2 without cancellation when a ~ b.
double sqrt_gap_squared(double a, double b) {
    const double sa = std::sqrt(a);
    const double sb = std::sqrt(b);
    const double d = (a - b) / (sa + sb);
    return d * d;
}

} // namespace

TransitionQuery::TransitionQuery(ModelSpec s, double x0, double t0, double t1)
    : spec(std::move(s)), x(x0), t(t0), t_prime(t1) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw Error(ErrorKind::Domain, "transition query: initial volatility must be positive");
    }
    if (!(t_prime > t)) {
        throw Error(ErrorKind::Order, "transition query: t' must exceed t");
    }
}

Neg2GammaDensity::Neg2GammaDensity(double gamma, double level, double phi) : gamma_(gamma), level_(level), phi_(phi) {}

Neg2GammaDensity::Neg2GammaDensity(const TransitionQuery& query) : gamma_(0.0), level_(0.0), phi_(0.0) {
    require_neg2gamma(query.spec, "transition density");
    require_pair(query.spec, query.tau(), "transition density");
    *this = from_parameters(query.spec.gamma(), query.spec.theta(), query.spec.epsilon(), query.x, query.tau());
}

Neg2GammaDensity Neg2GammaDensity::from_parameters(double gamma, double theta, double epsilon, double x, double tau) {
    if (!(x > 0.0)) throw Error(ErrorKind::Domain, "transition density: x must be positive");
    if (!(tau > 0.0)) throw Error(ErrorKind::Order, "transition density: horizon must be positive");
    const double level = std::exp(2.0 * tau * gamma * theta - 2.0 * gamma * std::log(x));
    const double phi = 2.0 * tau * gamma * gamma * epsilon * epsilon;
    return Neg2GammaDensity(gamma, level, phi);
}

double Neg2GammaDensity::log_continuous_at(double y) const {
    if (!(y > 0.0)) throw Error(ErrorKind::Domain, "transition density: y must be positive");
    const double ly = std::log(y);
    const double z = std::exp(-2.0 * gamma_ * ly);
    if (!(z > 0.0) || !std::isfinite(z)) return -std::numeric_limits<double>::infinity();
    const double b = 2.0 * std::sqrt(level_ * z) / phi_;
    const specialfn::EvalResult i1 = specialfn::bessel_i1_scaled(b);
    if (!(i1.value > 0.0)) return -std::numeric_limits<double>::infinity();
    // e^{-(A+z)/phi} I_1(b) = e^{-(sqrt A - sqrt z)^2/phi} * e^{-b} I_1(b)
    return std::log(2.0 * std::abs(gamma_)) - (2.0 * gamma_ + 1.0) * ly - sqrt_gap_squared(level_, z) / phi_ +
           0.5 * (std::log(level_) - std::log(z)) - std::log(phi_) + std::log(i1.value);
}

double Neg2GammaDensity::continuous_at(double y) const { return std::exp(log_continuous_at(y)); }

double Neg2GammaDensity::atom_mass() const noexcept { return std::exp(-level_ / phi_); }

quad::Result Neg2GammaDensity::integrate(const std::function<double(double)>& g, double y_lo, double y_hi,
                                         std::span<const double> z_hints, const quad::Options& opt) const {
    if (y_lo < 0.0 || !(y_hi > y_lo)) {
        throw Error(ErrorKind::Domain, "transition density: empty integration range");
    }
    // Breakpoints in z, where the law is a Poisson mixture of exponentials
    // with scale phi centred on A.
    constexpr double kTail = 7.75; // e^{-kTail^2} ~ 1e-26
    const double sa = std::sqrt(level_);
    const double sp = std::sqrt(phi_);
    const double z_hi = (sa + kTail * sp) * (sa + kTail * sp);
    const double z_lo = sa > kTail * sp ? (sa - kTail * sp) * (sa - kTail * sp) : 1e-16 * phi_;
    std::vector<double> zs{z_lo, z_hi, level_};
    for (double k : {0.5, 1.0, 2.0, 4.0}) {
        if (sa > k * sp) zs.push_back((sa - k * sp) * (sa - k * sp));
        zs.push_back((sa + k * sp) * (sa + k * sp));
    }
    for (double f : {1e-8, 1e-4, 1e-2, 0.1, 1.0, 10.0}) zs.push_back(f * phi_);
    for (double h : z_hints) {
        if (h > 0.0 && std::isfinite(h)) zs.push_back(h);
    }

    // s = ln y = -ln z / (2 gamma)
    const double s_of_y_lo = y_lo > 0.0 ? std::log(y_lo) : -std::numeric_limits<double>::infinity();
    const double s_of_y_hi = std::log(y_hi);
    auto s_of_z = [&](double z) { return -std::log(z) / (2.0 * gamma_); };
    double s_min = std::min(s_of_z(z_lo), s_of_z(z_hi));
    double s_max = std::max(s_of_z(z_lo), s_of_z(z_hi));
    s_min = std::max(s_min, s_of_y_lo);
    s_max = std::min(s_max, s_of_y_hi);
    quad::Result out;
    if (!(s_max > s_min)) {
        out.converged = true;
        return out;
    }
    std::vector<double> breaks{s_min, s_max};
    for (double z : zs) {
        const double s = s_of_z(z);
        if (s > s_min && s < s_max) breaks.push_back(s);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    auto integrand = [&](double s) {
        const double lp = log_continuous_at(std::exp(s));
        if (lp == -std::numeric_limits<double>::infinity()) return 0.0;
        const double w = std::exp(lp + s);
        return w == 0.0 ? 0.0 : w * g(std::exp(s));
    };
    return quad::integrate(integrand, std::span<const double>(breaks), opt);
}

double density_m_neg2gamma(const TransitionQuery& query, double y) {
    return Neg2GammaDensity(query).continuous_at(y);
}

double atom_mass_m_neg2gamma(const TransitionQuery& query) { return Neg2GammaDensity(query).atom_mass(); }

quad::Result continuous_mass_m_neg2gamma(const TransitionQuery& query) {
    return Neg2GammaDensity(query).integrate([](double) { return 1.0; });
}

DeltaLaw density_m_gamma(const TransitionQuery& query) {
    if (query.spec.branch() != Branch::MGamma) {
        throw Error(ErrorKind::BranchMismatch,
                    std::string("delta law: needs the m = gamma branch, got ") + to_string(query.spec.branch()));
    }
    return {query.x * std::exp(query.spec.q().integral(query.t, query.t_prime))};
}

double laplace_transform_lhs(const TransitionQuery& query, double mu) {
    if (mu < 0.0) throw Error(ErrorKind::Domain, "Laplace transform: mu must be non-negative");
    const Neg2GammaDensity d(query);
    const double g = d.gamma();
    const std::array<double, 3> hints{0.1 / std::max(mu, 1e-300), 1.0 / std::max(mu, 1e-300),
                                      10.0 / std::max(mu, 1e-300)};
    const quad::Result r =
        d.integrate([&](double y) { return std::exp(-mu * std::pow(y, -2.0 * g)); }, 0.0,
                    std::numeric_limits<double>::infinity(), std::span<const double>(hints));
    if (!r.converged) throw Error(ErrorKind::Convergence, "Laplace transform: quadrature missed its target");
    return r.value + d.atom_mass();
}

double laplace_transform_rhs(const TransitionQuery& query, double mu) {
    require_neg2gamma(query.spec, "Laplace transform");
    require_pair(query.spec, query.tau(), "Laplace transform");
    const double g = query.spec.gamma();
    const double tau = query.tau();
    const double eps = query.spec.epsilon();
    const double level = std::exp(2.0 * tau * g * query.spec.theta() - 2.0 * g * std::log(query.x));
    return std::exp(-level * mu / (1.0 + 2.0 * tau * g * g * eps * eps * mu));
}

} // namespace cevsv
