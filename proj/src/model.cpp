#include "cevsv/model.hpp"

#include "cevsv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cevsv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double interpolate(const CoefficientFn::Tabulated& tab, double t) {
    if (t <= tab.t.front()) return tab.v.front();
    if (t >= tab.t.back()) return tab.v.back();
    const auto it = std::upper_bound(tab.t.begin(), tab.t.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - tab.t.begin());
    const double w = (t - tab.t[j - 1]) / (tab.t[j] - tab.t[j - 1]);
    return tab.v[j - 1] + w * (tab.v[j] - tab.v[j - 1]);
}

// Integral of the piecewise-linear interpolant (flat outside the knots) over [a, b], a <= b.
double tabulated_integral(const CoefficientFn::Tabulated& tab, double a, double b) {
    const auto& ts = tab.t;
    const auto value_at = [&](double t) { return interpolate(tab, t); };
    // Breakpoints: a, interior knots, b. Each piece is linear, so the
    // trapezoid rule is exact.
    double total = 0.0;
    double left = a;
    double f_left = value_at(a);
    for (double knot : ts) {
        if (knot <= a) continue;
        if (knot >= b) break;
        const double f_knot = value_at(knot);
        total += 0.5 * (f_left + f_knot) * (knot - left);
        left = knot;
        f_left = f_knot;
    }
    total += 0.5 * (f_left + value_at(b)) * (b - left);
    return total;
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0)) {
        throw Error(ErrorKind::Domain, std::string(what) + ": state must be positive, got " + std::to_string(x));
    }
}

} // namespace

CoefficientFn CoefficientFn::constant(double c) { return CoefficientFn(Constant{c}); }

CoefficientFn CoefficientFn::exp_decay(double scale, double rate) {
    if (!(scale > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "exp_decay coefficient needs scale > 0");
    }
    return CoefficientFn(ExpDecay{scale, rate});
}

CoefficientFn CoefficientFn::tabulated(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) {
        throw Error(ErrorKind::InvalidParameter, "tabulated coefficient needs at least one knot");
    }
    Tabulated tab;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
            throw Error(ErrorKind::InvalidParameter, "tabulated coefficient knots must be strictly increasing in t");
        }
        tab.t.push_back(knots[i].first);
        tab.v.push_back(knots[i].second);
    }
    return CoefficientFn(std::move(tab));
}

double CoefficientFn::operator()(double t) const {
    return std::visit(overloaded{
                          [](const Constant& c) { return c.c; },
                          [t](const ExpDecay& e) { return e.scale * std::exp(-e.rate * t); },
                          [t](const Tabulated& tab) { return interpolate(tab, t); },
                      },
                      kind_);
}

double CoefficientFn::integral(double a, double b) const {
    if (a > b) return -integral(b, a);
    return std::visit(overloaded{
                          [&](const Constant& c) { return c.c * (b - a); },
                          [&](const ExpDecay& e) {
                              if (e.rate == 0.0) return e.scale * (b - a);
                              // scale/rate * (e^{-rate a} - e^{-rate b})
                              return e.scale * std::exp(-e.rate * a) * (-std::expm1(-e.rate * (b - a))) / e.rate;
                          },
                          [&](const Tabulated& tab) { return tabulated_integral(tab, a, b); },
                      },
                      kind_);
}

std::string CoefficientFn::describe() const {
    std::ostringstream os;
    os.precision(12);
    std::visit(overloaded{
                   [&](const Constant& c) { os << "constant(" << c.c << ")"; },
                   [&](const ExpDecay& e) { os << "exp_decay(" << e.scale << ", " << e.rate << ")"; },
                   [&](const Tabulated& tab) { os << "tabulated(" << tab.t.size() << " knots)"; },
               },
               kind_);
    return os.str();
}

const char* to_string(Branch b) noexcept {
    switch (b) {
    case Branch::MNegGamma: return "m_neg_gamma";
    case Branch::MGamma: return "m_gamma";
    case Branch::MNeg2Gamma: return "m_neg2gamma";
    }
    return "unknown";
}

namespace {

void check_scalars(double gamma, double theta, double epsilon) {
    std::vector<Violation> bad;
    if (!(gamma != 0.0) || !std::isfinite(gamma)) {
        bad.push_back({Violation::Code::GammaZero, "gamma must be finite and non-zero"});
    }
    if (!(epsilon > 0.0)) {
        bad.push_back({Violation::Code::EpsilonNonPositive, "epsilon must be positive"});
    }
    if (!(theta >= 0.0)) {
        bad.push_back({Violation::Code::ThetaNegative, "theta must be non-negative"});
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
}

} // namespace

ModelSpec::ModelSpec(Branch branch, double gamma, double theta, double epsilon, CoefficientFn q, CoefficientFn l)
    : branch_(branch), gamma_(gamma), theta_(theta), epsilon_(epsilon), q_(std::move(q)), l_(std::move(l)) {
    check_scalars(gamma, theta, epsilon);
}

ModelSpec ModelSpec::neg2gamma_standard(double gamma, double theta, double epsilon) {
    check_scalars(gamma, theta, epsilon);
    return ModelSpec(Branch::MNeg2Gamma, gamma, theta, epsilon, CoefficientFn::constant(-theta),
                     CoefficientFn::exp_decay(epsilon, theta * gamma));
}

double ModelSpec::m() const noexcept {
    switch (branch_) {
    case Branch::MNegGamma: return -gamma_;
    case Branch::MGamma: return gamma_;
    case Branch::MNeg2Gamma: return -2.0 * gamma_;
    }
    return 0.0;
}

double drift_vol(const ModelSpec& spec, double t, double x) {
    require_positive(x, "drift_vol");
    const double g = spec.gamma();
    const double l = spec.l()(t);
    double c = 0.0;
    switch (spec.branch()) {
    case Branch::MNegGamma: c = 0.5 * (g + 1.0); break;
    case Branch::MGamma: c = 0.5 * (1.0 - g); break;
    case Branch::MNeg2Gamma: c = 0.5 * (1.0 + 2.0 * g); break;
    }
    return c * l * l * std::pow(x, 2.0 * g + 1.0) + spec.q()(t) * x;
}

double diffusion_vol(const ModelSpec& spec, double t, double x) {
    require_positive(x, "diffusion_vol");
    return spec.l()(t) * std::pow(x, spec.gamma() + 1.0);
}

double drift_var(const ModelSpec& spec, double t, double v) {
    require_positive(v, "drift_var");
    const double g = spec.gamma();
    const double l = spec.l()(t);
    const double q = spec.q()(t);
    const double nonlinear = l * l * std::pow(v, 1.0 + g);
    switch (spec.branch()) {
    case Branch::MNegGamma: return (2.0 + g) * nonlinear + 2.0 * q * v;
    case Branch::MGamma: return (2.0 - g) * nonlinear + 2.0 * q * v;
    case Branch::MNeg2Gamma: return 2.0 * ((1.0 + g) * nonlinear + q * v);
    }
    return 0.0;
}

double z_factor(const ModelSpec& spec, double t, double t_prime) {
    if (t > t_prime) {
        throw Error(ErrorKind::Order, "z_factor: t must not exceed t'");
    }
    if (t == t_prime) return 1.0;
    return std::exp(spec.gamma() * spec.q().integral(t, t_prime));
}

double laplace_variance_term(const ModelSpec& spec, double tau) {
    if (tau < 0.0) {
        throw Error(ErrorKind::Order, "laplace_variance_term: negative horizon");
    }
    if (tau == 0.0) return 0.0;
    const double g = spec.gamma();
    auto integrand = [&](double y) {
        const double l = spec.l()(y);
        const double z = z_factor(spec, 0.0, y);
        return l * l / (z * z);
    };
    const quad::Result r = quad::integrate(integrand, 0.0, tau, {1e-15, 1e-14, 2000});
    return 0.5 * g * g * r.value;
}

bool has_standard_coefficient_pair(const ModelSpec& spec, double t_max) {
    constexpr int kProbe = 201;
    const double theta = spec.theta();
    const double eps = spec.epsilon();
    const double g = spec.gamma();
    for (int k = 0; k < kProbe; ++k) {
        const double t = t_max * k / (kProbe - 1);
        const double q_ref = -theta;
        const double l_ref = eps * std::exp(-theta * g * t);
        if (std::abs(spec.q()(t) - q_ref) > 1e-12 * std::max(1.0, std::abs(q_ref))) return false;
        if (std::abs(spec.l()(t) - l_ref) > 1e-12 * std::max(1.0, std::abs(l_ref))) return false;
    }
    return true;
}

std::vector<Violation> validate(const ModelSpec& spec, int moment_order) {
    std::vector<Violation> out;
    const double g = spec.gamma();
    if (moment_order < 1) {
        out.push_back({Violation::Code::MomentOrderInvalid,
                       "moment order must be a positive integer, got " + std::to_string(moment_order)});
    }
    switch (spec.branch()) {
    case Branch::MNegGamma:
        out.push_back({Violation::Code::MomentIntegralDiverges,
                       "the m = -gamma model has no closed-form moments: its transition law is known only through "
                       "a generalized Laplace transform exp(-x^{-gamma} mu / Z + w mu^2) with w(t,t') > 0, and the "
                       "fractional-derivative integral that would yield E[x^i] diverges, so moment and swap prices "
                       "do not exist"});
        break;
    case Branch::MNeg2Gamma: {
        if (g <= -1.0) {
            out.push_back({Violation::Code::GammaBelowMinusOne,
                           "gamma must lie in (-1, 0) for the mean-reverting regime (got " + std::to_string(g) + ")"});
        }
        if (g > 0.0 && moment_order >= 1) {
            // The i-th moment exists only for beta = (2 + gamma)/2 > 1 + (i - 1)/4.
            const double beta = 0.5 * (2.0 + g);
            const double beta_min = 1.0 + 0.25 * (moment_order - 1);
            if (!(beta > beta_min)) {
                std::ostringstream os;
                os << "moment i=" << moment_order << " requires CEV exponent beta=(2+gamma)/2 > " << beta_min
                   << ", i.e. gamma > " << 0.5 * (moment_order - 1) << " (got gamma=" << g << ", beta=" << beta
                   << ")";
                out.push_back({Violation::Code::MomentRangeTable, os.str()});
            }
        }
        if (!has_standard_coefficient_pair(spec)) {
            out.push_back({Violation::Code::CoefficientPairMismatch,
                           "closed forms need q(t) = -theta and l(t) = epsilon*exp(-theta*gamma*t); got q=" +
                               spec.q().describe() + ", l=" + spec.l().describe()});
        }
        break;
    }
    case Branch::MGamma: {
        if (g < 2.0) {
            constexpr int kProbe = 201;
            for (int k = 0; k < kProbe; ++k) {
                const double t = 10.0 * k / (kProbe - 1);
                if (spec.q()(t) > 0.0) {
                    out.push_back({Violation::Code::MeanReversionSign,
                                   "for gamma < 2 the m = gamma model mean-reverts only with q(t) <= 0; q(" +
                                       std::to_string(t) + ") > 0"});
                    break;
                }
            }
        }
        break;
    }
    }
    return out;
}

void require_valid(const ModelSpec& spec, int moment_order) {
    auto v = validate(spec, moment_order);
    if (!v.empty()) throw ValidationError(std::move(v));
}

} // namespace cevsv
