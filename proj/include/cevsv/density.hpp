#pragma once

#include "cevsv/model.hpp"
#include "cevsv/quadrature.hpp"

#include <functional>
#include <limits>
#include <span>

namespace cevsv {

/// Transition from initial volatility x at time t to time t' > t.
struct TransitionQuery {
    ModelSpec spec;
    double x;
    double t;
    double t_prime;

    /// Throws Domain for x <= 0 and Order for t' <= t.
    TransitionQuery(ModelSpec spec, double x, double t, double t_prime);

    double tau() const noexcept { return t_prime - t; }
};

/// Which end of (0, inf) carries the boundary atom (where y^{-2 gamma} = 0).
enum class AtomLocation { Zero, Infinity };

/// Transition law of the m = -2 gamma model: a Bessel-type continuous part
/// plus a point mass at the boundary. In z = y^{-2 gamma} the law is
/// Poisson-mixed exponential, so
///   p(y) = |2 gamma| y^{-(2 gamma + 1)} e^{-(A + z)/phi} sqrt(A/z)/phi I_1(2 sqrt(A z)/phi)
/// with A = e^{2 tau gamma theta} x^{-2 gamma}, phi = 2 tau gamma^2 epsilon^2,
/// and the atom carries e^{-A/phi}.
class Neg2GammaDensity {
public:
    /// Checks branch and coefficient pair; throws BranchMismatch otherwise.
    explicit Neg2GammaDensity(const TransitionQuery& query);

    /// Purely parametric construction; the caller vouches for the coefficient pair.
    static Neg2GammaDensity from_parameters(double gamma, double theta, double epsilon, double x, double tau);

    double continuous_at(double y) const;
    /// log of continuous_at; -inf where the density underflows to zero.
    double log_continuous_at(double y) const;
    double atom_mass() const noexcept;
    AtomLocation atom_location() const noexcept {
        return gamma_ < 0.0 ? AtomLocation::Zero : AtomLocation::Infinity;
    }
    /// The closed form is only formally valid for gamma > 0.
    bool formal_only() const noexcept { return gamma_ > 0.0; }

    /// int g(y) p(y) dy over the continuous part restricted to [y_lo, y_hi],
    /// on a log-y axis with breakpoints placed around the bulk of the law.
    /// z_hints are extra breakpoints given in z = y^{-2 gamma}.
    quad::Result integrate(const std::function<double(double)>& g, double y_lo = 0.0,
                           double y_hi = std::numeric_limits<double>::infinity(),
                           std::span<const double> z_hints = {}, const quad::Options& opt = kDefaultOptions) const;

    double gamma() const noexcept { return gamma_; }
    double phi() const noexcept { return phi_; }
    /// A = e^{2 tau gamma theta} x^{-2 gamma}, the mean of z.
    double level() const noexcept { return level_; }
    /// G = A / phi.
    double g_ratio() const noexcept { return level_ / phi_; }

    static constexpr quad::Options kDefaultOptions{1e-12, 1e-11, 4000};

private:
    Neg2GammaDensity(double gamma, double level, double phi);

    double gamma_;
    double level_;
    double phi_;
};

/// Continuous part of the m = -2 gamma transition density at y > 0.
double density_m_neg2gamma(const TransitionQuery& query, double y);

/// Boundary atom mass exp(-A/phi).
double atom_mass_m_neg2gamma(const TransitionQuery& query);

/// Quadrature of the continuous part.
quad::Result continuous_mass_m_neg2gamma(const TransitionQuery& query);

/// Unit point mass of the m = gamma model.
struct DeltaLaw {
    double location;
};

/// y* = x exp(int_t^t' q).
DeltaLaw density_m_gamma(const TransitionQuery& query);

/// int e^{-mu y^{-2 gamma}} p dy by quadrature of the continuous part plus the atom.
double laplace_transform_lhs(const TransitionQuery& query, double mu);

/// Closed form exp[-e^{2 tau gamma theta} x^{-2 gamma} mu / (1 + 2 tau gamma^2 epsilon^2 mu)].
double laplace_transform_rhs(const TransitionQuery& query, double mu);

} // namespace cevsv
