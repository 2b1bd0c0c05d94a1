#include "cevsv/model.hpp"
#include "cevsv/quadrature.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace cevsv;

namespace {

bool has_code(const std::vector<Violation>& v, Violation::Code c) {
    return std::any_of(v.begin(), v.end(), [c](const Violation& x) { return x.code == c; });
}

ModelSpec constant_spec(Branch b, double gamma, double q, double l) {
    return ModelSpec(b, gamma, 0.1, 0.1, CoefficientFn::constant(q), CoefficientFn::constant(l));
}

} // namespace

TEST(ModelSpec, RejectsInvalidScalars) {
    try {
        ModelSpec::neg2gamma_standard(0.0, -0.1, 0.0);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_TRUE(has_code(e.violations(), Violation::Code::GammaZero));
        EXPECT_TRUE(has_code(e.violations(), Violation::Code::ThetaNegative));
        EXPECT_TRUE(has_code(e.violations(), Violation::Code::EpsilonNonPositive));
    }
}

TEST(ModelSpec, StandardPairPointwise) {
    const ModelSpec s = ModelSpec::neg2gamma_standard(-0.6, 0.1, 0.1);
    for (int k = 0; k <= 50; ++k) {
        const double t = 0.1 * k;
        EXPECT_EQ(s.q()(t), -0.1);
        EXPECT_NEAR(s.l()(t), 0.1 * std::exp(-0.1 * -0.6 * t), 1e-16);
    }
    EXPECT_TRUE(has_standard_coefficient_pair(s));
    const ModelSpec off(Branch::MNeg2Gamma, -0.6, 0.1, 0.1, CoefficientFn::constant(-0.1),
                        CoefficientFn::constant(0.1));
    EXPECT_FALSE(has_standard_coefficient_pair(off));
    EXPECT_TRUE(has_code(validate(off, 1), Violation::Code::CoefficientPairMismatch));
}

TEST(ModelSpec, ItoConsistency) {
    for (Branch b : {Branch::MNegGamma, Branch::MGamma, Branch::MNeg2Gamma}) {
        const ModelSpec s = constant_spec(b, -0.6, -0.3, 0.4);
        const double x = 0.3;
        const double want = 2.0 * x * drift_vol(s, 0.0, x) + std::pow(diffusion_vol(s, 0.0, x), 2);
        EXPECT_LT(std::abs(drift_var(s, 0.0, x * x) - want), 1e-14) << to_string(b);
    }
}

TEST(ModelSpec, SymmetryExponent) {
    EXPECT_EQ(constant_spec(Branch::MNegGamma, 0.5, 0, 1).m(), -0.5);
    EXPECT_EQ(constant_spec(Branch::MGamma, 0.5, 0, 1).m(), 0.5);
    EXPECT_EQ(constant_spec(Branch::MNeg2Gamma, 0.5, 0, 1).m(), -1.0);
}

TEST(ModelSpec, DomainErrors) {
    const ModelSpec s = constant_spec(Branch::MGamma, 0.5, -0.1, 0.2);
    EXPECT_THROW(drift_vol(s, 0.0, 0.0), Error);
    EXPECT_THROW(diffusion_vol(s, 0.0, -1.0), Error);
    EXPECT_THROW(drift_var(s, 0.0, 0.0), Error);
}

TEST(Coefficients, IntegralsMatchQuadrature) {
    const CoefficientFn e = CoefficientFn::exp_decay(0.3, 0.7);
    const CoefficientFn t = CoefficientFn::tabulated({{0.0, 1.0}, {0.5, -1.0}, {2.0, 0.5}});
    for (const auto* f : {&e, &t}) {
        for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.2, 3.0}, std::pair{-1.0, 0.7}}) {
            const std::array<double, 5> br{a, std::clamp(0.0, a, b), std::clamp(0.5, a, b), std::clamp(2.0, a, b), b};
            const auto r = quad::integrate([f](double s) { return (*f)(s); }, std::span<const double>(br),
                                           {1e-14, 1e-14, 1000});
            EXPECT_NEAR(f->integral(a, b), r.value, 1e-12) << f->describe();
            EXPECT_NEAR(f->integral(b, a), -r.value, 1e-12);
        }
    }
    EXPECT_THROW(CoefficientFn::exp_decay(0.0, 1.0), Error);
    EXPECT_THROW(CoefficientFn::tabulated({{1.0, 0.0}, {1.0, 2.0}}), Error);
}

TEST(Coefficients, ZFactor) {
    const ModelSpec s = constant_spec(Branch::MNegGamma, 0.5, -0.2, 0.2);
    EXPECT_EQ(z_factor(s, 0.4, 0.4), 1.0);
    EXPECT_NEAR(z_factor(s, 0.0, 0.5), std::exp(0.5 * -0.2 * 0.5), 1e-15);
    EXPECT_THROW(z_factor(s, 1.0, 0.5), Error);
}

TEST(Coefficients, LaplaceVarianceTermConstantCoefficients) {
    const double g = 0.5, q = -0.2, l = 0.2, tau = 0.5;
    const ModelSpec s = constant_spec(Branch::MNegGamma, g, q, l);
    // w = g^2 l^2 / 2 * int_0^tau e^{-2 g q y} dy
    const double want = 0.5 * g * g * l * l * std::expm1(-2.0 * g * q * tau) / (-2.0 * g * q);
    EXPECT_NEAR(laplace_variance_term(s, tau), want, 1e-15);
    EXPECT_EQ(laplace_variance_term(s, 0.0), 0.0);
}

TEST(Validate, MomentRangeTableExhaustive) {
    for (int k = 0; k <= 9; ++k) {
        const double g = (1 + 2 * k) / 10.0;
        const ModelSpec s = ModelSpec::neg2gamma_standard(g, 0.1, 0.1);
        for (int i = 1; i <= 4; ++i) {
            // beta = (2 + g)/2 > 1 + (i-1)/4  <=>  (1 + 2k) > 5 (i - 1)
            const bool allowed = (1 + 2 * k) > 5 * (i - 1);
            EXPECT_EQ(validate(s, i).empty(), allowed) << "gamma=" << g << " i=" << i;
            EXPECT_EQ(has_code(validate(s, i), Violation::Code::MomentRangeTable), !allowed);
        }
    }
}

TEST(Validate, NegativeGammaAcceptsAllOrders) {
    for (double g : {-0.95, -0.7, -0.5, -0.3, -0.05}) {
        const ModelSpec s = ModelSpec::neg2gamma_standard(g, 0.2, 0.3);
        for (int i = 1; i <= 6; ++i) EXPECT_TRUE(validate(s, i).empty()) << g << ' ' << i;
    }
    EXPECT_TRUE(has_code(validate(ModelSpec::neg2gamma_standard(-1.2, 0.1, 0.1), 1),
                         Violation::Code::GammaBelowMinusOne));
    EXPECT_TRUE(has_code(validate(ModelSpec::neg2gamma_standard(-0.5, 0.1, 0.1), 0),
                         Violation::Code::MomentOrderInvalid));
}

TEST(Validate, MNegGammaAlwaysDiverges) {
    const ModelSpec s = constant_spec(Branch::MNegGamma, 0.5, -0.2, 0.2);
    for (int i = 1; i <= 4; ++i) {
        EXPECT_TRUE(has_code(validate(s, i), Violation::Code::MomentIntegralDiverges));
    }
    EXPECT_THROW(require_valid(s, 2), ValidationError);
}

TEST(Validate, MGammaMeanReversionSign) {
    EXPECT_TRUE(has_code(validate(constant_spec(Branch::MGamma, 0.5, 0.1, 0.2), 1),
                         Violation::Code::MeanReversionSign));
    EXPECT_TRUE(validate(constant_spec(Branch::MGamma, 0.5, -0.1, 0.2), 1).empty());
    EXPECT_TRUE(validate(constant_spec(Branch::MGamma, 2.5, 0.1, 0.2), 1).empty());
}
