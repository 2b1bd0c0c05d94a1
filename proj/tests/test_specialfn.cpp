#include "cevsv/error.hpp"
#include "cevsv/quadrature.hpp"
#include "cevsv/specialfn.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cevsv;
namespace sf = cevsv::specialfn;
using mp = boost::multiprecision::cpp_dec_float_50;

namespace {

// 50-digit ascending series; for z < 0 through Kummer's transformation so
// every term is positive.
double kummer_oracle(double a, double b, double z) {
    if (z < 0.0) {
        const mp e = exp(mp(z));
        return static_cast<double>(e * mp(kummer_oracle(b - a, b, -z)));
    }
    mp term = 1;
    mp sum = 1;
    for (int k = 0; k < 20000; ++k) {
        term *= (mp(a) + k) / (mp(b) + k) * mp(z) / (k + 1);
        sum += term;
        if (abs(term) < sum * mp("1e-40") && k > a + z) break;
    }
    return static_cast<double>(sum);
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

} // namespace

TEST(Gamma, MatchesEulerIntegral) {
    const double a = 2.75;
    const auto r = quad::integrate_to_infinity([a](double t) { return std::pow(t, a - 1.0) * std::exp(-t); }, 0.0,
                                               {1e-15, 1e-13, 4000});
    EXPECT_LT(rel(sf::gamma(a).value, r.value), 1e-12);
    EXPECT_DOUBLE_EQ(sf::gamma(5.0).value, 24.0);
}

TEST(Gamma, PolesAndOverflow) {
    EXPECT_THROW(sf::gamma(0.0), Error);
    EXPECT_THROW(sf::gamma(-3.0), Error);
    try {
        sf::gamma(-2.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Pole);
    }
    try {
        sf::gamma(200.0);
        FAIL() << "expected overflow";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Overflow);
    }
    EXPECT_THROW(sf::log_gamma(-1.0), Error);
}

TEST(LogGamma, SignAndValue) {
    const auto r = sf::log_gamma(-0.5); // Gamma(-1/2) = -2 sqrt(pi)
    EXPECT_EQ(r.sign, -1);
    EXPECT_NEAR(r.log_abs, std::log(2.0 * std::sqrt(std::numbers::pi)), 1e-14);
    EXPECT_NEAR(sf::log_gamma(200.0).log_abs, std::lgamma(200.0), 1e-10);
}

TEST(Kummer, ElementaryClosedForms) {
    for (double z : {-50.0, -3.0, -0.1, 0.0, 0.7, 4.0, 25.0}) {
        EXPECT_LT(rel(sf::kummer_m(1.3, 1.3, z).value, std::exp(z)), 1e-13) << z;
        if (z != 0.0) {
            EXPECT_LT(rel(sf::kummer_m(1.0, 2.0, z).value, std::expm1(z) / z), 1e-12) << z;
        }
    }
    EXPECT_DOUBLE_EQ(sf::kummer_m(0.0, 2.0, -123.0).value, 1.0);
    EXPECT_DOUBLE_EQ(sf::kummer_m(0.4, 2.0, 0.0).value, 1.0);
}

TEST(Kummer, AgreesWithMultiprecisionSeries) {
    const double as[] = {-3.7, -1.25, -0.4, 0.3, 0.9, 1.6, 2.5, 5.0};
    const double zs[] = {-200.0, -60.0, -31.0, -29.0, -8.0, -0.5, 0.5, 8.0, 29.0, 31.0, 60.0, 200.0};
    for (double a : as) {
        for (double z : zs) {
            const double want = kummer_oracle(a, 2.0, z);
            const auto got = sf::log_kummer_m(a, 2.0, z);
            ASSERT_TRUE(got.converged) << a << ' ' << z;
            const double v = got.sign * std::exp(got.log_abs);
            EXPECT_LT(rel(v, want), 1e-10) << "a=" << a << " z=" << z;
        }
    }
}

TEST(Kummer, KummerTransformationIdentity) {
    for (double z : {1.0, 12.0, 45.0, 150.0}) {
        const auto lhs = sf::log_kummer_m(-0.8, 2.0, -z);
        const auto rhs = sf::log_kummer_m(2.8, 2.0, z);
        EXPECT_NEAR(lhs.log_abs, rhs.log_abs - z, 1e-10) << z;
    }
}

TEST(Kummer, SeriesAndAsymptoticOverlap) {
    for (double z : {-45.0, 45.0}) {
        const auto s = sf::detail::kummer_series(0.6, 2.0, z);
        const auto a = sf::detail::kummer_asymptotic(0.6, 2.0, z);
        ASSERT_TRUE(a.converged);
        EXPECT_NEAR(s.log_abs, a.log_abs, 1e-10) << z;
    }
}

TEST(Kummer, InvalidAndOverflow) {
    EXPECT_THROW(sf::kummer_m(1.0, -2.0, 1.0), Error);
    try {
        sf::kummer_m(3.0, 2.0, 800.0);
        FAIL() << "expected overflow";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Overflow);
    }
    EXPECT_TRUE(std::isfinite(sf::log_kummer_m(3.0, 2.0, 800.0).log_abs));
}

TEST(BesselI1, MatchesIntegralRepresentation) {
    // I_1(z) = (1/pi) int_0^pi e^{z cos t} cos t dt; the trapezoid rule is spectrally accurate here.
    for (double z : {1e-3, 0.5, 3.0, 19.0, 21.0, 80.0, 300.0}) {
        const int n = 4000;
        double sum = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double t = std::numbers::pi * k / n;
            const double w = (k == 0 || k == n) ? 0.5 : 1.0;
            sum += w * std::exp(z * (std::cos(t) - 1.0)) * std::cos(t);
        }
        const double scaled = sum / n;
        EXPECT_LT(rel(sf::bessel_i1_scaled(z).value, scaled), 1e-12) << z;
        const auto direct = sf::bessel_i1(z);
        EXPECT_FALSE(direct.scaled);
        EXPECT_LT(rel(direct.value, scaled * std::exp(z)), 1e-12) << z;
    }
    EXPECT_EQ(sf::bessel_i1(0.0).value, 0.0);
    EXPECT_TRUE(sf::bessel_i1(800.0).scaled);
    EXPECT_THROW(sf::bessel_i1(-1.0), Error);
}
