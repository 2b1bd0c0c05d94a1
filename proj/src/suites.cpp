#include "cevsv/density.hpp"
#include "cevsv/pricing.hpp"
#include "cevsv/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace cevsv {

namespace {

constexpr std::array<double, 3> kGammas{-0.8, -0.5, -0.2};
constexpr std::array<double, 3> kXs{0.1, 0.2, 0.4};
constexpr std::array<double, 3> kTaus{0.1, 0.5, 1.0};
constexpr double kTheta = 0.1;
constexpr double kEpsilon = 0.1;

std::string fmt(const char* label, double v) {
    std::ostringstream os;
    os.precision(6);
    os << label << v;
    return os.str();
}

CheckResult below(std::string name, double measured, double tol, std::string detail = {}) {
    return {std::move(name), measured <= tol, measured, tol, std::move(detail)};
}

} // namespace

std::vector<CheckResult> density_suite() {
    double worst_mass = 0.0;
    double worst_laplace = 0.0;
    std::string where_mass;
    std::string where_laplace;
    for (double g : kGammas) {
        const ModelSpec spec = ModelSpec::neg2gamma_standard(g, kTheta, kEpsilon);
        for (double x : kXs) {
            for (double tau : kTaus) {
                const TransitionQuery q(spec, x, 0.0, tau);
                const Neg2GammaDensity d(q);
                const quad::Result mass = d.integrate([](double) { return 1.0; });
                const double err = mass.converged ? std::abs(mass.value - (1.0 - d.atom_mass())) : INFINITY;
                if (err >= worst_mass) {
                    worst_mass = err;
                    where_mass = fmt("gamma=", g) + fmt(" x=", x) + fmt(" tau=", tau);
                }
                for (double mu : {0.1, 1.0, 10.0}) {
                    const double e = std::abs(laplace_transform_lhs(q, mu) - laplace_transform_rhs(q, mu));
                    if (e >= worst_laplace) {
                        worst_laplace = e;
                        where_laplace = fmt("gamma=", g) + fmt(" x=", x) + fmt(" tau=", tau) + fmt(" mu=", mu);
                    }
                }
            }
        }
    }
    double min_density = INFINITY;
    for (double g : kGammas) {
        const Neg2GammaDensity d = Neg2GammaDensity::from_parameters(g, kTheta, kEpsilon, 0.2, 0.5);
        for (int k = 0; k <= 90; ++k) {
            const double v = d.continuous_at(std::pow(10.0, -6.0 + k / 10.0));
            min_density = std::isfinite(v) ? std::min(min_density, v) : -INFINITY;
        }
    }
    return {
        below("density normalization (continuous + atom = 1)", worst_mass, 1e-6, "worst at " + where_mass),
        below("Laplace identity (quadrature vs closed form)", worst_laplace, 1e-6, "worst at " + where_laplace),
        {"density non-negative on y in [1e-6, 1e3]", min_density >= 0.0, min_density, 0.0, {}},
    };
}

std::vector<CheckResult> pde_suite() {
    const PdeGrid fine{0.05, 1.0, 0.01, 1.0, 1e-3, 1e-3};
    const PdeGrid coarse{0.05, 1.0, 0.01, 1.0, 1e-2, 1e-2};
    const ModelSpec m3 = ModelSpec::neg2gamma_standard(-0.6, 0.1, 0.1);
    const ModelSpec m2(Branch::MGamma, 0.5, 0.2, 0.2, CoefficientFn::constant(-0.2), CoefficientFn::constant(0.2));
    const ModelSpec m1(Branch::MNegGamma, 0.5, 0.2, 0.2, CoefficientFn::constant(-0.2), CoefficientFn::constant(0.2));

    std::vector<CheckResult> out;
    auto certify = [&](const ModelSpec& spec, const SymmetrySolution& u, double residual_tol) {
        const PdeResidualReport r = pde_residual(spec, u, fine);
        const std::string detail = fmt("fine-step residual=", r.max_abs_residual_fine) +
                                   fmt(" interior points=", static_cast<double>(r.interior_points));
        out.push_back(below(u.name + fmt(" mu=", u.mu) + " max residual", r.max_abs_residual, residual_tol, detail));
        out.push_back({u.name + fmt(" mu=", u.mu) + " Richardson order in [1.8, 2.2]",
                       r.order >= 1.8 && r.order <= 2.2, r.order, 2.0, detail});
    };
    auto constant = [&](const ModelSpec& spec, const SymmetrySolution& u) {
        const PdeResidualReport r = pde_residual(spec, u, coarse);
        out.push_back({u.name + " mu=0 residual exactly zero", r.max_abs_residual == 0.0, r.max_abs_residual, 0.0, {}});
    };
    certify(m3, so8_solution(m3, 0.3), 1e-4);
    certify(m2, gmap2_solution(m2, 0.3), 1e-6);
    certify(m1, gmap_solution(m1, 1.0), 1e-4);
    constant(m3, so8_solution(m3, 0.0));
    constant(m2, gmap2_solution(m2, 0.0));
    constant(m1, gmap_solution(m1, 0.0));
    return out;
}

std::vector<CheckResult> laplace_suite(const LaplaceSuiteOptions& opt) {
    const ModelSpec spec(Branch::MNegGamma, opt.gamma, 0.0, opt.l, CoefficientFn::constant(opt.q),
                         CoefficientFn::constant(opt.l));
    SimulationRequest req;
    req.x0 = opt.x0;
    req.horizon = opt.tau;
    req.n_paths = opt.n_paths;
    req.n_steps = opt.n_steps;
    req.seed = opt.seed;
    const PathBatch batch = simulate(spec, req);
    const double g = opt.gamma;
    const double zf = z_factor(spec, 0.0, opt.tau);
    const double w = laplace_variance_term(spec, opt.tau);
    std::vector<CheckResult> out;
    for (double mu : opt.mus) {
        const McEstimate e = mc_expectation(
            batch, [mu, g](double y) { return std::exp(-mu * std::pow(y, -g)); }, g > 0.0 ? 0.0 : 1.0);
        const double rhs = std::exp(-std::pow(opt.x0, -g) * mu / zf + w * mu * mu);
        const double z = e.std_error > 0.0 ? std::abs(e.mean - rhs) / e.std_error : (e.mean == rhs ? 0.0 : INFINITY);
        out.push_back(below(fmt("m=-gamma Laplace identity |z| mu=", mu), z, opt.z_limit,
                            fmt("mc=", e.mean) + fmt(" closed=", rhs) + fmt(" se=", e.std_error) +
                                fmt(" paths=", static_cast<double>(opt.n_paths))));
    }
    return out;
}

std::vector<CheckResult> mc_triangle_suite(const TriangleOptions& opt) {
    const ModelSpec spec = ModelSpec::neg2gamma_standard(opt.gamma, opt.theta, opt.epsilon);
    SimulationRequest req;
    req.x0 = opt.x0;
    req.horizon = opt.tau;
    req.n_paths = opt.n_paths;
    req.n_steps = opt.n_steps;
    req.seed = opt.seed;
    const PathBatch batch = simulate(spec, req);
    std::vector<CheckResult> out;
    for (int i : opt.orders) {
        const std::string tag = " i=" + std::to_string(i);
        const double closed = moment_expectation_q(spec, 0.0, opt.tau, opt.x0, i);
        const double quad_i = moment_by_density(spec, 0.0, opt.tau, opt.x0, i);
        const McEstimate mc_i = mc_moment(batch, i);
        const double rel = std::abs(closed - quad_i) / std::abs(quad_i);
        out.push_back(below("closed-form Q vs density quadrature of y^i," + tag, rel, opt.quadrature_rel_tol,
                            fmt("closed=", closed) + fmt(" quadrature=", quad_i)));
        const double z = std::abs(closed - mc_i.mean) / mc_i.std_error;
        out.push_back(below("closed-form Q vs Monte Carlo of y^i |z|," + tag, z, opt.z_limit,
                            fmt("closed=", closed) + fmt(" mc=", mc_i.mean) + fmt(" se=", mc_i.std_error)));
        if (!opt.diagnostics) continue;
        const double zq = std::abs(quad_i - mc_i.mean) / mc_i.std_error;
        CheckResult c = below("density quadrature vs Monte Carlo of y^i |z|," + tag, zq, opt.z_limit,
                              fmt("quadrature=", quad_i) + fmt(" mc=", mc_i.mean));
        c.informational = true;
        out.push_back(c);
        const double p = i - 2.0 * opt.gamma - 1.0;
        const double quad_p = moment_by_density(spec, 0.0, opt.tau, opt.x0, p);
        c = below("closed-form Q vs density quadrature of y^{i-2gamma-1}," + tag,
                  std::abs(closed - quad_p) / std::abs(quad_p), opt.quadrature_rel_tol,
                  fmt("closed=", closed) + fmt(" quadrature=", quad_p));
        c.informational = true;
        out.push_back(c);
        const McEstimate mc_p = mc_moment(batch, p);
        c = below("closed-form Q vs Monte Carlo of y^{i-2gamma-1} |z|," + tag,
                  std::abs(closed - mc_p.mean) / mc_p.std_error, opt.z_limit,
                  fmt("closed=", closed) + fmt(" mc=", mc_p.mean) + fmt(" se=", mc_p.std_error));
        c.informational = true;
        out.push_back(c);
    }
    return out;
}

} // namespace cevsv
