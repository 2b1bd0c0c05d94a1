#include "cevsv/verify.hpp"

#include "cevsv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace cevsv {

const char* to_string(Scheme s) noexcept {
    return s == Scheme::LogEuler ? "log_euler" : "euler_full_truncation";
}

Scheme default_scheme(const ModelSpec& spec) noexcept {
    return spec.gamma() < 0.0 ? Scheme::LogEuler : Scheme::EulerFullTruncation;
}

namespace {

enum PathState : unsigned char { Alive = 0, Absorbed = 1, Exploded = 2 };

struct StepTables {
    std::vector<double> q;
    std::vector<double> l;
};

StepTables step_tables(const ModelSpec& spec, double T, int n) {
    StepTables tab{std::vector<double>(n), std::vector<double>(n)};
    const double dt = T / n;
    for (int k = 0; k < n; ++k) {
        const double backward = T - k * dt;
        tab.q[k] = spec.q()(backward);
        tab.l[k] = spec.l()(backward);
    }
    return tab;
}

} // namespace

PathBatch simulate(const ModelSpec& spec, const SimulationRequest& req) {
    if (!(req.x0 > 0.0)) throw Error(ErrorKind::Domain, "simulate: x0 must be positive");
    if (!(req.horizon > 0.0)) throw Error(ErrorKind::Domain, "simulate: horizon must be positive");
    if (req.n_paths < 1 || req.n_steps < 1) {
        throw Error(ErrorKind::InvalidParameter, "simulate: need at least one path and one step");
    }
    const Scheme scheme = req.scheme.value_or(default_scheme(spec));
    const int n = req.n_steps;
    const double T = req.horizon;
    const double dt = T / n;
    const double sdt = std::sqrt(dt);
    const double g = spec.gamma();
    const double c = 0.5 * (1.0 - spec.m());
    const StepTables tab = step_tables(spec, T, n);
    const bool absorbing = g < 0.0;
    const double ceiling = 1e6 * req.x0;
    const double log_floor = std::log(kAbsorptionFloor);
    const double log_ceiling = std::log(ceiling);
    const double avg_power = req.time_average_power;

    const auto N = static_cast<std::size_t>(req.n_paths);
    std::vector<double> terminal(N);
    std::vector<double> average(req.record_time_average ? N : 0);
    std::vector<unsigned char> state(N, Alive);

    auto run_path = [&](std::size_t p) {
        NormalStream rng(req.seed, p);
        double sum = 0.0;
        unsigned char st = Alive;
        double x = req.x0;
        if (scheme == Scheme::LogEuler) {
            double lx = std::log(req.x0);
            for (int k = 0; k < n; ++k) {
                const double xg = std::exp(g * lx);
                sum += std::exp(avg_power * lx);
                const double l = tab.l[k];
                lx += ((c - 0.5) * l * l * xg * xg + tab.q[k]) * dt + l * xg * sdt * rng.next();
                if (absorbing && lx <= log_floor) {
                    st = Absorbed;
                    break;
                }
                if (!(lx < log_ceiling)) {
                    st = Exploded;
                    break;
                }
            }
            x = st == Absorbed ? 0.0 : std::exp(lx);
        } else {
            for (int k = 0; k < n; ++k) {
                const double xg = std::pow(x, g);
                sum += avg_power == 1.0 ? x : std::pow(x, avg_power);
                const double l = tab.l[k];
                x += (c * l * l * xg * xg * x + tab.q[k] * x) * dt + l * xg * x * sdt * rng.next();
                if (x <= kAbsorptionFloor) {
                    if (absorbing) {
                        st = Absorbed;
                        x = 0.0;
                        break;
                    }
                    x = std::max(std::abs(x), kAbsorptionFloor);
                }
                if (!(x < ceiling)) {
                    st = Exploded;
                    break;
                }
            }
        }
        terminal[p] = x;
        state[p] = st;
        if (req.record_time_average) average[p] = sum / n;
    };

    unsigned workers = req.workers != 0 ? req.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, N));
    if (workers <= 1) {
        for (std::size_t p = 0; p < N; ++p) run_path(p);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (N + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(N, lo + chunk);
            pool.emplace_back([&, lo, hi] {
                for (std::size_t p = lo; p < hi; ++p) run_path(p);
            });
        }
        for (auto& t : pool) t.join();
    }

    PathBatch batch{req.n_paths, n, scheme, req.seed, {}, 0, 0, std::move(average)};
    batch.terminal_values.reserve(N);
    for (std::size_t p = 0; p < N; ++p) {
        if (state[p] == Absorbed) {
            ++batch.absorbed_count;
            continue;
        }
        if (state[p] == Exploded) ++batch.exploded_count;
        batch.terminal_values.push_back(terminal[p]);
    }
    if (batch.exploded_count * 100 > req.n_paths) {
        throw Error(ErrorKind::Stability, "simulate: " + std::to_string(batch.exploded_count) + " of " +
                                              std::to_string(req.n_paths) +
                                              " paths exceeded 1e6 x0; refine the time step");
    }
    return batch;
}

McEstimate mc_expectation(const PathBatch& batch, const std::function<double(double)>& f, double f_absorbed) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (double y : batch.terminal_values) {
        const double v = f(y);
        s1 += v;
        s2 += v * v;
    }
    s1 += batch.absorbed_count * f_absorbed;
    s2 += batch.absorbed_count * f_absorbed * f_absorbed;
    const double n = static_cast<double>(batch.n_paths);
    const double mean = s1 / n;
    const double var = n > 1 ? std::max(0.0, (s2 / n - mean * mean) * n / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n), batch.n_paths};
}

McEstimate mc_moment(const PathBatch& batch, double power) {
    if (!(power > 0.0)) throw Error(ErrorKind::Domain, "mc_moment: power must be positive");
    return mc_expectation(batch, [power](double y) { return std::pow(y, power); }, 0.0);
}

// ---- PDE residual ----------------------------------------------------------

namespace {

void require_solution_branch(const ModelSpec& spec, Branch b, const char* what) {
    if (spec.branch() != b) {
        throw Error(ErrorKind::BranchMismatch, std::string(what) + ": needs the " + to_string(b) + " branch, got " +
                                                   to_string(spec.branch()));
    }
}

} // namespace

SymmetrySolution gmap_solution(const ModelSpec& spec, double mu) {
    require_solution_branch(spec, Branch::MNegGamma, "Gmap");
    const double g = spec.gamma();
    auto slice = [spec, mu, g](double t) -> std::function<double(double)> {
        const double a = mu / z_factor(spec, 0.0, t);
        const double b = laplace_variance_term(spec, t) * mu * mu;
        return [a, b, g](double x) { return std::exp(-a * std::pow(x, -g) + b); };
    };
    return {Branch::MNegGamma, mu, "gmap", slice};
}

SymmetrySolution gmap2_solution(const ModelSpec& spec, double mu) {
    require_solution_branch(spec, Branch::MGamma, "Gmap2");
    const double g = spec.gamma();
    auto slice = [spec, mu, g](double t) -> std::function<double(double)> {
        const double a = mu * z_factor(spec, 0.0, t);
        return [a, g](double x) { return 1.0 + a * std::pow(x, g); };
    };
    return {Branch::MGamma, mu, "gmap2", slice};
}

SymmetrySolution so8_solution(const ModelSpec& spec, double mu) {
    require_solution_branch(spec, Branch::MNeg2Gamma, "so8");
    if (!has_standard_coefficient_pair(spec)) {
        throw Error(ErrorKind::BranchMismatch, "so8: needs q(t) = -theta and l(t) = epsilon*exp(-theta*gamma*t)");
    }
    const double g = spec.gamma();
    const double th = spec.theta();
    const double eps = spec.epsilon();
    auto slice = [mu, g, th, eps](double t) -> std::function<double(double)> {
        const double a = std::exp(2.0 * t * g * th) * mu / (1.0 + 2.0 * t * g * g * eps * eps * mu);
        return [a, g](double x) { return std::exp(-a * std::pow(x, -2.0 * g)); };
    };
    return {Branch::MNeg2Gamma, mu, "so8", slice};
}

PdeResidualReport pde_residual(const ModelSpec& spec, const SymmetrySolution& u, const PdeGrid& grid) {
    require_solution_branch(spec, u.branch, "pde_residual");
    if (!(grid.hx > 0.0) || !(grid.ht > 0.0) || !(grid.x_max > grid.x_min) || !(grid.t_max > grid.t_min)) {
        throw Error(ErrorKind::InvalidParameter, "pde_residual: empty grid");
    }
    if (!(grid.x_min > 0.0)) throw Error(ErrorKind::Domain, "pde_residual: grid must stay away from x = 0");
    if (!(grid.t_min - grid.ht > -1e-15)) {
        throw Error(ErrorKind::Domain, "pde_residual: time stencil would cross t = 0");
    }
    const long nx = std::lround((grid.x_max - grid.x_min) / grid.hx);
    const long nt = std::lround((grid.t_max - grid.t_min) / grid.ht);
    const double g = spec.gamma();
    const double m = spec.m();

    auto sweep = [&](double h, double k) {
        double worst = 0.0;
        for (long j = 1; j < nt; ++j) {
            const double t = grid.t_min + j * grid.ht;
            const auto um = u.slice(t - k);
            const auto u0 = u.slice(t);
            const auto up = u.slice(t + k);
            const double q = spec.q()(t);
            const double l = spec.l()(t);
            const double s = 0.5 * (m - 1.0) * l * l;
            for (long i = 1; i < nx; ++i) {
                const double x = grid.x_min + i * grid.hx;
                const double uc = u0(x);
                const double ul = u0(x - h);
                const double ur = u0(x + h);
                const double ut = (up(x) - um(x)) / (2.0 * k);
                const double ux = (ur - ul) / (2.0 * h);
                const double uxx = (ur - 2.0 * uc + ul) / (h * h);
                const double x2g = std::pow(x, 2.0 * g);
                const double r = ut - ((q * x - s * x2g * x) * ux + 0.5 * l * l * x2g * x * x * uxx);
                worst = std::max(worst, std::abs(r));
            }
        }
        return worst;
    };
    PdeResidualReport rep{};
    rep.max_abs_residual = sweep(grid.hx, grid.ht);
    rep.max_abs_residual_fine = sweep(0.5 * grid.hx, 0.5 * grid.ht);
    rep.interior_points = std::max(0L, nx - 1) * std::max(0L, nt - 1);
    rep.order = rep.max_abs_residual_fine > 0.0 ? std::log2(rep.max_abs_residual / rep.max_abs_residual_fine)
                                                : std::numeric_limits<double>::quiet_NaN();
    rep.grid_too_coarse = std::isfinite(rep.order) && rep.order < 1.5;
    return rep;
}

// ---- Laplace identity ------------------------------------------------------

LaplaceCheck laplace_identity_mc(const ModelSpec& spec, double x0, double tau, double mu,
                                 const SimulationRequest& budget) {
    require_solution_branch(spec, Branch::MNegGamma, "laplace_identity_mc");
    SimulationRequest req = budget;
    req.x0 = x0;
    req.horizon = tau;
    const PathBatch batch = simulate(spec, req);
    const double g = spec.gamma();
    const McEstimate e = mc_expectation(
        batch, [mu, g](double y) { return std::exp(-mu * std::pow(y, -g)); }, g > 0.0 ? 0.0 : 1.0);
    const double rhs =
        std::exp(-std::pow(x0, -g) * mu / z_factor(spec, 0.0, tau) + laplace_variance_term(spec, tau) * mu * mu);
    const double z = e.std_error > 0.0 ? (e.mean - rhs) / e.std_error : (e.mean == rhs ? 0.0 : INFINITY);
    return {mu, e.mean, rhs, e.std_error, z};
}

// ---- Volatility swap oracle ------------------------------------------------

VolSwapOracle volatility_swap_oracle(const ModelSpec& spec, double T, double x, const SimulationRequest& budget) {
    const SwapQuote first = variance_swap_fair_strike(spec, T, x, 1);
    SimulationRequest req = budget;
    req.x0 = x;
    req.horizon = T;
    req.record_time_average = true;
    req.time_average_power = -2.0 * spec.gamma();
    const PathBatch batch = simulate(spec, req);
    double s1 = 0.0, s2 = 0.0, r1 = 0.0, r2 = 0.0;
    for (double v : batch.time_averages) {
        s1 += v;
        s2 += v * v;
        const double r = std::sqrt(v);
        r1 += r;
        r2 += v;
    }
    const double n = static_cast<double>(batch.time_averages.size());
    const double mean = s1 / n;
    const double var = (s2 / n - mean * mean) * n / (n - 1.0);
    const double mean_sqrt = r1 / n;
    const double var_sqrt = (r2 / n - mean_sqrt * mean_sqrt) * n / (n - 1.0);
    VolSwapOracle out{volatility_swap_from_variance(spec, T, x, first.value, var, 0.0), mean, var, mean_sqrt,
                      std::sqrt(std::max(0.0, var_sqrt) / n)};
    out.quote.quadrature_error = first.quadrature_error;
    return out;
}

} // namespace cevsv
