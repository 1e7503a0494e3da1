#include "gprotor/critical.hpp"
#include "gprotor/bounds.hpp"

#include <cmath>

namespace gprotor {

namespace {

VortexProfile solve_level(int n, double a, const TrapPotential& trap, const RadialGrid& grid,
                          const RadialSolveOptions& opts) {
    GpParameters pr{a, 0.0};
    VortexProfile p = minimize_vortex(static_cast<double>(n), pr, trap, grid, opts);
    if (!p.converged)
        throw std::runtime_error("critical frequency: radial solve for n=" + std::to_string(n) +
                                 " did not converge (residual " + std::to_string(p.residual) +
                                 ")");
    return p;
}

}  // namespace

double critical_frequency(int n, double a, const TrapPotential& trap, const RadialGrid& grid,
                          const RadialSolveOptions& opts) {
    if (n < 0) throw std::invalid_argument("critical_frequency requires n >= 0");
    const VortexProfile lo = solve_level(n, a, trap, grid, opts);
    const VortexProfile hi = solve_level(n + 1, a, trap, grid, opts);
    return hi.energy - lo.energy;
}

double omega_derivative(int n, double a, const TrapPotential& trap, const RadialGrid& grid,
                        const RadialSolveOptions& opts) {
    const VortexProfile lo = solve_level(n, a, trap, grid, opts);
    const VortexProfile hi = solve_level(n + 1, a, trap, grid, opts);
    return hi.quartic_integral() - lo.quartic_integral();
}

double omega_derivative_zero_coupling(int n) {
    if (n < 0) throw std::invalid_argument("omega_derivative_zero_coupling requires n >= 0");
    // 1/b_{n+1} - 1/b_n in closed form
    const double nd = n;
    const double log_mag = std::lgamma(2.0 * nd + 1.0) - std::lgamma(nd + 1.0) -
                           std::lgamma(nd + 2.0) - (nd + 1.0) * std::log(4.0) - std::log(kPi);
    return -std::exp(log_mag);
}

OmegaSandwich omega_sandwich(int n, double a) {
    return {2.0 - a / b_n(n), 2.0 + a / b_n(n + 1)};
}

namespace {

double pos_part(double x) { return x > 0.0 ? x : 0.0; }

double lower_bound_scan(int n, const TrapPotential& trap, double e_np1) {
    const double wc = trap.omega_c();
    double best = 0.0;
    if (std::isfinite(wc)) {
        for (int j = 0; j < 64; ++j) {
            const double w = wc * (j + 0.5) / 64.0;
            const double denom = trap.c_tilde(w) + e_np1;
            if (denom > 0.0) best = std::max(best, 0.25 * w * w / denom);
        }
    } else {
        // unbounded omega_c: log-spaced scan; the maximand decays at both ends
        for (int j = 0; j < 64; ++j) {
            const double w = 1e-2 * std::pow(1e5, j / 63.0);
            const double denom = trap.c_tilde(w) + e_np1;
            if (denom > 0.0) best = std::max(best, 0.25 * w * w / denom);
        }
    }
    return (2.0 * n + 1.0) * best;
}

}  // namespace

OmegaBoundCheck bound_check_general(int n, double a, const TrapPotential& trap, double e1,
                                    double e_np1, double omega_n) {
    if (!(a > 0.0)) throw std::domain_error("bound_check_general requires a > 0");
    OmegaBoundCheck c;
    c.upper = (2.0 * n + 1.0) * (2.0 * kPi * kE / a) * e1 *
              (3.0 + pos_part(std::log(a / (2.0 * kPi * kE * kE))));
    c.lower = lower_bound_scan(n, trap, e_np1);
    c.slack_upper = c.upper - omega_n;
    c.slack_lower = omega_n - c.lower;
    c.upper_ok = c.slack_upper >= -1e-8;
    c.lower_ok = c.slack_lower >= -1e-8;
    return c;
}

OmegaBoundCheck bound_check_harmonic(int n, double a, double omega_n) {
    if (!(a > 0.0)) throw std::domain_error("bound_check_harmonic requires a > 0");
    OmegaBoundCheck c;
    c.upper = (2.0 * n + 1.0) * xi(a);
    c.lower = (2.0 * n + 1.0) /
              ((n + 2.0) * std::sqrt(1.0 + a / (b_n(n + 1) * (n + 2.0))));
    c.slack_upper = c.upper - omega_n;
    c.slack_lower = omega_n - c.lower;
    c.upper_ok = c.slack_upper >= -1e-8;
    c.lower_ok = c.slack_lower >= -1e-8;
    return c;
}

bool CriticalFrequencyTable::all_bounds_ok() const {
    for (const auto& e : entries)
        if (!e.bounds.upper_ok || !e.bounds.lower_ok) return false;
    return true;
}

bool CriticalFrequencyTable::chain_ok(double tol) const {
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        const double lhs = entries[i + 1].omega_n;
        const double n = entries[i].n;
        const double rhs = (2.0 * n + 3.0) / (2.0 * n + 1.0) * entries[i].omega_n;
        if (lhs > rhs + tol) return false;
    }
    return true;
}

CriticalFrequencyTable critical_table(int n_max, double a, const TrapPotential& trap,
                                      const RadialGrid& grid, const RadialSolveOptions& opts) {
    if (n_max < 0) throw std::invalid_argument("critical_table requires n_max >= 0");
    CriticalFrequencyTable table;
    table.a = a;
    std::vector<VortexProfile> levels;
    levels.reserve(n_max + 2);
    for (int n = 0; n <= n_max + 1; ++n) levels.push_back(solve_level(n, a, trap, grid, opts));
    for (int n = 0; n <= n_max; ++n) {
        CriticalEntry e;
        e.n = n;
        e.e_n = levels[n].energy;
        e.e_np1 = levels[n + 1].energy;
        e.omega_n = e.e_np1 - e.e_n;
        if (a > 0.0) {
            e.bounds = (trap.kind() == TrapKind::Harmonic)
                           ? bound_check_harmonic(n, a, e.omega_n)
                           : bound_check_general(n, a, trap, levels[1].energy, e.e_np1,
                                                 e.omega_n);
        } else {
            e.bounds.upper = std::numeric_limits<double>::infinity();
            e.bounds.lower = 0.0;
            e.bounds.slack_upper = std::numeric_limits<double>::infinity();
            e.bounds.slack_lower = e.omega_n;
        }
        table.entries.push_back(e);
    }
    return table;
}

}  // namespace gprotor
