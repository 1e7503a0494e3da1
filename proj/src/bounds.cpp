#include "gprotor/bounds.hpp"

#include <cmath>
#include <sstream>

namespace gprotor {

namespace {

double pos_part(double x) { return x > 0.0 ? x : 0.0; }

double log_sinc(double x) {
    if (std::abs(x) < 1e-6) return std::log1p(-x * x / 6.0);
    return std::log(std::sin(x) / x);
}

}  // namespace

double c_n(double n) {
    if (!(n > 0.0)) throw std::domain_error("c_n requires n > 0");
    if (n >= 1.0) return std::sqrt(kPi) / n * std::exp(std::lgamma(n + 0.5) - std::lgamma(n));
    // n in (0, 1]: stable logarithmic form of the Csc/Gamma expression
    const double log_bracket = -n * std::log(2.0) + 0.5 * n * std::log((2.0 - n) / n) +
                               std::log(2.0 / (2.0 - n)) - log_sinc(0.5 * n * kPi) -
                               std::lgamma(n + 1.0);
    return std::exp(log_bracket / n);
}

double b_n_continuous(double n) {
    return 2.0 * kPi *
           std::exp(n * std::log(4.0) + 2.0 * std::lgamma(n + 1.0) - std::lgamma(2.0 * n + 1.0));
}

double b_n(int n) {
    if (n < 0) throw std::domain_error("b_n requires n >= 0");
    return b_n_continuous(static_cast<double>(n));
}

double energy_upper_bound(double n, double a) {
    if (n < 0.0 || a < 0.0) throw std::domain_error("energy_upper_bound requires n, a >= 0");
    return 2.0 * (n + 1.0) * std::sqrt(1.0 + a / (b_n_continuous(n) * (n + 1.0)));
}

double d_n(int n) {
    if (n < 1) throw std::domain_error("d_n requires n >= 1");
    const double nd = n;
    // tail sum: n! - Gamma(n+1,2) = e^{-2} * sum_{k>n} 2^k n!/k!,
    // with term_{n+1} = 2^{n+1}/(n+1) and term_{k+1} = term_k * 2/(k+1)
    double sum = 0.0;
    double term = std::exp((nd + 1.0) * std::log(2.0) - std::log(nd + 1.0));
    for (int k = n + 1; k < n + 400; ++k) {
        sum += term;
        term *= 2.0 / (k + 1.0);
        if (term < 1e-18 * sum) break;
    }
    const double third = std::exp((1.0 - nd) * std::log(2.0) - 2.0) * sum;
    const double ratio = std::exp(std::lgamma(nd + 0.5) - std::lgamma(nd));
    const double first = 2.0 / (kE * kE) + 2.0 * kPi * ratio * ratio / (nd * nd) + third;
    return std::min(first, 19.0 / nd);
}

double xi(double a) {
    if (!(a > 0.0)) throw std::domain_error("xi requires a > 0");
    const double e = kE;
    return (2.0 * kPi * e / a) * (1.0 + std::sqrt(2.0 * a / kPi)) *
           (3.0 + pos_part(std::log(a / (2.0 * kPi * e * e))));
}

double xi_inverse(double y) {
    double lo = 1e-6, hi = 1e9;
    if (!(y > 0.0) || y > xi(lo) || y < xi(hi))
        throw std::domain_error("xi_inverse: value outside the bisection range");
    for (int it = 0; it < 400; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (xi(mid) > y)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double n_omega(double omega) {
    if (!(omega > 0.0 && omega < 2.0)) throw std::domain_error("n_omega requires 0 < omega < 2");
    return omega <= 1.0 ? 2.0 : 38.0 / (2.0 - omega);
}

AOmegaBounds a_omega_bounds(double omega) {
    AOmegaBounds b;
    b.lower = kPi * std::max(2.0 - omega, 1.0 / (8.0 * omega * omega) - 2.0);
    b.upper = xi_inverse(omega / (2.0 * n_omega(omega) - 1.0));
    return b;
}

namespace {

BoundReport make_report(std::string name, std::string inputs, double bound, double observed,
                        bool is_upper) {
    BoundReport r;
    r.name = std::move(name);
    r.inputs = std::move(inputs);
    r.bound_value = bound;
    r.observed_value = observed;
    r.has_observed = true;
    r.is_upper = is_upper;
    r.slack = is_upper ? bound - observed : observed - bound;
    r.satisfied = r.slack >= -1e-8;
    return r;
}

}  // namespace

BoundReport check_upper(std::string name, std::string inputs, double bound, double observed) {
    return make_report(std::move(name), std::move(inputs), bound, observed, true);
}

BoundReport check_lower(std::string name, std::string inputs, double bound, double observed) {
    return make_report(std::move(name), std::move(inputs), bound, observed, false);
}

CoreSizeBound vortex_core_size_bound(const VortexProfile& p) {
    if (!(p.n > 0.0)) throw std::domain_error("core size bound requires n > 0");
    CoreSizeBound out;
    // even quadratic extrapolation of g to r = 0 from the two innermost cells
    const double g0 = (9.0 * p.g[0] - p.g[1]) / 8.0;
    const double fmax = p.sup_f();
    out.s_observed = std::pow(fmax / g0, 1.0 / p.n);
    out.s_lower = 1.0 / (std::sqrt(p.mu_tilde) * c_n(p.n));
    out.satisfied = out.s_observed >= out.s_lower - 1e-8 * out.s_lower;
    return out;
}

QuarticLowerBound quartic_lower_bound(const Field2D& phi) {
    QuarticLowerBound q;
    const double area = phi.grid.cell_area();
    double norm2 = 0.0, moment = 0.0, lhs = 0.0;
    for (int j = 0; j < phi.grid.n; ++j)
        for (int i = 0; i < phi.grid.n; ++i) {
            const double d = std::norm(phi.values(i, j));
            const double r2 = phi.grid.coord[i] * phi.grid.coord[i] +
                              phi.grid.coord[j] * phi.grid.coord[j];
            norm2 += d;
            moment += r2 * d;
            lhs += d * d;
        }
    norm2 *= area;
    moment *= area;
    lhs *= area;
    if (!(moment > 0.0)) throw std::domain_error("quartic bound: zero second moment");
    q.lhs = lhs;
    q.rhs = 4.0 / (9.0 * kPi) * norm2 * norm2 * norm2 / moment;
    q.satisfied = q.lhs >= q.rhs - 1e-10 * std::max(1.0, q.rhs);
    return q;
}

QuarticLowerBound quartic_lower_bound_radial(const ArrayXd& f, const RadialGrid& grid) {
    QuarticLowerBound q;
    const double norm2 = (grid.w * f.square()).sum();
    const double moment = (grid.w * grid.r.square() * f.square()).sum();
    if (!(moment > 0.0)) throw std::domain_error("quartic bound: zero second moment");
    q.lhs = (grid.w * f.pow(4)).sum();
    q.rhs = 4.0 / (9.0 * kPi) * norm2 * norm2 * norm2 / moment;
    q.satisfied = q.lhs >= q.rhs - 1e-10 * std::max(1.0, q.rhs);
    return q;
}

std::vector<BoundReport> vortex_bound_suite(const VortexProfile& p) {
    std::vector<BoundReport> out;
    std::ostringstream in;
    in << "n=" << p.n << " a=" << p.a;
    const std::string inputs = in.str();
    const bool harmonic = p.trap.kind() == TrapKind::Harmonic;
    const double fmax2 = p.sup_f() * p.sup_f();

    if (p.a > 0.0)
        out.push_back(check_upper("sup_f_general", inputs, p.mu_tilde / (2.0 * p.a), fmax2));
    if (harmonic && p.a > 0.0)
        out.push_back(check_upper("sup_f_harmonic", inputs,
                                  (p.mu_tilde - 2.0 * p.n) / (2.0 * p.a), fmax2));
    if (harmonic) {
        out.push_back(
            check_upper("energy_upper", inputs, energy_upper_bound(p.n, p.a), p.energy));
        const double mu_bound =
            2.0 * (1.0 + 2.0 * std::sqrt(p.a * (p.n + 1.0) / b_n_continuous(p.n)));
        out.push_back(check_upper("mu_tilde_upper", inputs, mu_bound, p.mu_tilde - 2.0 * p.n));
        out.push_back(check_upper("virial_residual", inputs, 1e-4, virial_check(p)));
    }
    if (p.n > 0.0) {
        const CoreSizeBound cs = vortex_core_size_bound(p);
        out.push_back(check_lower("core_size", inputs, cs.s_lower, cs.s_observed));
        const double gmax = p.g.abs().maxCoeff();
        out.push_back(check_upper(
            "sup_g", inputs,
            p.sup_f() * std::pow(c_n(p.n) * c_n(p.n) * p.mu_tilde, 0.5 * p.n), gmax));
    }
    const QuarticLowerBound ql = quartic_lower_bound_radial(p.f, p.grid);
    out.push_back(check_lower("quartic_lower", inputs, ql.rhs, ql.lhs));
    return out;
}

}  // namespace gprotor
