#pragma once

#include "gprotor/radial_solver.hpp"

#include <string>
#include <vector>

namespace gprotor {

/// Vortex-core constant c_n, n > 0. Two closed-form branches meeting at
/// n = 1; c_n^n -> 1 as n -> 0 and c_n = O(n^{-1/2}) for large n.
double c_n(double n);

/// b_n = 2*pi*4^n*(n!)^2/(2n)!; equals 1 / int |chi_n|^4 for the oscillator
/// states chi_n.
double b_n(int n);
double b_n_continuous(double n);

/// Harmonic-trap bound E_n(a) <= 2(n+1)*sqrt(1 + a/(b_n(n+1))).
double energy_upper_bound(double n, double a);

/// Instability constant d_n (min of two branches); monotone decreasing,
/// d_n < 1 for n >= 10.
double d_n(int n);

/// Xi(a) = (2*pi*e/a)(1+sqrt(2a/pi))(3+[ln(a/(2*pi*e^2))]_+), a > 0;
/// strictly decreasing.
double xi(double a);
/// Inverse of Xi by bisection on [1e-6, 1e9] to 1e-12 relative tolerance.
double xi_inverse(double y);

/// Vortex cutoff N_Omega: all n-vortices with n >= N_Omega are unstable.
/// Defined on 0 < omega < 2 (harmonic trap); piecewise 2 / 38/(2-omega).
double n_omega(double omega);

struct AOmegaBounds {
    double lower = 0.0;
    double upper = 0.0;
};
/// Bracketing of the critical coupling for symmetry breaking (harmonic).
AOmegaBounds a_omega_bounds(double omega);

struct BoundReport {
    std::string name;
    std::string inputs;
    double bound_value = 0.0;
    double observed_value = 0.0;
    bool has_observed = false;
    bool is_upper = true;  // upper: observed <= bound; lower: observed >= bound
    double slack = 0.0;    // >= 0 when satisfied
    bool satisfied = true;
};

BoundReport check_upper(std::string name, std::string inputs, double bound, double observed);
BoundReport check_lower(std::string name, std::string inputs, double bound, double observed);

struct CoreSizeBound {
    double s_observed = 0.0;
    double s_lower = 0.0;
    bool satisfied = true;
};
/// Core size s from the r^n growth of f at the origin vs. the analytic
/// floor 1/(mu_tilde^{1/2} c_n). Requires n > 0.
CoreSizeBound vortex_core_size_bound(const VortexProfile& p);

struct QuarticLowerBound {
    double lhs = 0.0;  // int |phi|^4
    double rhs = 0.0;  // (4/9pi) (int |phi|^2)^3 / int |phi|^2 r^2
    bool satisfied = true;
};
QuarticLowerBound quartic_lower_bound(const Field2D& phi);
QuarticLowerBound quartic_lower_bound_radial(const ArrayXd& f, const RadialGrid& grid);

/// All closed-form checks applicable to one converged vortex profile
/// (sup bounds on f, energy upper bound, chemical-potential bound, virial,
/// core size, sup bound on g). Harmonic-only rows are skipped for other
/// traps.
std::vector<BoundReport> vortex_bound_suite(const VortexProfile& p);

}  // namespace gprotor
