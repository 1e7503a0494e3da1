#pragma once

#include "gprotor/radial_solver.hpp"

#include <vector>

namespace gprotor {

/// Critical rotation frequency omega_n(a) = E_{n+1}(a) - E_n(a): the
/// rotation speed at which an (n+1)-vortex overtakes an n-vortex.
double critical_frequency(int n, double a, const TrapPotential& trap, const RadialGrid& grid,
                          const RadialSolveOptions& opts = {});

/// d omega_n / d a = int |f_{n+1}|^4 - int |f_n|^4 (Feynman-Hellmann).
double omega_derivative(int n, double a, const TrapPotential& trap, const RadialGrid& grid,
                        const RadialSolveOptions& opts = {});

/// Closed form of omega_n'(0) for the harmonic trap:
/// -(1/(4^{n+1} pi)) (2n)!/(n!(n+1)!).
double omega_derivative_zero_coupling(int n);

/// Harmonic sandwich 2 - a/b_n <= omega_n(a) <= 2 + a/b_{n+1} from the
/// oscillator trial states.
struct OmegaSandwich {
    double lower = 0.0;
    double upper = 0.0;
};
OmegaSandwich omega_sandwich(int n, double a);

struct OmegaBoundCheck {
    double upper = 0.0;
    double lower = 0.0;
    bool upper_ok = true;
    bool lower_ok = true;
    double slack_upper = 0.0;
    double slack_lower = 0.0;
};

/// General-trap bounds: upper (2n+1)(2 pi e/a) E_1(a) (3+[ln(a/2 pi e^2)]_+),
/// lower (2n+1) max over omega_tilde < omega_c of
/// omega_tilde^2 / (4 (C_{omega_tilde} + E_{n+1}(a))). Pure in its inputs.
OmegaBoundCheck bound_check_general(int n, double a, const TrapPotential& trap, double e1,
                                    double e_np1, double omega_n);

/// Harmonic-trap bounds: upper (2n+1)*Xi(a),
/// lower (2n+1)/((n+2) sqrt(1 + a/(b_{n+1}(n+2)))). Pure in its inputs.
OmegaBoundCheck bound_check_harmonic(int n, double a, double omega_n);

struct CriticalEntry {
    int n = 0;
    double e_n = 0.0;
    double e_np1 = 0.0;
    double omega_n = 0.0;
    OmegaBoundCheck bounds;
};

struct CriticalFrequencyTable {
    double a = 0.0;
    std::vector<CriticalEntry> entries;

    bool all_bounds_ok() const;
    /// omega_{n+1} <= (2n+3)/(2n+1) omega_n across consecutive entries.
    bool chain_ok(double tol = 1e-9) const;
};

CriticalFrequencyTable critical_table(int n_max, double a, const TrapPotential& trap,
                                      const RadialGrid& grid, const RadialSolveOptions& opts = {});

}  // namespace gprotor
