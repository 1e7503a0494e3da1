#pragma once

#include "gprotor/model.hpp"
#include "gprotor/radial_form.hpp"

#include <cstdint>
#include <vector>

namespace gprotor {

struct RadialSolveOptions {
    double tol_energy = 1e-12;    // relative energy stagnation per step
    double tol_residual = 1e-9;   // relative Euler-Lagrange residual
    int max_iterations = 30000;
    bool continuation = true;     // ramp the coupling up from small values
    int restarts = 0;             // optional randomized restarts (cross-check)
    std::uint64_t seed = 42;
    bool record_energy_trace = false;
};

/// Radial minimizer of the fixed-angular-momentum energy
///   E_n[f] = <f| -Lap + n^2/r^2 + V |f> + 2*pi*a \int f^4 r dr,
/// stored both as f and as the regular part g = f / r^n.
struct VortexProfile {
    double n = 0.0;
    double a = 0.0;
    double omega = 0.0;
    TrapPotential trap = TrapPotential::harmonic();
    RadialGrid grid;
    ArrayXd f;
    ArrayXd g;
    double energy = 0.0;    // E_n(a)
    double mu_tilde = 0.0;  // E_n(a) + a \int f^4, independent of omega
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> energy_trace;

    /// Full GP energy of the vortex, E_n(a) - n*omega.
    double gp_energy() const { return energy - n * omega; }
    double quartic_integral() const;  // \int |f|^4 d^2x
    double sup_f() const { return f.abs().maxCoeff(); }
};

/// Discrete functional in g variables: E(g) = g'Kg + a * sum q_i g_i^4 with
/// norm g'Mg = 1. K is SPD + potential, bandwidth 3.
class VortexDiscretization {
  public:
    VortexDiscretization(double n, const TrapPotential& trap, const RadialGrid& grid);

    double energy(const ArrayXd& g, double a) const;
    /// H g = K g + 2 a q g^3 (gradient/2 of the energy).
    ArrayXd apply(const ArrayXd& g, double a) const;
    double norm_sq(const ArrayXd& g) const { return form_.mass_sq(g); }
    void normalize(ArrayXd& g) const;
    double quartic(const ArrayXd& g) const;  // \int f^4 with f = r^n g

    const RadialForm& form() const { return form_; }
    const RadialGrid& grid() const { return grid_; }
    const ArrayXd& quartic_weights() const { return quartic_w_; }
    double vortex_charge() const { return n_; }

  private:
    double n_;
    RadialGrid grid_;
    RadialForm form_;
    ArrayXd quartic_w_;  // 2*pi*w1d*r^{4n+1}
};

VortexProfile minimize_vortex(double n, const GpParameters& params, const TrapPotential& trap,
                              const RadialGrid& grid, const RadialSolveOptions& opts = {});

/// E_n[f] for given samples of f, evaluated through the same discrete
/// functional the solver minimizes. Throws on NaN samples.
double energy_functional(const RadialState& f, double n, const GpParameters& params,
                         const TrapPotential& trap, const RadialGrid& grid);

/// mu_tilde = E_n(a) + a \int f^4. If el_defect is non-null it receives the
/// independent f-representation consistency defect <f|(H - mu_tilde)f>;
/// values above ~10*h^2 indicate a non-stationary profile.
double chemical_potential(const VortexProfile& p, double* el_defect = nullptr);

/// Harmonic-trap virial identity residual |\int f^2 r^2 d^2x - E_n(a)/2|.
/// Throws for non-harmonic traps.
double virial_check(const VortexProfile& p);

/// Closed-form initial profile r^n exp(-c r^2) (c optimal for the harmonic
/// trap at coupling a), returned in g variables, unit norm.
ArrayXd gaussian_seed(double n, double a, const VortexDiscretization& disc);

}  // namespace gprotor
