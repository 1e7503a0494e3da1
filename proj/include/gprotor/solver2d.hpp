#pragma once

#include "gprotor/fft2.hpp"
#include "gprotor/model.hpp"

#include <cstdint>
#include <vector>

namespace gprotor {

/// Shared spectral machinery for the full 2D GP functional
///   E[phi] = <phi|-Lap - Omega L + V|phi> + a int |phi|^4,
/// also used by the multi-component solver (components couple only
/// through the total density).
class Gp2DWorkspace {
  public:
    Gp2DWorkspace(const TrapPotential& trap, const Grid2D& grid, const GpParameters& params);

    const Grid2D& grid() const { return grid_; }
    const GpParameters& params() const { return params_; }
    const ArrayXXd& potential() const { return pot_; }

    /// out = (-Lap - Omega L + V) phi + 2 a rho phi (rho may be null).
    /// Optionally returns the kinetic energy and <L> of phi from the same
    /// transform pass.
    void apply_h(const MatrixXcd& phi, const ArrayXXd* rho, MatrixXcd& out,
                 double* kinetic = nullptr, double* rotation = nullptr);

    /// Full GP energy of a component list under the shared quartic term.
    double energy(const std::vector<const MatrixXcd*>& components);

    double rotation_expectation(const MatrixXcd& phi);
    MatrixXcd precondition(const MatrixXcd& r, double c) { return sp_.solve_helmholtz(r, c); }
    Spectral2D& spectral() { return sp_; }

  private:
    Grid2D grid_;
    GpParameters params_;
    ArrayXXd pot_;
    Spectral2D sp_;
};

struct Solve2DOptions {
    double tol_energy = 1e-11;   // relative energy stagnation
    double tol_residual = 1e-7;  // relative projected-gradient norm
    int max_iterations = 40000;
    int restarts = 8;
    std::uint64_t seed = 7;
    int jobs = 0;                // 0: hardware concurrency
    int spectrum_m_max = 16;
    double channel_project = -1.0;  // >= 0: keep angular momentum n (mod 4)
};

struct Minimizer2D {
    Field2D phi;
    double energy = 0.0;
    double l_expectation = 0.0;
    ArrayXd spectrum;  // p_m for m in [-m_max, m_max]
    int spectrum_m_max = 0;
    bool breaking_flag = false;
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
    int best_restart = 0;
};

Minimizer2D minimize_2d(const GpParameters& params, const TrapPotential& trap, const Grid2D& grid,
                        const Solve2DOptions& opts = {});

/// <phi| L phi> with L = -i (x d_y - y d_x), real up to roundoff.
double rotation_term(const Field2D& phi);

double gp_energy_2d(const Field2D& phi, const GpParameters& params, const TrapPotential& trap);

/// Exact 90-degree rotation on the periodic grid.
Field2D rotate90(const Field2D& phi);

/// Box half-width covering the interaction-broadened cloud at these
/// parameters (Thomas-Fermi radius from the closed-form energy bound).
double suggested_extent(const GpParameters& params, const TrapPotential& trap);

struct BreakingDiagnosis {
    double e_2d = 0.0;
    double best_vortex_energy = 0.0;  // min_n (E_n - n Omega)
    int best_vortex_n = 0;
    double gap = 0.0;                 // best vortex minus 2D energy
    int significant_channels = 0;
    double nonradiality = 0.0;        // angular variance of |phi| on rings
    bool breaking = false;
};

/// Compares the 2D minimum against the vortex table E_n (n = 0, 1, ...)
/// and inspects the angular spectrum; breaking is declared when the gap
/// is positive beyond tolerance and at least two channels carry weight.
BreakingDiagnosis detect_breaking(const Minimizer2D& m, const std::vector<double>& vortex_energies,
                                  const GpParameters& params, double tol_gap_rel = 1e-4,
                                  double channel_threshold = 0.01);

}  // namespace gprotor
