#pragma once

#include "gprotor/model.hpp"
#include "gprotor/radial_solver.hpp"

#include <vector>

namespace gprotor {

struct DmOptions {
    double tol_rho = 1e-10;      // sup-norm density increment
    double tol_kkt = 1e-10;      // occupation optimality residual
    int max_iterations = 4000;
    int occupation_iterations = 40000;
    double initial_mixing = 0.3;  // first-step cap; later steps use the
                                  // exact quadratic line search
};

/// Finite-rank density matrix diagonal in angular momentum: occupations
/// lambda_j >= 0 (sum 1) on unit orbitals f_j(r) e^{ij phi}, with radial
/// density rho = sum_j lambda_j f_j^2.
struct DmState {
    GpParameters params;
    TrapPotential trap = TrapPotential::harmonic();
    RadialGrid grid;
    std::vector<int> sectors;          // sector index per slot
    ArrayXd occupations;               // lambda per slot
    std::vector<ArrayXd> orbitals;     // f_j per slot, unit disk norm
    std::vector<double> sector_energies;  // e_j of H_0 + 2 a rho per slot
    ArrayXd rho;
    double energy = 0.0;  // E^DM
    double mu_dm = 0.0;   // ground-state energy of the linearized functional
    bool converged = false;
    double rho_residual = 0.0;
    int iterations = 0;
};

/// Self-consistent minimization of the density-matrix functional
///   E[gamma] = Tr[H_0 gamma] + a int rho^2
/// over unit-trace gamma, exploiting the angular decomposition: per
/// iteration the linearized sector ground states are recomputed, the
/// occupations solve a convex subproblem on the simplex, and the density
/// update takes the exact line-search step. j_max < 0 selects the default
/// sector window from the closed-form energy estimates.
DmState minimize_dm(const GpParameters& params, const TrapPotential& trap, const RadialGrid& grid,
                    int j_max = -1, const DmOptions& opts = {});

/// Same engine restricted to a fixed sector support (used by the
/// multi-component solver).
DmState minimize_dm_support(const GpParameters& params, const TrapPotential& trap,
                            const RadialGrid& grid, const std::vector<int>& support,
                            const DmOptions& opts = {});

int dm_rank(const DmState& state, double tol = 1e-8);

int default_j_max(const GpParameters& params, const TrapPotential& trap);

struct DmGpComparison {
    double e_dm = 0.0;
    double e_gp = 0.0;
    bool strict_gap = false;
    double gap = 0.0;  // e_gp - e_dm
};

/// Runs both solvers at the same parameters and compares ground energies.
/// grid2d_n <= 0 picks a default resolution; tol decides strictness.
DmGpComparison compare_dm_gp(const GpParameters& params, const TrapPotential& trap,
                             const RadialGrid& grid, int grid2d_n = 0, double tol = 1e-6);

/// Rotation window of the small-omega equivalence criterion:
/// omega <= max over omega_tilde of omega_tilde^2 / (4 (C + mu_dm)).
bool gp_dm_equivalent_small_omega(const TrapPotential& trap, double mu_dm, double omega);

}  // namespace gprotor
