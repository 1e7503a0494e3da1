#pragma once

#include "gprotor/dm_solver.hpp"
#include "gprotor/solver2d.hpp"

#include <string>
#include <vector>

namespace gprotor {

struct MultiOptions {
    double tol_energy = 1e-11;
    double tol_residual = 1e-7;
    int max_iterations = 40000;
    int restarts = 4;
    std::uint64_t seed = 11;
    int jobs = 0;
};

/// n_c coupled condensate components under one total-norm constraint; the
/// quartic term couples them through the total density.
struct MultiState {
    std::vector<Field2D> components;
    double energy = 0.0;
    double total_norm = 0.0;
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
};

/// Joint descent on (phi_1, ..., phi_{n_c}). Optional initial components
/// override the built-in restart families (vortex stacks and noise).
MultiState minimize_multi(int n_c, const GpParameters& params, const TrapPotential& trap,
                          const Grid2D& grid, const MultiOptions& opts = {},
                          const std::vector<Field2D>* initial = nullptr);

/// Sector-restricted variant: each component is an angular-momentum
/// eigenstate, so the problem reduces to the density-matrix engine on a
/// fixed support. Exact for n_c >= rank of the DM minimizer.
DmState minimize_multi_sector(int n_c, const GpParameters& params, const TrapPotential& trap,
                              const RadialGrid& grid, const DmOptions& opts = {});

double multi_energy(const std::vector<Field2D>& components, const GpParameters& params,
                    const TrapPotential& trap);

/// L1 distance between component densities (no normalization applied).
double density_l1_distance(const Field2D& a, const Field2D& b);

enum class TrichotomyCase { EqualsDm, AboveDm, BelowGp };

struct TrichotomyRow {
    int n_c = 0;
    double energy = 0.0;
    TrichotomyCase label = TrichotomyCase::EqualsDm;
    bool consistent = true;
    std::string note;
};

struct TrichotomyReport {
    double e_dm = 0.0;
    int n_dm = 0;
    double e_gp = 0.0;
    std::vector<TrichotomyRow> rows;
    double pair_density_l1 = 0.0;  // from the two-component 2D solve
    bool all_consistent = true;
};

/// Classifies E^DM <= E_{n_c} <= E^GP across component counts: sector mode
/// for every n_c, plus a genuine two-component 2D solve seeded with a
/// minimizer and its 90-degree rotation.
TrichotomyReport verify_trichotomy(const GpParameters& params, const TrapPotential& trap,
                                   const RadialGrid& radial_grid, const Grid2D& grid2d,
                                   const Solve2DOptions& opts2d = {},
                                   const MultiOptions& mopts = {});

}  // namespace gprotor
