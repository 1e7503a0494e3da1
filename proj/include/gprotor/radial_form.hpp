#pragma once

#include "gprotor/banded.hpp"
#include "gprotor/model.hpp"

namespace gprotor {

/// Discrete quadratic form for radial functions u on a cell-centered grid:
///
///   q(u) = 2*pi * integral (u'^2 + extra(r) u^2) r^p dr,
///   m(u) = 2*pi * integral u^2 r^p dr,
///
/// with a fourth-order staggered derivative. `parity` fixes the ghost cell
/// across r = 0 (+1 even, -1 odd, 0 zero-extension); the outer boundary is
/// zero-extended, which is exact for decaying states.
///
/// quad() sums the squared face derivatives directly, so it carries no
/// 1/h^2 cancellation noise; k holds the equivalent assembled matrix for
/// operator applications and eigenvalue work.
struct RadialForm {
    BandedSym k;   // bandwidth 3; includes the extra(r) diagonal
    ArrayXd mass;  // diagonal metric
    ArrayXd extra;
    ArrayXd face_w;  // kinetic face weights (size n-1): 2*pi*h*r_face^p
    double h = 0.0;
    int parity = +1;

    double quad(const ArrayXd& u) const;
    double kinetic(const ArrayXd& u) const;
    double mass_sq(const ArrayXd& u) const;
    /// Standard-form matrix M^{-1/2} K M^{-1/2} for eigenvalue work.
    BandedSym standardized() const;
};

RadialForm make_radial_form(const RadialGrid& grid, double measure_power, int parity,
                            const ArrayXd& extra_diag);

}  // namespace gprotor
