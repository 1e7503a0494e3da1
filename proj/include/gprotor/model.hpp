#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace gprotor {

using Eigen::ArrayXd;
using Eigen::ArrayXXd;
using Eigen::MatrixXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kE = 2.71828182845904523536;

/// Polynomial growth data for a trap: V(r) <= c1 + c2 * r^s with 2 <= s.
struct GrowthBound {
    double c1 = 0.0;
    double c2 = 1.0;
    double s = 2.0;
};

enum class TrapKind { Harmonic, Homogeneous, Tabulated };

/// Radial confining potential with V >= 0, inf V = 0.
///
/// Every trap knows its critical rotation frequency omega_c (largest
/// angular velocity below which V(r) - w^2 r^2/4 stays bounded below)
/// and the constant C_w in V(r) >= w^2 r^2/4 - C_w for w < omega_c.
class TrapPotential {
  public:
    static TrapPotential harmonic();
    /// V(r) = r^nu, nu >= 2.
    static TrapPotential homogeneous(double nu);
    /// Piecewise-linear interpolation of samples; queries outside the
    /// sampled range throw. omega_c is then a tail estimate, flagged by
    /// omega_c_is_estimate().
    static TrapPotential tabulated(ArrayXd r, ArrayXd v);

    TrapKind kind() const { return kind_; }
    double exponent() const { return nu_; }

    double operator()(double r) const;
    double derivative(double r) const;

    double omega_c() const { return omega_c_; }
    bool omega_c_is_estimate() const { return omega_c_estimated_; }
    /// C_w in the quadratic lower bound, for 0 <= w < omega_c.
    double c_tilde(double omega_tilde) const;
    GrowthBound growth() const { return growth_; }

    /// Executable invariant checks sampled on grid radii; throws with a
    /// description on the first violation.
    void check_on_radii(const ArrayXd& radii) const;

  private:
    TrapPotential() = default;

    TrapKind kind_ = TrapKind::Harmonic;
    double nu_ = 2.0;
    double omega_c_ = 2.0;
    bool omega_c_estimated_ = false;
    GrowthBound growth_;
    ArrayXd tab_r_, tab_v_;
};

double evaluate_potential(const TrapPotential& v, double r);

/// Coupling strength a >= 0 and angular velocity 0 <= omega < omega_c.
struct GpParameters {
    double a = 0.0;
    double omega = 0.0;

    void validate(const TrapPotential& trap) const;
};

/// Uniform cell-centered radial grid on [0, r_max].
///
/// Nodes sit at r_i = (i + 1/2) h, so 1/r^2 terms are always finite.
/// Weights integrate the disk measure, 2*pi * integral(. r dr), with
/// boundary-corrected midpoint coefficients: exact for constants and
/// for r^2, O(h^4) for smooth integrands.
struct RadialGrid {
    ArrayXd r;    // cell centers
    ArrayXd w;    // disk-measure weights 2*pi*r_i*h*(1+delta_i), all > 0
    ArrayXd w1d;  // line weights h*(1+delta_i) for integral over [0, r_max]
    double r_max = 0.0;
    double h = 0.0;

    static RadialGrid make(int n_cells, double r_max);
    int size() const { return static_cast<int>(r.size()); }
};

/// Real radial samples on a RadialGrid.
struct RadialState {
    ArrayXd values;
};

/// 2*pi * integral g(r) r dr over the disk of radius grid.r_max.
double quadrature_radial(const RadialState& g, const RadialGrid& grid);
double quadrature_radial(const ArrayXd& values, const RadialGrid& grid);

/// Square uniform grid centered at the origin, n x n nodes,
/// x_i = -extent + i*h with h = 2*extent/n (periodic-box convention).
struct Grid2D {
    int n = 0;
    double extent = 0.0;
    double h = 0.0;
    ArrayXd coord;

    static Grid2D make(int n, double extent);
    double cell_area() const { return h * h; }
};

/// Complex condensate field phi(x_i, y_j) = values(i, j).
struct Field2D {
    Grid2D grid;
    MatrixXcd values;

    double norm_sq() const;
    void normalize();
};

/// Angular-channel weights p_m = |P_m phi|^2 for m in [-m_max, m_max].
///
/// P_m projects onto angular momentum m; computed by trigonometric
/// upsampling of the field, bicubic polar resampling and an azimuthal
/// FFT on circles. Sum over m is <= 1, with deficit only from channels
/// beyond m_max and from discretization.
ArrayXd angular_spectrum(const Field2D& phi, int m_max);

}  // namespace gprotor
