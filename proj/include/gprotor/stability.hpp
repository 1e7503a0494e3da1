#pragma once

#include "gprotor/banded.hpp"
#include "gprotor/radial_form.hpp"
#include "gprotor/radial_solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gprotor {

/// Second-variation form around an n-vortex, restricted to angular channel
/// m >= 0. In the symmetric/antisymmetric basis
///   w_m = (A+B) e^{i(n-m)phi} + (A-B) e^{i(n+m)phi}
/// the form reads  Q(w_m) = 2 <(A,B)| H |(A,B)>  with
///   H = [ -Lap_r + (n^2+m^2)/r^2 + V - n W - mu + 6 a f^2 ,  m W - 2nm/r^2
///         m W - 2nm/r^2 , -Lap_r + (n^2+m^2)/r^2 + V - n W - mu + 2 a f^2 ].
/// For m = 0 the blocks decouple into real (6af^2) and imaginary (2af^2)
/// scalar operators; the imaginary one annihilates f (phase mode).
class ChannelOperator {
  public:
    ChannelOperator(const VortexProfile& profile, int m, const GpParameters& params);

    int m() const { return m_; }
    /// Q(w_m) for a pair (A, B) in the symmetric basis above.
    double q_value(const ArrayXd& a_part, const ArrayXd& b_part) const;
    /// |w_m|^2 for the same pair.
    double norm_sq(const ArrayXd& a_part, const ArrayXd& b_part) const;
    /// Convert from the exponential basis w = Ae e^{i(n-m)phi} + Be e^{i(n+m)phi}.
    static void from_exponential(const ArrayXd& a_exp, const ArrayXd& b_exp, ArrayXd& a_part,
                                 ArrayXd& b_part);

    /// Interleaved (A_0,B_0,A_1,...) standardized block for eigenvalue work;
    /// its eigenvalues are those of Q relative to the L^2 norm of w.
    const BandedSym& standardized_block() const { return block_std_; }
    /// Scalar standardized operators for m = 0 (real / imaginary parts).
    const BandedSym& scalar_real() const;
    const BandedSym& scalar_imag() const;
    const ArrayXd& mass() const { return mass_; }

    const RadialForm& form_a() const { return form_a_; }
    const RadialForm& form_b() const { return form_b_; }

  private:
    int m_ = 0;
    double n_ = 0.0;
    RadialForm form_a_, form_b_;
    ArrayXd coupling_;  // (m W - 2nm/r^2) * disk weight
    ArrayXd mass_;      // disk weights
    BandedSym block_std_{1, 1};
    std::optional<BandedSym> scalar_real_, scalar_imag_;
};

/// Lowest eigenvalue of a standardized operator on the orthogonal complement
/// of the deflation vectors (empty: unconstrained, solved by bisection).
double lowest_eigenvalue(const BandedSym& op_std, const std::vector<Eigen::VectorXd>& deflate,
                         double tol = 1e-10);

enum class StabilityVerdict { Stable, Unstable, Marginal };

struct ChannelResult {
    int m = 0;
    double lambda_min = 0.0;  // on the complement of phi within the channel
    double phase_mode = 0.0;  // m = 0 only: eigenvalue carrying the i*phi mode
    bool has_phase_mode = false;
};

struct Certificate {
    std::string name;
    double q_value = 0.0;   // raw Q(w)
    double rayleigh = 0.0;  // Q(w)/|w|^2
    bool applicable = true;
    std::string note;
};

struct StabilityOptions {
    int m_max = -1;                //< default max(2n, 16)
    double tol = 1e-7;             //< instability threshold on Rayleigh values
    double zero_band_factor = 10.0;  //< symmetry-mode band, in units of h^2
    bool concurrent_channels = true;
};

struct StabilityReport {
    double n = 0.0;
    GpParameters params;
    std::vector<ChannelResult> channels;
    std::vector<Certificate> certificates;
    double q_phase = 0.0;     // Q(i phi): Euler-Lagrange defect, O(h^2)
    double q_rotation = 0.0;  // Q(d phi/d theta) = n^2 Q(i phi)
    double zero_band = 0.0;
    StabilityVerdict verdict = StabilityVerdict::Stable;
};

/// Q(i phi) evaluated through the channel assembly; vanishes for exact
/// stationary states and shrinks at least quadratically under refinement.
double q_form_phase_mode(const VortexProfile& profile, const GpParameters& params);

/// Q(w) for a 2D field w around the lifted vortex; requires a stationary
/// profile (throws otherwise).
double q_form(const Field2D& w, const VortexProfile& profile, const GpParameters& params);

/// Gaussian ground-state trial (harmonic trap, n >= 1):
/// Q <= n(omega - 2) + a/pi, negative for a < pi n (2 - omega).
Certificate certificate_small_a(const VortexProfile& profile, const GpParameters& params);

/// Localized bump w = c_n mu^{1/2} w1(c_n mu^{1/2} r) in the radial channel;
/// negative values certify instability of large-n vortices.
Certificate certificate_large_n(const VortexProfile& profile, const GpParameters& params);

/// Trial A = f'/r^{d-1}, B = n f/r^d in channel m = d, for traps with
/// (r (V/r^{2(d-1)})')' <= 0. Negative values certify instability; d = 1
/// gives Q(d phi/dx) and is nonnegative when (r V')' >= 0.
Certificate certificate_d_mode(const VortexProfile& profile, int d, const GpParameters& params);

StabilityReport analyze_stability(const VortexProfile& profile, const GpParameters& params,
                                  const StabilityOptions& opts = {});

/// Lift a radial profile to the 2D grid as f(r) e^{i n theta}.
Field2D lift_vortex(const VortexProfile& profile, const Grid2D& grid);

/// 4th-order radial derivative with parity ghosts at r = 0.
ArrayXd radial_derivative(const ArrayXd& values, const RadialGrid& grid, int parity);

}  // namespace gprotor
