#pragma once

#include "gprotor/model.hpp"

#include <unsupported/Eigen/FFT>

namespace gprotor {

/// Spectral workspace for one Grid2D; keep one instance per thread.
///
/// Forward/inverse transforms are unnormalized DFT / DFT-with-1/N^2.
/// First-derivative symbols zero the Nyquist mode so that the discrete
/// operators x*d_y - y*d_x stay exactly antisymmetric; the Laplacian
/// symbol keeps the Nyquist wavenumber.
class Spectral2D {
  public:
    explicit Spectral2D(const Grid2D& grid);

    const Grid2D& grid() const { return grid_; }

    void forward(MatrixXcd& a);
    void inverse(MatrixXcd& a);

    MatrixXcd laplacian(const MatrixXcd& a);
    /// dx, dy resized and overwritten.
    void derivatives(const MatrixXcd& a, MatrixXcd& dx, MatrixXcd& dy);
    /// (-Laplacian + c)^{-1} rhs, c > 0.
    MatrixXcd solve_helmholtz(const MatrixXcd& rhs, double c);

    /// Kinetic energy sum_k k^2 |a_k|^2 in grid normalization,
    /// equal to h^2 * sum |grad a|^2 for band-limited a.
    double kinetic_energy(const MatrixXcd& a);

    const ArrayXd& k_deriv() const { return k_deriv_; }
    const ArrayXd& k2() const { return k2_; }

  private:
    void fft_columns(MatrixXcd& a, bool fwd);

    Grid2D grid_;
    ArrayXd k_deriv_;  // derivative wavenumbers, Nyquist zeroed
    ArrayXd k2_;       // squared wavenumbers incl. Nyquist
    Eigen::FFT<double> fft_;
};

/// Trigonometric interpolation onto a grid refined by an integer factor
/// (zero-padding in Fourier space). Values at original nodes are preserved.
MatrixXcd upsample_trig(const Field2D& phi, int factor);

}  // namespace gprotor
