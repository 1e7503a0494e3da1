#include "gprotor/fft2.hpp"

namespace gprotor {

Spectral2D::Spectral2D(const Grid2D& grid) : grid_(grid) {
    const int n = grid_.n;
    const double dk = 2.0 * kPi / (grid_.h * n);
    k_deriv_.resize(n);
    k2_.resize(n);
    for (int j = 0; j < n; ++j) {
        const int jj = (j <= n / 2) ? j : j - n;
        k2_[j] = (dk * jj) * (dk * jj);
        k_deriv_[j] = (2 * j == n) ? 0.0 : dk * jj;
    }
}

void Spectral2D::fft_columns(MatrixXcd& a, bool fwd) {
    const int n = static_cast<int>(a.rows());
    Eigen::VectorXcd in(n), out(n);
    for (int c = 0; c < a.cols(); ++c) {
        in = a.col(c);
        if (fwd)
            fft_.fwd(out, in);
        else
            fft_.inv(out, in);
        a.col(c) = out;
    }
}

void Spectral2D::forward(MatrixXcd& a) {
    fft_columns(a, true);
    a.transposeInPlace();
    fft_columns(a, true);
    a.transposeInPlace();
}

void Spectral2D::inverse(MatrixXcd& a) {
    fft_columns(a, false);
    a.transposeInPlace();
    fft_columns(a, false);
    a.transposeInPlace();
}

MatrixXcd Spectral2D::laplacian(const MatrixXcd& a) {
    MatrixXcd hat = a;
    forward(hat);
    const int n = grid_.n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) hat(i, j) *= -(k2_[i] + k2_[j]);
    inverse(hat);
    return hat;
}

void Spectral2D::derivatives(const MatrixXcd& a, MatrixXcd& dx, MatrixXcd& dy) {
    MatrixXcd hat = a;
    forward(hat);
    const int n = grid_.n;
    dx.resize(n, n);
    dy.resize(n, n);
    const std::complex<double> iu(0.0, 1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            dx(i, j) = iu * k_deriv_[i] * hat(i, j);
            dy(i, j) = iu * k_deriv_[j] * hat(i, j);
        }
    inverse(dx);
    inverse(dy);
}

MatrixXcd Spectral2D::solve_helmholtz(const MatrixXcd& rhs, double c) {
    MatrixXcd hat = rhs;
    forward(hat);
    const int n = grid_.n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) hat(i, j) /= k2_[i] + k2_[j] + c;
    inverse(hat);
    return hat;
}

double Spectral2D::kinetic_energy(const MatrixXcd& a) {
    MatrixXcd hat = a;
    forward(hat);
    const int n = grid_.n;
    double s = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) s += (k2_[i] + k2_[j]) * std::norm(hat(i, j));
    // Parseval: sum_x |.|^2 = (1/N^2) sum_k |hat|^2; include cell area.
    return s * grid_.cell_area() / (static_cast<double>(n) * n);
}

MatrixXcd upsample_trig(const Field2D& phi, int factor) {
    if (factor <= 1) return phi.values;
    const int n = phi.grid.n;
    const int nf = n * factor;
    Spectral2D sp(phi.grid);
    MatrixXcd hat = phi.values;
    sp.forward(hat);
    // Split the Nyquist row/column evenly so the padded spectrum stays
    // Hermitian-consistent for real inputs.
    MatrixXcd big = MatrixXcd::Zero(nf, nf);
    const int half = n / 2;
    auto map_index = [&](int j) { return (j <= half) ? j : nf - (n - j); };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            std::complex<double> v = hat(i, j);
            double scale = 1.0;
            if (2 * i == n) scale *= 0.5;
            if (2 * j == n) scale *= 0.5;
            const int I = map_index(i), J = map_index(j);
            big(I, J) += scale * v;
            if (2 * i == n) big(nf - half, J) += scale * v;
            if (2 * j == n) big(I, nf - half) += scale * v;
            if (2 * i == n && 2 * j == n) big(nf - half, nf - half) += scale * v;
        }
    }
    Grid2D fine = Grid2D::make(nf, phi.grid.extent);
    Spectral2D spf(fine);
    spf.inverse(big);
    big *= static_cast<double>(factor) * factor;
    return big;
}

}  // namespace gprotor
