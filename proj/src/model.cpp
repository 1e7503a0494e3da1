#include "gprotor/model.hpp"
#include "gprotor/fft2.hpp"

#include <algorithm>
#include <cmath>

namespace gprotor {

TrapPotential TrapPotential::harmonic() {
    TrapPotential t;
    t.kind_ = TrapKind::Harmonic;
    t.nu_ = 2.0;
    t.omega_c_ = 2.0;
    t.growth_ = {0.0, 1.0, 2.0};
    return t;
}

TrapPotential TrapPotential::homogeneous(double nu) {
    if (nu < 2.0) throw std::invalid_argument("homogeneous trap requires exponent >= 2");
    TrapPotential t;
    t.kind_ = TrapKind::Homogeneous;
    t.nu_ = nu;
    t.omega_c_ = (nu == 2.0) ? 2.0 : std::numeric_limits<double>::infinity();
    t.growth_ = {0.0, 1.0, nu};
    return t;
}

TrapPotential TrapPotential::tabulated(ArrayXd r, ArrayXd v) {
    if (r.size() != v.size() || r.size() < 2)
        throw std::invalid_argument("tabulated trap needs matching sample arrays");
    for (int i = 1; i < r.size(); ++i)
        if (r[i] <= r[i - 1]) throw std::invalid_argument("tabulated radii must increase");
    const double vmin = v.minCoeff();
    if (vmin < 0.0) throw std::invalid_argument("trap potential must be nonnegative");

    TrapPotential t;
    t.kind_ = TrapKind::Tabulated;
    t.tab_r_ = std::move(r);
    t.tab_v_ = std::move(v) - vmin;  // enforce inf V = 0 on the samples

    // omega_c from the tail: the quadratic r^2 w^2/4 must stay below V
    // near the edge of the sampled range. This is only an estimate --
    // samples cannot decide behavior beyond r_max.
    const int n = static_cast<int>(t.tab_r_.size());
    const int tail = std::max(2, n / 5);
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = n - tail; i < n; ++i)
        if (t.tab_r_[i] > 0.0) ratio = std::min(ratio, t.tab_v_[i] / (t.tab_r_[i] * t.tab_r_[i]));
    t.omega_c_ = std::isfinite(ratio) ? 2.0 * std::sqrt(std::max(0.0, ratio)) : 0.0;
    t.omega_c_estimated_ = true;

    // Growth data: slope fit on the tail, then constants that make the
    // bound hold at every sample.
    double s = 2.0;
    {
        const double r0 = t.tab_r_[n - tail], r1 = t.tab_r_[n - 1];
        const double v0 = t.tab_v_[n - tail], v1 = t.tab_v_[n - 1];
        if (r0 > 0.0 && v0 > 0.0 && v1 > 0.0 && r1 > r0)
            s = std::clamp(std::log(v1 / v0) / std::log(r1 / r0), 2.0, 64.0);
    }
    double c2 = 0.0;
    for (int i = 0; i < n; ++i)
        if (t.tab_r_[i] >= 1.0) c2 = std::max(c2, t.tab_v_[i] / std::pow(t.tab_r_[i], s));
    double c1 = 0.0;
    for (int i = 0; i < n; ++i)
        if (t.tab_r_[i] < 1.0) c1 = std::max(c1, t.tab_v_[i]);
    t.growth_ = {c1, std::max(c2, 1e-300), s};
    return t;
}

double TrapPotential::operator()(double r) const {
    if (r < 0.0) throw std::domain_error("potential evaluated at negative radius");
    switch (kind_) {
        case TrapKind::Harmonic:
            return r * r;
        case TrapKind::Homogeneous:
            return std::pow(r, nu_);
        case TrapKind::Tabulated: {
            const int n = static_cast<int>(tab_r_.size());
            if (r < tab_r_[0] || r > tab_r_[n - 1])
                throw std::domain_error("tabulated potential queried outside sample range");
            const double* beg = tab_r_.data();
            int j = static_cast<int>(std::upper_bound(beg, beg + n, r) - beg) - 1;
            j = std::clamp(j, 0, n - 2);
            const double t = (r - tab_r_[j]) / (tab_r_[j + 1] - tab_r_[j]);
            return (1.0 - t) * tab_v_[j] + t * tab_v_[j + 1];
        }
    }
    return 0.0;
}

double TrapPotential::derivative(double r) const {
    switch (kind_) {
        case TrapKind::Harmonic:
            return 2.0 * r;
        case TrapKind::Homogeneous:
            return nu_ * std::pow(r, nu_ - 1.0);
        case TrapKind::Tabulated: {
            const int n = static_cast<int>(tab_r_.size());
            if (r < tab_r_[0] || r > tab_r_[n - 1])
                throw std::domain_error("tabulated potential queried outside sample range");
            const double* beg = tab_r_.data();
            int j = static_cast<int>(std::upper_bound(beg, beg + n, r) - beg) - 1;
            j = std::clamp(j, 0, n - 2);
            return (tab_v_[j + 1] - tab_v_[j]) / (tab_r_[j + 1] - tab_r_[j]);
        }
    }
    return 0.0;
}

double TrapPotential::c_tilde(double omega_tilde) const {
    if (omega_tilde < 0.0) throw std::domain_error("c_tilde requires omega_tilde >= 0");
    if (omega_tilde >= omega_c_ && !omega_c_estimated_)
        throw std::domain_error("c_tilde requires omega_tilde < omega_c");
    switch (kind_) {
        case TrapKind::Harmonic:
            return 0.0;
        case TrapKind::Homogeneous: {
            if (nu_ == 2.0) return 0.0;
            // max over r of w^2 r^2/4 - r^nu, attained at t* in t = r^2.
            const double w2 = omega_tilde * omega_tilde;
            if (w2 == 0.0) return 0.0;
            const double t_star = std::pow(w2 / (2.0 * nu_), 2.0 / (nu_ - 2.0));
            return std::max(0.0, 0.25 * w2 * t_star - std::pow(t_star, nu_ / 2.0));
        }
        case TrapKind::Tabulated: {
            double c = 0.0;
            for (int i = 0; i < tab_r_.size(); ++i)
                c = std::max(c, 0.25 * omega_tilde * omega_tilde * tab_r_[i] * tab_r_[i] - tab_v_[i]);
            return c;
        }
    }
    return 0.0;
}

void TrapPotential::check_on_radii(const ArrayXd& radii) const {
    double vmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < radii.size(); ++i) {
        const double v = (*this)(radii[i]);
        if (v < 0.0) throw std::runtime_error("trap invariant violated: V(r) < 0");
        vmin = std::min(vmin, v);
        const GrowthBound gb = growth_;
        if (v > gb.c1 + gb.c2 * std::pow(radii[i], gb.s) + 1e-9 * (1.0 + v))
            throw std::runtime_error("trap invariant violated: growth bound");
    }
    if (vmin > 1e-6 && (*this)(0.0) > 1e-6)
        throw std::runtime_error("trap invariant violated: inf V != 0 on grid");
    // quadratic lower bound for a few omega_tilde below omega_c
    const double wc = std::min(omega_c_, 64.0);
    for (double frac : {0.25, 0.5, 0.9}) {
        const double w = frac * wc;
        if (!(w > 0.0) || w >= omega_c_) continue;
        const double c = c_tilde(w);
        for (int i = 0; i < radii.size(); ++i) {
            const double v = (*this)(radii[i]);
            if (v < 0.25 * w * w * radii[i] * radii[i] - c - 1e-9 * (1.0 + std::abs(v)))
                throw std::runtime_error("trap invariant violated: quadratic lower bound");
        }
    }
}

double evaluate_potential(const TrapPotential& v, double r) { return v(r); }

void GpParameters::validate(const TrapPotential& trap) const {
    if (a < 0.0) throw std::invalid_argument("coupling a must be nonnegative");
    if (omega < 0.0) throw std::invalid_argument("omega must be nonnegative");
    if (omega >= trap.omega_c())
        throw std::invalid_argument("omega must be below the trap's critical frequency");
}

RadialGrid RadialGrid::make(int n_cells, double r_max) {
    if (n_cells < 2 || r_max <= 0.0) throw std::invalid_argument("bad radial grid");
    RadialGrid g;
    g.r_max = r_max;
    g.h = r_max / n_cells;
    g.r.resize(n_cells);
    for (int i = 0; i < n_cells; ++i) g.r[i] = (i + 0.5) * g.h;
    // midpoint rule with boundary-corrected (Gregory-type) end weights
    ArrayXd c = ArrayXd::Ones(n_cells);
    if (n_cells >= 6) {
        const double d0 = 1.0 / 12.0, d1 = -1.0 / 8.0, d2 = 1.0 / 24.0;
        c[0] += d0;
        c[1] += d1;
        c[2] += d2;
        c[n_cells - 1] += d0;
        c[n_cells - 2] += d1;
        c[n_cells - 3] += d2;
    }
    g.w1d = c * g.h;
    g.w = 2.0 * kPi * g.r * g.w1d;
    return g;
}

double quadrature_radial(const ArrayXd& values, const RadialGrid& grid) {
    if (values.size() != grid.r.size())
        throw std::invalid_argument("radial state and grid have different sizes");
    return (values * grid.w).sum();
}

double quadrature_radial(const RadialState& g, const RadialGrid& grid) {
    return quadrature_radial(g.values, grid);
}

Grid2D Grid2D::make(int n, double extent) {
    if (n < 4 || n % 2 != 0 || extent <= 0.0) throw std::invalid_argument("bad 2d grid");
    Grid2D g;
    g.n = n;
    g.extent = extent;
    g.h = 2.0 * extent / n;
    g.coord.resize(n);
    for (int i = 0; i < n; ++i) g.coord[i] = -extent + i * g.h;
    return g;
}

double Field2D::norm_sq() const { return values.squaredNorm() * grid.cell_area(); }

void Field2D::normalize() {
    const double n2 = norm_sq();
    if (!(n2 > 0.0)) throw std::runtime_error("cannot normalize a zero field");
    values /= std::sqrt(n2);
}

namespace {

inline std::complex<double> catmull_rom(const std::complex<double>& p0,
                                        const std::complex<double>& p1,
                                        const std::complex<double>& p2,
                                        const std::complex<double>& p3, double t) {
    return 0.5 * (2.0 * p1 + t * ((p2 - p0) +
                                  t * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                                       t * (3.0 * (p1 - p2) + (p3 - p0)))));
}

}  // namespace

ArrayXd angular_spectrum(const Field2D& phi, int m_max) {
    if (m_max < 0) throw std::invalid_argument("m_max must be nonnegative");
    const int n = phi.grid.n;

    int factor = 1;
    while (n * factor < 2048 && factor < 16) factor *= 2;
    const MatrixXcd fine = upsample_trig(phi, factor);
    const int nf = n * factor;
    const double hf = 2.0 * phi.grid.extent / nf;
    const double L = phi.grid.extent;

    int n_theta = 64;
    while (n_theta < 8 * (m_max + 1)) n_theta *= 2;
    const double r_cut = L - 2.0 * phi.grid.h;
    const double dr = phi.grid.h / 2.0;
    const int n_rings = std::max(1, static_cast<int>(r_cut / dr));

    // azimuthal band limit at the outermost ring; n_theta stays a power of 2
    while (n_theta < 2.0 * kPi * r_cut / phi.grid.h && n_theta < 4096) n_theta *= 2;

    auto sample = [&](double x, double y) {
        const double u = (x + L) / hf, v = (y + L) / hf;
        const int i1 = static_cast<int>(std::floor(u)), j1 = static_cast<int>(std::floor(v));
        const double tu = u - i1, tv = v - j1;
        auto wrap = [&](int i) { return ((i % nf) + nf) % nf; };
        std::complex<double> col[4];
        for (int dj = -1; dj <= 2; ++dj) {
            const int j = wrap(j1 + dj);
            col[dj + 1] = catmull_rom(fine(wrap(i1 - 1), j), fine(wrap(i1), j),
                                      fine(wrap(i1 + 1), j), fine(wrap(i1 + 2), j), tu);
        }
        return catmull_rom(col[0], col[1], col[2], col[3], tv);
    };

    Eigen::FFT<double> fft;
    Eigen::VectorXcd ring(n_theta), hat(n_theta);
    ArrayXd p = ArrayXd::Zero(2 * m_max + 1);
    for (int k = 0; k < n_rings; ++k) {
        const double r = (k + 0.5) * dr;
        for (int j = 0; j < n_theta; ++j) {
            const double th = 2.0 * kPi * j / n_theta;
            ring[j] = sample(r * std::cos(th), r * std::sin(th));
        }
        fft.fwd(hat, ring);
        const double ring_w = 2.0 * kPi * r * dr / (static_cast<double>(n_theta) * n_theta);
        for (int m = -m_max; m <= m_max; ++m) {
            const int bin = ((m % n_theta) + n_theta) % n_theta;
            p[m + m_max] += ring_w * std::norm(hat[bin]);
        }
    }
    return p;
}

}  // namespace gprotor
