#include "gprotor/stability.hpp"
#include "gprotor/bounds.hpp"
#include "gprotor/fft2.hpp"

#include <cmath>
#include <future>

namespace gprotor {

namespace {

long integer_charge(double n) {
    const long ni = std::llround(n);
    if (std::abs(n - ni) > 1e-9)
        throw std::invalid_argument("channel analysis requires an integer vortex charge");
    return ni;
}

int charge_parity(long k) { return (k % 2 == 0) ? +1 : -1; }

/// Catmull-Rom interpolation of cell-centered radial samples, with parity
/// ghosts across r = 0 and zero extension beyond r_max.
class RadialInterp {
  public:
    RadialInterp(const ArrayXd& values, const RadialGrid& grid, int parity)
        : v_(values), h_(grid.h), n_(grid.size()), parity_(parity) {}

    double operator()(double r) const {
        const double u = r / h_ - 0.5;
        const int i1 = static_cast<int>(std::floor(u));
        const double t = u - i1;
        auto cell = [&](int i) -> double {
            if (i >= n_) return 0.0;
            if (i < 0) return parity_ * v_[-i - 1];
            return v_[i];
        };
        const double p0 = cell(i1 - 1), p1 = cell(i1), p2 = cell(i1 + 1), p3 = cell(i1 + 2);
        return 0.5 * (2.0 * p1 +
                      t * ((p2 - p0) + t * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                                            t * (3.0 * (p1 - p2) + (p3 - p0)))));
    }

  private:
    const ArrayXd& v_;
    double h_;
    int n_;
    int parity_;
};

}  // namespace

ArrayXd radial_derivative(const ArrayXd& values, const RadialGrid& grid, int parity) {
    const int n = grid.size();
    ArrayXd d(n);
    auto cell = [&](int i) -> double {
        if (i >= n) return 0.0;
        if (i < 0) return (parity == 0) ? 0.0 : parity * values[-i - 1];
        return values[i];
    };
    const double h = grid.h;
    for (int i = 0; i < n; ++i)
        d[i] = (8.0 * (cell(i + 1) - cell(i - 1)) - (cell(i + 2) - cell(i - 2))) / (12.0 * h);
    return d;
}

ChannelOperator::ChannelOperator(const VortexProfile& profile, int m, const GpParameters& params)
    : m_(m), n_(profile.n) {
    if (m < 0) throw std::invalid_argument("channel index must be nonnegative");
    const long ni = integer_charge(profile.n);
    const RadialGrid& grid = profile.grid;
    const int nn = grid.size();

    ArrayXd f2 = profile.f.square();
    ArrayXd diag_common(nn);
    for (int i = 0; i < nn; ++i) {
        const double r = grid.r[i];
        diag_common[i] =
            (n_ * n_ + static_cast<double>(m) * m) / (r * r) + profile.trap(r) - profile.mu_tilde;
    }
    const int parity = charge_parity(ni + m);
    form_a_ = make_radial_form(grid, 1.0, parity, diag_common + 6.0 * params.a * f2);
    form_b_ = make_radial_form(grid, 1.0, parity, diag_common + 2.0 * params.a * f2);
    mass_ = grid.w;
    coupling_.resize(nn);
    for (int i = 0; i < nn; ++i) {
        const double r = grid.r[i];
        coupling_[i] = (m * params.omega - 2.0 * n_ * m / (r * r)) * grid.w[i];
    }

    if (m_ == 0) {
        scalar_real_ = form_a_.standardized();
        scalar_imag_ = form_b_.standardized();
        block_std_ = BandedSym(1, 0);  // unused for m = 0
        return;
    }

    // interleaved 2x2 block, standardized by the diagonal disk metric
    const int bw = form_a_.k.bw();
    BandedSym blk(2 * nn, 2 * bw + 1);
    ArrayXd inv_root = mass_.sqrt().inverse();
    for (int j = 0; j < nn; ++j) {
        for (int d = 0; d <= std::min(bw, nn - 1 - j); ++d) {
            const double sa = form_a_.k.get(j + d, j) * inv_root[j + d] * inv_root[j];
            const double sb = form_b_.k.get(j + d, j) * inv_root[j + d] * inv_root[j];
            blk.add_sym(2 * (j + d), 2 * j, sa);
            blk.add_sym(2 * (j + d) + 1, 2 * j + 1, sb);
        }
        blk.add_sym(2 * j + 1, 2 * j, coupling_[j] / mass_[j]);
    }
    block_std_ = std::move(blk);
}

const BandedSym& ChannelOperator::scalar_real() const {
    if (!scalar_real_) throw std::logic_error("scalar blocks exist only for m = 0");
    return *scalar_real_;
}

const BandedSym& ChannelOperator::scalar_imag() const {
    if (!scalar_imag_) throw std::logic_error("scalar blocks exist only for m = 0");
    return *scalar_imag_;
}

void ChannelOperator::from_exponential(const ArrayXd& a_exp, const ArrayXd& b_exp,
                                       ArrayXd& a_part, ArrayXd& b_part) {
    a_part = 0.5 * (a_exp + b_exp);
    b_part = 0.5 * (a_exp - b_exp);
}

double ChannelOperator::q_value(const ArrayXd& a_part, const ArrayXd& b_part) const {
    if (m_ == 0) {
        // pair = (Re C, Im C) of w = C e^{i n phi}
        return form_a_.quad(a_part) + form_b_.quad(b_part);
    }
    return 2.0 * (form_a_.quad(a_part) + form_b_.quad(b_part)) +
           4.0 * (coupling_ * a_part * b_part).sum();
}

double ChannelOperator::norm_sq(const ArrayXd& a_part, const ArrayXd& b_part) const {
    const double base = (mass_ * (a_part.square() + b_part.square())).sum();
    return (m_ == 0) ? base : 2.0 * base;
}

double lowest_eigenvalue(const BandedSym& op_std, const std::vector<Eigen::VectorXd>& deflate,
                         double tol) {
    if (deflate.empty()) return eigenvalue_bisect(op_std, 0, tol);
    BandedSym shifted = op_std;
    const double sigma = std::max(1.0, 1.0 - op_std.gershgorin_lower());
    shifted.shift_diagonal(sigma);
    BandedCholesky precond(shifted);
    ConstrainedEigResult res = lowest_constrained(op_std, deflate, precond, 1200, tol);
    return res.value;
}

double q_form_phase_mode(const VortexProfile& profile, const GpParameters& params) {
    ChannelOperator op(profile, 0, params);
    const ArrayXd zero = ArrayXd::Zero(profile.grid.size());
    return op.q_value(zero, profile.f);
}

Field2D lift_vortex(const VortexProfile& profile, const Grid2D& grid) {
    const long ni = integer_charge(profile.n);
    RadialInterp g_interp(profile.g, profile.grid, +1);
    Field2D out{grid, MatrixXcd::Zero(grid.n, grid.n)};
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            const double x = grid.coord[i], y = grid.coord[j];
            const double r = std::hypot(x, y);
            if (r > profile.grid.r_max) continue;
            const double f = g_interp(r) * std::pow(r, profile.n);
            out.values(i, j) = std::polar(f, ni * std::atan2(y, x));
        }
    return out;
}

double q_form(const Field2D& w, const VortexProfile& profile, const GpParameters& params) {
    if (!profile.converged || profile.residual > 1e-5)
        throw std::invalid_argument("q_form requires a stationary vortex profile");
    const long ni = integer_charge(profile.n);
    const Grid2D& grid = w.grid;
    Spectral2D sp(grid);

    const double mu = profile.mu_tilde - profile.n * params.omega;
    double q = sp.kinetic_energy(w.values);

    MatrixXcd dx, dy;
    sp.derivatives(w.values, dx, dy);

    RadialInterp g_interp(profile.g, profile.grid, +1);
    const std::complex<double> iu(0.0, 1.0);
    double pot = 0.0, rot = 0.0, quart = 0.0, anomalous = 0.0;
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            const double x = grid.coord[i], y = grid.coord[j];
            const double r = std::hypot(x, y);
            const std::complex<double> wv = w.values(i, j);
            const double w2 = std::norm(wv);
            pot += (profile.trap(r) - mu) * w2;
            const std::complex<double> lw = -iu * (x * dy(i, j) - y * dx(i, j));
            rot += std::real(std::conj(wv) * lw);
            const double fr = (r <= profile.grid.r_max) ? g_interp(r) * std::pow(r, profile.n)
                                                        : 0.0;
            quart += fr * fr * w2;
            const std::complex<double> phase = std::polar(1.0, -2.0 * ni * std::atan2(y, x));
            anomalous += std::real(fr * fr * phase * wv * wv);
        }
    const double area = grid.cell_area();
    q += area * (pot - params.omega * rot + 4.0 * params.a * quart +
                 2.0 * params.a * anomalous);
    return q;
}

Certificate certificate_small_a(const VortexProfile& profile, const GpParameters& params) {
    if (profile.trap.kind() != TrapKind::Harmonic)
        throw std::invalid_argument("small-a certificate is for the harmonic trap");
    const long ni = integer_charge(profile.n);
    if (ni < 1) throw std::invalid_argument("small-a certificate requires n >= 1");

    ArrayXd w = (1.0 / std::sqrt(kPi)) * (-0.5 * profile.grid.r.square()).exp();
    ChannelOperator op(profile, static_cast<int>(ni), params);
    ArrayXd a_part = 0.5 * w, b_part = 0.5 * w;
    Certificate c;
    c.name = "small_a_gaussian";
    c.q_value = op.q_value(a_part, b_part);
    c.rayleigh = c.q_value / op.norm_sq(a_part, b_part);
    const double bound = ni * (params.omega - 2.0) + params.a / kPi;
    c.note = "guaranteed Q <= " + std::to_string(bound);
    return c;
}

Certificate certificate_large_n(const VortexProfile& profile, const GpParameters& params) {
    const long ni = integer_charge(profile.n);
    if (ni < 1) throw std::invalid_argument("large-n certificate requires n >= 1");
    const double scale = c_n(profile.n) * std::sqrt(profile.mu_tilde);
    ArrayXd w = scale * std::sqrt(2.0 / kPi) *
                (-(scale * scale) * profile.grid.r.square()).exp();
    ChannelOperator op(profile, static_cast<int>(ni), params);
    ArrayXd a_part = 0.5 * w, b_part = 0.5 * w;
    Certificate c;
    c.name = "large_n_bump";
    c.q_value = op.q_value(a_part, b_part);
    c.rayleigh = c.q_value / op.norm_sq(a_part, b_part);
    if (ni >= 1 && ni <= 400) {
        const double dn = d_n(static_cast<int>(ni));
        c.note = "d_n=" + std::to_string(dn);
    }
    return c;
}

namespace {

/// (r (V / r^{2(d-1)})')' sampled on the grid.
ArrayXd condv_term(const VortexProfile& p, int d) {
    const RadialGrid& grid = p.grid;
    const int n = grid.size();
    ArrayXd t(n);
    switch (p.trap.kind()) {
        case TrapKind::Harmonic:
            for (int i = 0; i < n; ++i)
                t[i] = (4.0 - 2.0 * d) * (4.0 - 2.0 * d) * std::pow(grid.r[i], 3.0 - 2.0 * d);
            break;
        case TrapKind::Homogeneous: {
            const double nu = p.trap.exponent();
            const double c = (nu - 2.0 * (d - 1.0)) * (nu - 2.0 * (d - 1.0));
            for (int i = 0; i < n; ++i) t[i] = c * std::pow(grid.r[i], nu - 2.0 * d + 1.0);
            break;
        }
        case TrapKind::Tabulated: {
            ArrayXd wq(n);
            for (int i = 0; i < n; ++i)
                wq[i] = p.trap(grid.r[i]) / std::pow(grid.r[i], 2.0 * (d - 1.0));
            ArrayXd wp = radial_derivative(wq, grid, 0);
            t = radial_derivative((grid.r * wp).eval(), grid, 0);
            break;
        }
    }
    return t;
}

}  // namespace

Certificate certificate_d_mode(const VortexProfile& profile, int d, const GpParameters& params) {
    const long ni = integer_charge(profile.n);
    if (d < 1) throw std::invalid_argument("d-mode certificate requires d >= 1");
    if (d > ni) throw std::invalid_argument("d-mode certificate requires d <= n");

    const RadialGrid& grid = profile.grid;
    const double mu = profile.mu_tilde - profile.n * params.omega;
    const ArrayXd t = condv_term(profile, d);

    Certificate c;
    c.name = "d_mode_" + std::to_string(d);
    bool condv_ok = true;
    if (d >= 2) {
        for (int i = 0; i < grid.size(); ++i)
            if (t[i] > 1e-8 * (1.0 + std::abs(t[i]))) {
                condv_ok = false;
                break;
            }
    }
    c.applicable = condv_ok;
    if (!condv_ok) c.note = "trap fails the d-mode curvature condition";

    const double dm1 = d - 1.0;
    ArrayXd f2 = profile.f.square();
    ArrayXd integrand(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double r = grid.r[i];
        const double rpow = std::pow(r, 2.0 * d - 1.0);
        integrand[i] = f2[i] / rpow *
                           (-mu * dm1 * dm1 + params.a * dm1 * dm1 * f2[i] +
                            dm1 * profile.n * params.omega) +
                       0.25 * f2[i] * t[i];
    }
    c.q_value = 8.0 * kPi * (grid.w1d * integrand).sum();

    // |w|^2 for the trial pair A = f'/r^{d-1}, B = n f / r^d
    const int parity_f = charge_parity(ni);
    ArrayXd fp = radial_derivative(profile.f, grid, parity_f);
    ArrayXd a_part = fp / grid.r.pow(dm1);
    ArrayXd b_part = profile.n * profile.f / grid.r.pow(static_cast<double>(d));
    const double norm = 2.0 * (grid.w * (a_part.square() + b_part.square())).sum();
    c.rayleigh = c.q_value / norm;

    if (d >= 2) {
        const double condmu = profile.n * params.omega * (1.0 + 2.0 / dm1);
        if (profile.mu_tilde <= condmu)
            c.note += (c.note.empty() ? "" : "; ") + std::string("mu_tilde below the d-mode threshold");
    }
    return c;
}

StabilityReport analyze_stability(const VortexProfile& profile, const GpParameters& params,
                                  const StabilityOptions& opts) {
    if (!profile.converged || profile.residual > 1e-5)
        throw std::invalid_argument("stability analysis requires a stationary vortex profile");
    const long ni = integer_charge(profile.n);

    StabilityReport rep;
    rep.n = profile.n;
    rep.params = params;
    rep.zero_band = opts.zero_band_factor * profile.grid.h * profile.grid.h;
    rep.q_phase = q_form_phase_mode(profile, params);
    rep.q_rotation = profile.n * profile.n * rep.q_phase;

    const int m_max = opts.m_max > 0 ? opts.m_max : std::max<int>(2 * ni, 16);

    auto solve_channel = [&](int m) -> ChannelResult {
        ChannelOperator op(profile, m, params);
        ChannelResult res;
        res.m = m;
        if (m == 0) {
            res.phase_mode = eigenvalue_bisect(op.scalar_imag(), 0);
            res.has_phase_mode = true;
            const double im_second = eigenvalue_bisect(op.scalar_imag(), 1);
            Eigen::VectorXd constraint =
                (profile.grid.w.sqrt() * profile.f).matrix();
            constraint.normalize();
            const double re_perp =
                lowest_eigenvalue(op.scalar_real(), {constraint}, 1e-10);
            res.lambda_min = std::min(im_second, re_perp);
        } else {
            res.lambda_min = eigenvalue_bisect(op.standardized_block(), 0);
        }
        return res;
    };

    if (opts.concurrent_channels) {
        std::vector<std::future<ChannelResult>> futs;
        futs.reserve(m_max + 1);
        for (int m = 0; m <= m_max; ++m)
            futs.push_back(std::async(std::launch::async | std::launch::deferred, solve_channel, m));
        for (auto& f : futs) rep.channels.push_back(f.get());
    } else {
        for (int m = 0; m <= m_max; ++m) rep.channels.push_back(solve_channel(m));
    }

    if (profile.trap.kind() == TrapKind::Harmonic && ni >= 1)
        rep.certificates.push_back(certificate_small_a(profile, params));
    if (ni >= 1) rep.certificates.push_back(certificate_large_n(profile, params));
    for (int d = 2; d <= std::min<long>(ni, 6); ++d) {
        Certificate c = certificate_d_mode(profile, d, params);
        if (c.applicable) rep.certificates.push_back(c);
    }
    if (ni >= 1) {
        Certificate tr = certificate_d_mode(profile, 1, params);
        tr.name = "translation_x";
        rep.certificates.push_back(tr);
    }

    double worst = std::numeric_limits<double>::infinity();
    for (const auto& ch : rep.channels) worst = std::min(worst, ch.lambda_min);
    bool certified_negative = false;
    for (const auto& c : rep.certificates)
        if (c.applicable && c.name.rfind("translation", 0) != 0 && c.rayleigh < -opts.tol)
            certified_negative = true;

    const double neg_threshold = -std::max(opts.tol, rep.zero_band);
    if (worst < neg_threshold || certified_negative)
        rep.verdict = StabilityVerdict::Unstable;
    else if (worst < opts.tol)
        rep.verdict = StabilityVerdict::Marginal;
    else
        rep.verdict = StabilityVerdict::Stable;
    return rep;
}

}  // namespace gprotor
