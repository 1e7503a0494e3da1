#include "gprotor/radial_solver.hpp"
#include "gprotor/bounds.hpp"

#include <cmath>
#include <random>

namespace gprotor {

double VortexProfile::quartic_integral() const { return (grid.w * f.pow(4)).sum(); }

VortexDiscretization::VortexDiscretization(double n, const TrapPotential& trap,
                                           const RadialGrid& grid)
    : n_(n), grid_(grid) {
    if (n < 0.0) throw std::invalid_argument("vortex charge must be nonnegative");
    ArrayXd pot(grid.size());
    for (int i = 0; i < grid.size(); ++i) pot[i] = trap(grid.r[i]);
    form_ = make_radial_form(grid, 2.0 * n + 1.0, +1, pot);
    quartic_w_ = 2.0 * kPi * grid.w1d * grid.r.pow(4.0 * n + 1.0);
}

double VortexDiscretization::energy(const ArrayXd& g, double a) const {
    return form_.quad(g) + a * (quartic_w_ * g.pow(4)).sum();
}

ArrayXd VortexDiscretization::apply(const ArrayXd& g, double a) const {
    Eigen::VectorXd kg = form_.k.apply(g.matrix());
    return kg.array() + 2.0 * a * quartic_w_ * g.cube();
}

void VortexDiscretization::normalize(ArrayXd& g) const {
    const double n2 = norm_sq(g);
    if (!(n2 > 0.0)) throw std::runtime_error("vortex solver: zero state");
    g /= std::sqrt(n2);
}

double VortexDiscretization::quartic(const ArrayXd& g) const {
    return (quartic_w_ * g.pow(4)).sum();
}

ArrayXd gaussian_seed(double n, double a, const VortexDiscretization& disc) {
    const double c = 0.5 / std::sqrt(1.0 + a / (b_n_continuous(n) * (n + 1.0)));
    ArrayXd g = (-c * disc.grid().r.square()).exp();
    disc.normalize(g);
    return g;
}

namespace {

struct DescentResult {
    double energy = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

DescentResult descend(const VortexDiscretization& disc, ArrayXd& g, double a, double tol_energy,
                      double tol_residual, int max_iter, std::vector<double>* trace) {
    disc.normalize(g);
    const ArrayXd& m = disc.form().mass;

    double e = disc.energy(g, a);
    // SPD preconditioner K + sigma*M, kept fixed over the run
    const double sigma = std::max(1.0, std::abs(e));
    BandedSym pk = disc.form().k;
    for (int i = 0; i < pk.n(); ++i) pk.add_sym(i, i, sigma * m[i]);
    BandedCholesky chol(pk);

    auto residual_norm = [&](const ArrayXd& gg, ArrayXd& hg, double& mu) {
        hg = disc.apply(gg, a);
        mu = (gg * hg).sum();
        const ArrayXd res = hg - mu * (m * gg);
        return std::sqrt((res.square() / m).sum()) / std::max(1.0, std::abs(mu));
    };

    DescentResult out;
    double tau = 1.0;
    double de = std::numeric_limits<double>::infinity();
    ArrayXd hg;
    double mu = 0.0;
    double resn = residual_norm(g, hg, mu);
    for (int it = 0; it < max_iter; ++it) {
        out.energy = e;
        out.residual = resn;
        out.iterations = it;
        if (resn < tol_residual && std::abs(de) < tol_energy * std::max(1.0, std::abs(e))) {
            out.converged = true;
            return out;
        }
        const ArrayXd res = hg - mu * (m * g);
        const ArrayXd dir = chol.solve(res.matrix()).array();

        // Energy descent far from the minimizer; once energy differences
        // reach roundoff the preconditioned map is contractive on its own,
        // so switch to residual acceptance.
        const bool local = resn < 1e-5;
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
            ArrayXd trial = g - tau * dir;
            disc.normalize(trial);
            if (local) {
                ArrayXd hg_t;
                double mu_t;
                const double resn_t = residual_norm(trial, hg_t, mu_t);
                if (resn_t <= resn) {
                    const double et = disc.energy(trial, a);
                    de = et - e;
                    g = trial;
                    e = et;
                    hg.swap(hg_t);
                    mu = mu_t;
                    resn = resn_t;
                    accepted = true;
                    if (tries == 0) tau = std::min(tau * 1.25, 2.0);
                } else {
                    tau *= 0.5;
                    if (tau < 1e-3) tau = 1.0;
                }
            } else {
                const double et = disc.energy(trial, a);
                if (et <= e + 1e-15 * std::max(1.0, std::abs(e))) {
                    de = et - e;
                    g = trial;
                    e = et;
                    resn = residual_norm(g, hg, mu);
                    accepted = true;
                    if (tries == 0) tau = std::min(tau * 1.25, 2.0);
                } else {
                    tau *= 0.5;
                }
            }
        }
        if (trace) trace->push_back(e);
        if (!accepted) {
            out.energy = e;
            return out;
        }
    }
    out.energy = e;
    return out;
}

}  // namespace

VortexProfile minimize_vortex(double n, const GpParameters& params, const TrapPotential& trap,
                              const RadialGrid& grid, const RadialSolveOptions& opts) {
    params.validate(trap);
    VortexDiscretization disc(n, trap, grid);

    // coupling ladder: direct solve for small a, geometric continuation above
    std::vector<double> ladder;
    if (opts.continuation && params.a > 8.0) {
        double v = params.a;
        while (v > 8.0) {
            ladder.push_back(v);
            v /= 3.0;
        }
        ladder.push_back(v);
        std::reverse(ladder.begin(), ladder.end());
    } else {
        ladder.push_back(params.a);
    }

    VortexProfile p;
    p.n = n;
    p.a = params.a;
    p.omega = params.omega;
    p.trap = trap;
    p.grid = grid;
    if (opts.record_energy_trace) p.energy_trace.reserve(1024);
    std::vector<double>* trace = opts.record_energy_trace ? &p.energy_trace : nullptr;

    ArrayXd g = gaussian_seed(n, ladder.front(), disc);
    DescentResult res;
    for (std::size_t s = 0; s < ladder.size(); ++s) {
        const bool last = (s + 1 == ladder.size());
        res = descend(disc, g, ladder[s], last ? opts.tol_energy : 1e-9,
                      last ? opts.tol_residual : 1e-6, opts.max_iterations,
                      last ? trace : nullptr);
    }

    // optional randomized restarts as a local-minimum cross-check
    if (opts.restarts > 0) {
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> unif(0.2, 1.0);
        for (int rs = 0; rs < opts.restarts; ++rs) {
            ArrayXd cand(grid.size());
            const double c = unif(rng);
            for (int i = 0; i < grid.size(); ++i)
                cand[i] = std::exp(-c * grid.r[i] * grid.r[i]) * (1.0 + 0.3 * unif(rng));
            disc.normalize(cand);
            DescentResult rr = descend(disc, cand, params.a, opts.tol_energy, opts.tol_residual,
                                       opts.max_iterations, nullptr);
            if (rr.converged && rr.energy < res.energy - 1e-13) {
                res = rr;
                g = cand;
            }
        }
    }

    // sign convention: the profile is nonnegative
    Eigen::Index imax;
    g.abs().maxCoeff(&imax);
    if (g[imax] < 0.0) g = -g;

    p.g = g;
    p.f = grid.r.pow(n) * g;
    p.energy = res.energy;
    p.mu_tilde = res.energy + params.a * disc.quartic(g);
    p.converged = res.converged;
    p.residual = res.residual;
    p.iterations = res.iterations;
    return p;
}

double energy_functional(const RadialState& f, double n, const GpParameters& params,
                         const TrapPotential& trap, const RadialGrid& grid) {
    if (f.values.size() != grid.r.size())
        throw std::invalid_argument("state/grid size mismatch");
    if (!f.values.isFinite().all())
        throw std::invalid_argument("energy_functional: NaN or Inf in samples");
    VortexDiscretization disc(n, trap, grid);
    ArrayXd g = f.values / grid.r.pow(n);
    return disc.energy(g, params.a);
}

double chemical_potential(const VortexProfile& p, double* el_defect) {
    const double quartic = p.quartic_integral();
    const double mu = p.energy + p.a * quartic;
    if (el_defect) {
        // independent check in the f representation
        const int nn = p.grid.size();
        ArrayXd extra(nn);
        for (int i = 0; i < nn; ++i) {
            const double r = p.grid.r[i];
            extra[i] = p.n * p.n / (r * r) + p.trap(r);
        }
        const int parity = (std::abs(p.n - std::round(p.n)) < 1e-12)
                               ? (static_cast<long>(std::llround(p.n)) % 2 == 0 ? +1 : -1)
                               : 0;
        RadialForm form = make_radial_form(p.grid, 1.0, parity, extra);
        const double qf = form.quad(p.f) + 2.0 * p.a * (p.grid.w * p.f.pow(4)).sum();
        *el_defect = qf - mu * form.mass_sq(p.f);
    }
    return mu;
}

double virial_check(const VortexProfile& p) {
    if (p.trap.kind() != TrapKind::Harmonic)
        throw std::invalid_argument("virial identity implemented for the harmonic trap");
    const double second_moment = (p.grid.w * p.grid.r.square() * p.f.square()).sum();
    return std::abs(second_moment - 0.5 * p.energy);
}

}  // namespace gprotor
