#include "gprotor/dm_solver.hpp"
#include "gprotor/banded.hpp"
#include "gprotor/bounds.hpp"
#include "gprotor/radial_form.hpp"
#include "gprotor/solver2d.hpp"

#include <algorithm>
#include <cmath>

namespace gprotor {

namespace {

/// One angular sector: linear ground state of -Lap + j^2/r^2 + V + 2 a rho
/// in the regular variables g = f / r^j, tracked across density updates.
class Sector {
  public:
    Sector(int j, const TrapPotential& trap, const RadialGrid& grid)
        : j_(j), grid_(grid), pot_(grid.size()) {
        for (int i = 0; i < grid.size(); ++i) pot_[i] = trap(grid.r[i]);
        base_ = make_radial_form(grid, 2.0 * j + 1.0, +1, pot_);
        rpow_ = grid.r.pow(2.0 * j);  // f^2 = r^{2j} g^2
        value_ = std::numeric_limits<double>::quiet_NaN();
    }

    int j() const { return j_; }

    /// Ground pair of the standardized operator with the extra diagonal
    /// 2 a rho; warm-started by the previous solve.
    void solve(const ArrayXd& two_a_rho) {
        BandedSym op = base_.standardized();
        // standardized extra diagonal: M^{-1/2} (M * d) M^{-1/2} = d
        for (int i = 0; i < op.n(); ++i) op.add_sym(i, i, two_a_rho[i]);

        const double scale =
            std::max({std::abs(op.gershgorin_lower()), std::abs(op.gershgorin_upper()), 1.0});
        bool done = false;
        if (std::isfinite(value_) && vec_.size() == op.n()) {
            // shifted inverse iteration from the previous pair
            double sigma = value_ - std::max(1e-3 * scale, 4.0 * last_change_);
            for (int attempt = 0; attempt < 3 && !done; ++attempt) {
                BandedLdlt f = factorize_shifted(op, sigma);
                if (!f.ok || f.negative_pivots > 0) {
                    sigma -= 0.1 * scale;
                    continue;
                }
                Eigen::VectorXd x = vec_;
                double ray = value_;
                for (int it = 0; it < 12; ++it) {
                    Eigen::VectorXd y = f.solve(x);
                    y.normalize();
                    x = y;
                    ray = x.dot(op.apply(x));
                    const double res = (op.apply(x) - ray * x).norm();
                    if (res < 1e-11 * scale) {
                        done = true;
                        break;
                    }
                }
                if (done) {
                    last_change_ = std::abs(ray - value_);
                    value_ = ray;
                    vec_ = x;
                }
            }
        }
        if (!done) {
            value_ = eigenvalue_bisect(op, 0, 1e-12);
            vec_ = eigenvector_near(op, value_);
            last_change_ = 0.05 * std::max(1.0, std::abs(value_));
        }
    }

    double bare_value() const { return value_; }  // <-Lap + j^2/r^2 + V + 2a rho>

    /// Unit-norm orbital f_j and its density on the grid.
    ArrayXd orbital_f() const {
        ArrayXd g = vec_.array() / base_.mass.sqrt();
        ArrayXd f = grid_.r.pow(static_cast<double>(j_)) * g;
        const double nrm = std::sqrt((grid_.w * f.square()).sum());
        return f / nrm;
    }

  private:
    int j_;
    RadialGrid grid_;
    ArrayXd pot_;
    RadialForm base_;
    ArrayXd rpow_;
    double value_;
    double last_change_ = 1.0;
    Eigen::VectorXd vec_;
};

/// Convex occupation subproblem on the simplex:
///   min_t  t . tvec + a t'G t,   t >= 0, sum t = 1,
/// by entropic mirror descent with an exact line search per step.
ArrayXd solve_occupations(const ArrayXd& tvec, const Eigen::MatrixXd& gmat, double a,
                          ArrayXd start, int max_iter, double tol, double* kkt_out) {
    const int n = static_cast<int>(tvec.size());
    ArrayXd lam = start;
    if (lam.size() != n || lam.sum() <= 0.0) lam = ArrayXd::Constant(n, 1.0 / n);
    // keep every slot strictly positive so dormant sectors can reopen
    lam = 0.98 * lam / lam.sum() + 0.02 / n;

    auto grad = [&](const ArrayXd& t) -> ArrayXd {
        return tvec + 2.0 * a * (gmat * t.matrix()).array();
    };
    auto value = [&](const ArrayXd& t) -> double {
        return (t * tvec).sum() + a * t.matrix().dot(gmat * t.matrix());
    };

    double kkt = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        const ArrayXd g = grad(lam);
        // KKT residual: occupied levels share the minimal gradient
        const double mu = (lam * g).sum();
        double viol = 0.0;
        for (int i = 0; i < n; ++i)
            viol = std::max(viol, lam[i] > 1e-14 ? std::abs(g[i] - mu) : std::max(0.0, mu - g[i]));
        kkt = viol;
        if (viol < tol * std::max(1.0, std::abs(mu))) break;

        const double spread = g.maxCoeff() - g.minCoeff();
        const double eta = (spread > 0.0) ? 2.0 / spread : 1.0;
        ArrayXd cand = lam * (-eta * (g - g.minCoeff())).exp();
        cand /= cand.sum();
        // exact quadratic line search between lam and cand
        const ArrayXd d = cand - lam;
        const double lin = (d * g).sum();
        const double quad = a * d.matrix().dot(gmat * d.matrix());
        double theta = 1.0;
        if (quad > 0.0) theta = std::clamp(-0.5 * lin / quad, 0.0, 1.0);
        if (lin >= 0.0 && quad >= 0.0) theta = 0.0;
        ArrayXd next = lam + theta * d;
        if (value(next) <= value(lam))
            lam = next;
        else
            lam = cand;  // fallback keeps iterates inside the simplex
        lam = lam.max(0.0);
        lam /= lam.sum();
    }
    if (kkt_out) *kkt_out = kkt;
    return lam;
}

struct Engine {
    GpParameters params;
    TrapPotential trap;
    RadialGrid grid;
    std::vector<Sector> sectors;
    DmOptions opts;

    DmState run() {
        const int ns = static_cast<int>(sectors.size());
        const int ncell = grid.size();

        // rank-1 seed in the lowest sector
        ArrayXd rho = ArrayXd::Zero(ncell);
        {
            ArrayXd f0 = (1.0 / std::sqrt(kPi)) * (-0.5 * grid.r.square()).exp();
            const double nrm = std::sqrt((grid.w * f0.square()).sum());
            f0 /= nrm;
            rho = f0.square();
        }
        double bare_sum = 0.0;  // sum lambda_j t_j of the current mixture
        {
            // energy bookkeeping of the seed: treat it as a j = 0 state
            Sector s0(0, trap, grid);
            ArrayXd zero = ArrayXd::Zero(ncell);
            s0.solve(zero);
            bare_sum = s0.bare_value();
            rho = s0.orbital_f().square();
        }

        DmState st;
        st.params = params;
        st.trap = trap;
        st.grid = grid;

        ArrayXd lam = ArrayXd::Zero(ns);
        lam[0] = 1.0;
        double energy = bare_sum + params.a * (grid.w * rho.square()).sum();

        Eigen::MatrixXd gram(ns, ns);
        ArrayXd tvec(ns);
        std::vector<ArrayXd> fs(ns);
        bool first = true;
        for (int it = 0; it < opts.max_iterations; ++it) {
            const ArrayXd two_a_rho = 2.0 * params.a * rho;
            for (auto& s : sectors) s.solve(two_a_rho);
            for (int k = 0; k < ns; ++k) {
                fs[k] = sectors[k].orbital_f();
                const double ej_bare = sectors[k].bare_value();
                const double mix = (grid.w * rho * fs[k].square()).sum();
                tvec[k] = ej_bare - 2.0 * params.a * mix - params.omega * sectors[k].j();
            }
            for (int k = 0; k < ns; ++k)
                for (int l = 0; l <= k; ++l) {
                    const double v = (grid.w * fs[k].square() * fs[l].square()).sum();
                    gram(k, l) = gram(l, k) = v;
                }
            double kkt = 0.0;
            ArrayXd lam_new = solve_occupations(tvec, gram, params.a, lam,
                                                opts.occupation_iterations, opts.tol_kkt, &kkt);

            ArrayXd rho_new = ArrayXd::Zero(ncell);
            for (int k = 0; k < ns; ++k)
                if (lam_new[k] > 0.0) rho_new += lam_new[k] * fs[k].square();
            double bare_new = (lam_new * tvec).sum();

            // exact line search on the mixture segment
            const ArrayXd drho = rho_new - rho;
            const double dbare = bare_new - bare_sum;
            const double lin = dbare + 2.0 * params.a * (grid.w * rho * drho).sum();
            const double quad = params.a * (grid.w * drho.square()).sum();
            double theta = 1.0;
            if (quad > 0.0) theta = std::clamp(-0.5 * lin / quad, 0.0, 1.0);
            if (first) theta = std::min(theta, opts.initial_mixing);
            first = false;

            const double rho_step = drho.abs().maxCoeff();
            rho += theta * drho;
            bare_sum += theta * dbare;
            energy = bare_sum + params.a * (grid.w * rho.square()).sum();

            st.iterations = it + 1;
            st.rho_residual = rho_step;
            if (rho_step < opts.tol_rho * std::max(1e-30, rho.maxCoeff()) && theta > 0.999) {
                st.converged = true;
                lam = lam_new;
                break;
            }
            lam = lam_new;
        }

        // final sector pass at the converged density
        const ArrayXd two_a_rho = 2.0 * params.a * rho;
        for (auto& s : sectors) s.solve(two_a_rho);
        st.sectors.resize(ns);
        st.orbitals.resize(ns);
        st.sector_energies.resize(ns);
        for (int k = 0; k < ns; ++k) {
            st.sectors[k] = sectors[k].j();
            st.orbitals[k] = sectors[k].orbital_f();
            st.sector_energies[k] =
                sectors[k].bare_value() - params.omega * sectors[k].j();
        }
        st.occupations = lam;
        st.rho = ArrayXd::Zero(ncell);
        double bare = 0.0;
        for (int k = 0; k < ns; ++k)
            if (lam[k] > 0.0) {
                st.rho += lam[k] * st.orbitals[k].square();
                const double mix = (grid.w * rho * st.orbitals[k].square()).sum();
                bare += lam[k] * (sectors[k].bare_value() - 2.0 * params.a * mix -
                                  params.omega * sectors[k].j());
            }
        st.energy = bare + params.a * (grid.w * st.rho.square()).sum();
        st.mu_dm = *std::min_element(st.sector_energies.begin(), st.sector_energies.end());
        return st;
    }
};

}  // namespace

int default_j_max(const GpParameters& params, const TrapPotential& trap) {
    (void)trap;  // closed-form estimates use the harmonic envelope
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> est(513);
    for (int n = 0; n <= 512; ++n) {
        est[n] = energy_upper_bound(n, params.a) - n * params.omega;
        best = std::min(best, est[n]);
    }
    int j = 0;
    for (int n = 0; n <= 512; ++n)
        if (est[n] <= best + 5.0) j = n;
    return j + 4;
}

DmState minimize_dm_support(const GpParameters& params, const TrapPotential& trap,
                            const RadialGrid& grid, const std::vector<int>& support,
                            const DmOptions& opts) {
    params.validate(trap);
    if (support.empty()) throw std::invalid_argument("dm solver: empty sector support");
    Engine eng{params, trap, grid, {}, opts};
    for (int j : support) {
        if (j < 0) throw std::invalid_argument("dm solver: negative sector");
        eng.sectors.emplace_back(j, trap, grid);
    }
    return eng.run();
}

DmState minimize_dm(const GpParameters& params, const TrapPotential& trap, const RadialGrid& grid,
                    int j_max, const DmOptions& opts) {
    if (j_max < 0) j_max = default_j_max(params, trap);
    std::vector<int> support(j_max + 1);
    for (int j = 0; j <= j_max; ++j) support[j] = j;
    DmState st = minimize_dm_support(params, trap, grid, support, opts);
    if (st.occupations[j_max] > 1e-8)
        st.converged = false;  // sector window too small; caller should widen
    return st;
}

int dm_rank(const DmState& state, double tol) {
    int r = 0;
    for (int i = 0; i < state.occupations.size(); ++i)
        if (state.occupations[i] > tol) ++r;
    return r;
}

DmGpComparison compare_dm_gp(const GpParameters& params, const TrapPotential& trap,
                             const RadialGrid& grid, int grid2d_n, double tol) {
    DmGpComparison cmp;
    DmState dm = minimize_dm(params, trap, grid);
    cmp.e_dm = dm.energy;
    const int n2 = grid2d_n > 0 ? grid2d_n : 128;
    Grid2D g2 = Grid2D::make(n2, suggested_extent(params, trap));
    Minimizer2D gp = minimize_2d(params, trap, g2);
    cmp.e_gp = gp.energy;
    cmp.gap = cmp.e_gp - cmp.e_dm;
    cmp.strict_gap = cmp.gap > tol;
    return cmp;
}

bool gp_dm_equivalent_small_omega(const TrapPotential& trap, double mu_dm, double omega) {
    const double wc = std::min(trap.omega_c(), 1e3);
    double best = 0.0;
    for (int j = 1; j <= 256; ++j) {
        const double w = wc * j / 257.0;
        if (w <= omega) continue;
        best = std::max(best, 0.25 * w * w / (trap.c_tilde(w) + mu_dm));
    }
    return omega <= best;
}

}  // namespace gprotor
