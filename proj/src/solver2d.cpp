#include "gprotor/solver2d.hpp"
#include "gprotor/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <random>
#include <thread>

namespace gprotor {

Gp2DWorkspace::Gp2DWorkspace(const TrapPotential& trap, const Grid2D& grid,
                             const GpParameters& params)
    : grid_(grid), params_(params), sp_(grid) {
    pot_.resize(grid.n, grid.n);
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i)
            pot_(i, j) = trap(std::hypot(grid.coord[i], grid.coord[j]));
}

void Gp2DWorkspace::apply_h(const MatrixXcd& phi, const ArrayXXd* rho, MatrixXcd& out,
                            double* kinetic, double* rotation) {
    const int n = grid_.n;
    MatrixXcd hat = phi;
    sp_.forward(hat);

    if (kinetic) {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                s += (sp_.k2()[i] + sp_.k2()[j]) * std::norm(hat(i, j));
        *kinetic = s * grid_.cell_area() / (static_cast<double>(n) * n);
    }

    // -Lap phi
    out = hat;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out(i, j) *= sp_.k2()[i] + sp_.k2()[j];
    sp_.inverse(out);

    const bool need_l = params_.omega != 0.0 || rotation;
    if (need_l) {
        MatrixXcd dx = hat, dy = hat;
        const std::complex<double> iu(0.0, 1.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                dx(i, j) *= iu * sp_.k_deriv()[i];
                dy(i, j) *= iu * sp_.k_deriv()[j];
            }
        sp_.inverse(dx);
        sp_.inverse(dy);
        double rot = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::complex<double> lphi =
                    -iu * (grid_.coord[i] * dy(i, j) - grid_.coord[j] * dx(i, j));
                rot += std::real(std::conj(phi(i, j)) * lphi);
                out(i, j) -= params_.omega * lphi;
            }
        if (rotation) *rotation = rot * grid_.cell_area();
    }

    if (rho) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                out(i, j) += (pot_(i, j) + 2.0 * params_.a * (*rho)(i, j)) * phi(i, j);
    } else {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out(i, j) += pot_(i, j) * phi(i, j);
    }
}

double Gp2DWorkspace::rotation_expectation(const MatrixXcd& phi) {
    MatrixXcd dx, dy;
    sp_.derivatives(phi, dx, dy);
    const std::complex<double> iu(0.0, 1.0);
    double rot = 0.0;
    for (int j = 0; j < grid_.n; ++j)
        for (int i = 0; i < grid_.n; ++i) {
            const std::complex<double> lphi =
                -iu * (grid_.coord[i] * dy(i, j) - grid_.coord[j] * dx(i, j));
            rot += std::real(std::conj(phi(i, j)) * lphi);
        }
    return rot * grid_.cell_area();
}

double Gp2DWorkspace::energy(const std::vector<const MatrixXcd*>& components) {
    const int n = grid_.n;
    ArrayXXd rho = ArrayXXd::Zero(n, n);
    double e = 0.0;
    for (const MatrixXcd* phi : components) {
        e += sp_.kinetic_energy(*phi);
        if (params_.omega != 0.0) e -= params_.omega * rotation_expectation(*phi);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) rho(i, j) += std::norm((*phi)(i, j));
    }
    double pot = 0.0, quart = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            pot += pot_(i, j) * rho(i, j);
            quart += rho(i, j) * rho(i, j);
        }
    return e + grid_.cell_area() * (pot + params_.a * quart);
}

double rotation_term(const Field2D& phi) {
    GpParameters pr{0.0, 0.0};
    Gp2DWorkspace ws(TrapPotential::harmonic(), phi.grid, pr);
    return ws.rotation_expectation(phi.values);
}

double gp_energy_2d(const Field2D& phi, const GpParameters& params, const TrapPotential& trap) {
    Gp2DWorkspace ws(trap, phi.grid, params);
    return ws.energy({&phi.values});
}

Field2D rotate90(const Field2D& phi) {
    const int n = phi.grid.n;
    Field2D out{phi.grid, MatrixXcd(n, n)};
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out.values(i, j) = phi.values(j, (n - i) % n);
    return out;
}

double suggested_extent(const GpParameters& params, const TrapPotential& trap) {
    const double mu_ub = std::max(4.0, 2.0 * energy_upper_bound(0.0, params.a) - 2.0);
    // radius where the rotation-reduced potential reaches mu_ub
    double r = 1.0;
    while (r < 1e4) {
        const double v_eff = trap(std::min(r, 1e4)) - 0.25 * params.omega * params.omega * r * r;
        if (v_eff >= mu_ub) break;
        r *= 1.05;
    }
    return std::max(8.0, 1.25 * r + 2.0);
}

namespace {

struct RestartOutcome {
    MatrixXcd phi;
    double energy = std::numeric_limits<double>::infinity();
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

MatrixXcd initial_state(int variant, std::mt19937_64& rng, const Grid2D& grid,
                        const GpParameters& params, const TrapPotential& trap) {
    const int n = grid.n;
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 2.0 * kPi);
    MatrixXcd phi(n, n);

    auto radius = [&](int i, int j) { return std::hypot(grid.coord[i], grid.coord[j]); };

    auto gaussian_vortex = [&](int charge) {
        const double c = 0.5 / std::sqrt(1.0 + params.a / (b_n_continuous(charge) * (charge + 1)));
        MatrixXcd v(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double x = grid.coord[i], y = grid.coord[j];
                const double r = std::hypot(x, y);
                v(i, j) = std::polar(std::pow(r, charge) * std::exp(-c * r * r),
                                     charge * std::atan2(y, x));
            }
        return v;
    };

    // estimated best vortex charge at these parameters, from the closed-form
    // energy bound
    int n_best = 0;
    {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 256; ++k) {
            const double e = energy_upper_bound(k, params.a) - k * params.omega;
            if (e < best) {
                best = e;
                n_best = k;
            }
        }
    }

    switch (variant % 4) {
        case 0: {  // trapped Gaussian (exact ground state at a = 0)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double r = radius(i, j);
                    phi(i, j) = std::exp(-0.5 * r * r) / std::sqrt(kPi);
                }
            if (variant > 0)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i)
                        phi(i, j) += 0.02 * std::complex<double>(gauss(rng), gauss(rng)) *
                                     std::abs(phi(i, j));
            break;
        }
        case 1: {  // superposition of two neighboring vortices, random phase
            const double theta = unif(rng);
            phi = gaussian_vortex(n_best) +
                  std::polar(1.0, theta) * gaussian_vortex(n_best + 1);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    phi(i, j) += 0.02 * std::complex<double>(gauss(rng), gauss(rng)) *
                                 std::abs(phi(i, j));
            break;
        }
        case 2: {  // Thomas-Fermi density with a triangular vortex-lattice phase
            if (params.a < 1.0 || params.omega <= 0.0) {
                phi = gaussian_vortex(n_best);
                break;
            }
            // mu for the rotation-reduced TF profile, by bisection on the norm
            ArrayXXd veff(n, n);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double r = radius(i, j);
                    veff(i, j) = trap(r) - 0.25 * params.omega * params.omega * r * r;
                }
            double lo = 0.0, hi = 10.0 * energy_upper_bound(0.0, params.a);
            for (int it = 0; it < 80; ++it) {
                const double mu = 0.5 * (lo + hi);
                double mass = 0.0;
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i)
                        mass += std::max(0.0, mu - veff(i, j)) / (2.0 * params.a);
                mass *= grid.cell_area();
                (mass < 1.0 ? lo : hi) = mu;
            }
            const double mu = 0.5 * (lo + hi);
            const double r_tf = std::sqrt(std::max(1.0, mu));
            const double spacing = std::sqrt(4.0 * kPi / (std::sqrt(3.0) * params.omega));
            std::vector<std::complex<double>> sites;
            const double jitter = 0.05 * spacing;
            for (int p = -64; p <= 64; ++p)
                for (int q = -64; q <= 64; ++q) {
                    const double x = spacing * (p + 0.5 * q);
                    const double y = spacing * (std::sqrt(3.0) / 2.0) * q;
                    if (std::hypot(x, y) < 1.1 * r_tf + spacing)
                        sites.emplace_back(x + jitter * gauss(rng), y + jitter * gauss(rng));
                }
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double amp =
                        std::sqrt(std::max(0.0, mu - veff(i, j)) / (2.0 * params.a));
                    std::complex<double> ph(1.0, 0.0);
                    const std::complex<double> z(grid.coord[i], grid.coord[j]);
                    for (const auto& s : sites) {
                        const std::complex<double> dz = z - s;
                        const double az = std::abs(dz);
                        if (az > 1e-12) ph *= dz / az;
                    }
                    phi(i, j) = amp * ph;
                }
            break;
        }
        default: {  // smoothed complex noise under a wide envelope
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    phi(i, j) = std::complex<double>(gauss(rng), gauss(rng));
            Spectral2D sp(grid);
            phi = sp.solve_helmholtz(phi, 1.0);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double r = radius(i, j);
                    phi(i, j) *= std::exp(-0.02 * r * r);
                }
            break;
        }
    }
    return phi;
}

void project_channel_mod4(MatrixXcd& phi, int charge) {
    // keep only angular momenta congruent to charge mod 4: average the four
    // exact 90-degree rotations with compensating phases
    const int n = static_cast<int>(phi.rows());
    MatrixXcd acc = phi;
    MatrixXcd cur = phi;
    const std::complex<double> iu(0.0, 1.0);
    for (int k = 1; k < 4; ++k) {
        MatrixXcd rot(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) rot(i, j) = cur(j, (n - i) % n);
        cur = rot;
        acc += std::pow(-iu, (charge * k) % 4) * cur;
    }
    phi = 0.25 * acc;
}

RestartOutcome run_descent_2d(Gp2DWorkspace& ws, MatrixXcd phi, const Solve2DOptions& opts) {
    const Grid2D& grid = ws.grid();
    const int n = grid.n;
    const double area = grid.cell_area();
    const GpParameters& params = ws.params();

    auto normalize = [&](MatrixXcd& m) {
        const double nrm = std::sqrt(m.squaredNorm() * area);
        m /= nrm;
    };
    normalize(phi);
    if (opts.channel_project >= 0.0)
        project_channel_mod4(phi, static_cast<int>(std::lround(opts.channel_project)));

    auto energy_of = [&](const MatrixXcd& m) { return ws.energy({&m}); };
    ArrayXXd rho(n, n);
    MatrixXcd h(n, n);
    auto residual_of = [&](const MatrixXcd& m, MatrixXcd& res, double& mu) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) rho(i, j) = std::norm(m(i, j));
        ws.apply_h(m, &rho, h);
        mu = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) mu += std::real(std::conj(m(i, j)) * h(i, j));
        mu *= area;
        res = h - mu * m;
        return std::sqrt(res.squaredNorm() * area) / std::max(1.0, std::abs(mu));
    };

    RestartOutcome out;
    double e = energy_of(phi);
    double tau = 0.9;
    double de = std::numeric_limits<double>::infinity();
    MatrixXcd res(n, n);
    double mu = 0.0;
    double resn = residual_of(phi, res, mu);
    for (int it = 0; it < opts.max_iterations; ++it) {
        out.energy = e;
        out.residual = resn;
        out.iterations = it;
        if (resn < opts.tol_residual &&
            std::abs(de) < opts.tol_energy * std::max(1.0, std::abs(e))) {
            out.converged = true;
            out.phi = phi;
            return out;
        }
        MatrixXcd dir = ws.precondition(res, std::max(1.0, std::abs(mu)));
        const bool local = resn < 1e-5;
        bool accepted = false;
        for (int tries = 0; tries < 25 && !accepted; ++tries) {
            MatrixXcd trial = phi - tau * dir;
            normalize(trial);
            if (opts.channel_project >= 0.0)
                project_channel_mod4(trial, static_cast<int>(std::lround(opts.channel_project)));
            if (local) {
                MatrixXcd res_t(n, n);
                double mu_t = 0.0;
                const double resn_t = residual_of(trial, res_t, mu_t);
                if (resn_t <= resn) {
                    const double et = energy_of(trial);
                    de = et - e;
                    phi.swap(trial);
                    e = et;
                    res.swap(res_t);
                    mu = mu_t;
                    resn = resn_t;
                    accepted = true;
                    if (tries == 0) tau = std::min(tau * 1.2, 2.0);
                } else {
                    tau *= 0.5;
                    if (tau < 1e-3) tau = 1.0;
                }
            } else {
                const double et = energy_of(trial);
                if (et <= e + 1e-14 * std::max(1.0, std::abs(e))) {
                    de = et - e;
                    phi.swap(trial);
                    e = et;
                    resn = residual_of(phi, res, mu);
                    accepted = true;
                    if (tries == 0) tau = std::min(tau * 1.2, 2.0);
                } else {
                    tau *= 0.5;
                }
            }
        }
        if (!accepted) {
            out.energy = e;
            out.phi = phi;
            return out;
        }
    }
    out.phi = phi;
    return out;
}

}  // namespace

Minimizer2D minimize_2d(const GpParameters& params, const TrapPotential& trap, const Grid2D& grid,
                        const Solve2DOptions& opts) {
    params.validate(trap);

    const int restarts = std::max(1, opts.restarts);
    std::vector<RestartOutcome> outcomes(restarts);
    int jobs = opts.jobs > 0 ? opts.jobs
                             : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min(jobs, restarts);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= restarts) return;
            std::mt19937_64 rng(opts.seed + 0x9e3779b9ULL * static_cast<std::uint64_t>(k));
            Gp2DWorkspace ws(trap, grid, params);
            MatrixXcd phi0 = initial_state(k, rng, grid, params, trap);
            outcomes[k] = run_descent_2d(ws, std::move(phi0), opts);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    int best = 0;
    for (int k = 1; k < restarts; ++k)
        if (outcomes[k].energy < outcomes[best].energy - 1e-12) best = k;

    Minimizer2D m;
    m.phi = Field2D{grid, std::move(outcomes[best].phi)};
    m.energy = outcomes[best].energy;
    m.converged = outcomes[best].converged;
    m.residual = outcomes[best].residual;
    m.iterations = outcomes[best].iterations;
    m.best_restart = best;
    m.l_expectation = rotation_term(m.phi);
    m.spectrum_m_max = opts.spectrum_m_max;
    m.spectrum = angular_spectrum(m.phi, m.spectrum_m_max);
    int significant = 0;
    for (int i = 0; i < m.spectrum.size(); ++i)
        if (m.spectrum[i] > 0.01) ++significant;
    m.breaking_flag = significant >= 2;
    return m;
}

BreakingDiagnosis detect_breaking(const Minimizer2D& m, const std::vector<double>& vortex_energies,
                                  const GpParameters& params, double tol_gap_rel,
                                  double channel_threshold) {
    BreakingDiagnosis d;
    d.e_2d = m.energy;
    d.best_vortex_energy = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < vortex_energies.size(); ++n) {
        const double e = vortex_energies[n] - static_cast<double>(n) * params.omega;
        if (e < d.best_vortex_energy) {
            d.best_vortex_energy = e;
            d.best_vortex_n = static_cast<int>(n);
        }
    }
    d.gap = d.best_vortex_energy - d.e_2d;
    for (int i = 0; i < m.spectrum.size(); ++i)
        if (m.spectrum[i] > channel_threshold) ++d.significant_channels;

    // angular variance of |phi|: channel weights of the modulus field
    Field2D mod{m.phi.grid, m.phi.values.cwiseAbs().cast<std::complex<double>>()};
    const double mod_norm = mod.norm_sq();
    if (mod_norm > 0.0) {
        ArrayXd pm = angular_spectrum(mod, 6);
        const double total = pm.sum();
        if (total > 0.0) d.nonradiality = 1.0 - pm[6] / total;
    }
    d.breaking = (d.gap > tol_gap_rel * std::abs(d.e_2d)) && d.significant_channels >= 2;
    return d;
}

}  // namespace gprotor
