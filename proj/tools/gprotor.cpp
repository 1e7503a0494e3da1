// gprotor: vortex states, stability certificates, critical frequencies and
// symmetry-breaking diagnostics for the rotating 2D Gross-Pitaevskii problem.

#include <CLI11.hpp>

#include "gprotor/io.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace gprotor;

struct CommonOpts {
    std::string trap_spec = "harmonic";
    int cells = 4096;
    double rmax = 0.0;  // 0: auto
    std::string config_path;
    std::string format = "text";
    int jobs = 0;
    std::uint64_t seed = 7;
};

TrapPotential make_trap(const std::string& spec) {
    if (spec == "harmonic") return TrapPotential::harmonic();
    if (spec.rfind("homogeneous:", 0) == 0)
        return TrapPotential::homogeneous(std::stod(spec.substr(12)));
    // anything else is a two-column sample file (r, V)
    std::ifstream in(spec);
    if (!in) throw CLI::ValidationError("--trap", "unknown trap or unreadable file: " + spec);
    std::vector<double> r, v;
    double a, b;
    while (in >> a >> b) {
        r.push_back(a);
        v.push_back(b);
    }
    return TrapPotential::tabulated(Eigen::Map<ArrayXd>(r.data(), static_cast<long>(r.size())),
                                    Eigen::Map<ArrayXd>(v.data(), static_cast<long>(v.size())));
}

double auto_rmax(double n, double a, const TrapPotential& trap) {
    // place the wall where V exceeds the chemical-potential estimate by a
    // safe decay margin
    const double mu_est = 2.0 * energy_upper_bound(n, a) + 2.0;
    double r = 4.0;
    while (r < 512.0 && trap(std::min(r, 511.0)) < mu_est + 40.0) r *= 1.04;
    return std::max(8.0, r);
}

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    if (const char* env = std::getenv("GPROTOR_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

template <typename T>
void override_from(const std::map<std::string, std::string>& cfg, const std::string& key,
                   T& var) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return;
    std::istringstream ss(it->second);
    ss >> var;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotating two-dimensional Gross-Pitaevskii solver suite"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--config", common.config_path, "key=value configuration file");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--trap", common.trap_spec, "harmonic | homogeneous:NU | sample file");
        sub->add_option("--cells", common.cells, "radial cells");
        sub->add_option("--rmax", common.rmax, "radial truncation (0: automatic)");
        sub->add_option("--format", common.format)->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--jobs", common.jobs, "worker threads (env GPROTOR_THREADS)");
        sub->add_option("--seed", common.seed);
    };

    // ---- vortex ----------------------------------------------------------
    auto* sc_vortex = app.add_subcommand("vortex", "radial n-vortex minimizer");
    double v_n = 0.0, v_a = 0.0, v_omega = 0.0;
    bool v_check_bounds = false;
    std::string v_out, v_profile;
    sc_vortex->add_option("--n", v_n, "angular momentum")->required();
    sc_vortex->add_option("--a", v_a, "coupling");
    sc_vortex->add_option("--omega", v_omega, "angular velocity");
    sc_vortex->add_flag("--check-bounds", v_check_bounds);
    sc_vortex->add_option("--out", v_out, "write report to file");
    sc_vortex->add_option("--profile-out", v_profile, "write r,f,g columns to file");
    add_common(sc_vortex);

    // ---- critical --------------------------------------------------------
    auto* sc_critical = app.add_subcommand("critical", "critical-frequency table with bounds");
    int c_nmax = 4;
    std::vector<double> c_as{0.0};
    std::string c_out;
    sc_critical->add_option("--n-max", c_nmax);
    sc_critical->add_option("--a-list", c_as, "coupling values")->delimiter(',');
    sc_critical->add_option("--out", c_out, "CSV output path");
    add_common(sc_critical);

    // ---- stability -------------------------------------------------------
    auto* sc_stab = app.add_subcommand("stability", "channel eigenvalues and certificates");
    double s_n = 1.0, s_a = 0.0, s_omega = 0.0;
    int s_mmax = -1;
    std::string s_out;
    sc_stab->add_option("--n", s_n)->required();
    sc_stab->add_option("--a", s_a);
    sc_stab->add_option("--omega", s_omega);
    sc_stab->add_option("--m-max", s_mmax);
    sc_stab->add_option("--out", s_out);
    add_common(sc_stab);

    // ---- breaking --------------------------------------------------------
    auto* sc_break = app.add_subcommand("breaking", "symmetry-breaking diagnosis / sweep");
    std::vector<double> b_as{10.0}, b_omegas{0.5};
    int b_grid = 128, b_nscan = 16, b_restarts = 6;
    double b_extent = 0.0;
    bool b_strict = false;
    std::string b_out, b_field_out;
    sc_break->add_option("--a-list", b_as)->delimiter(',');
    sc_break->add_option("--omega-list", b_omegas)->delimiter(',');
    sc_break->add_option("--grid", b_grid, "2d nodes per side");
    sc_break->add_option("--extent", b_extent, "2d half-width (0: automatic)");
    sc_break->add_option("--n-scan", b_nscan, "vortex table depth");
    sc_break->add_option("--restarts", b_restarts);
    sc_break->add_flag("--strict", b_strict, "non-convergence fails the run");
    sc_break->add_option("--out", b_out);
    sc_break->add_option("--field-out", b_field_out, "snapshot of the last minimizer");
    add_common(sc_break);

    // ---- dm --------------------------------------------------------------
    auto* sc_dm = app.add_subcommand("dm", "density-matrix minimizer");
    double d_a = 1.0, d_omega = 0.0;
    int d_jmax = -1;
    bool d_orbitals = false;
    std::string d_out;
    sc_dm->add_option("--a", d_a);
    sc_dm->add_option("--omega", d_omega);
    sc_dm->add_option("--j-max", d_jmax);
    sc_dm->add_flag("--orbitals", d_orbitals, "include orbital columns");
    sc_dm->add_option("--out", d_out);
    add_common(sc_dm);

    // ---- multi -----------------------------------------------------------
    auto* sc_multi = app.add_subcommand("multi", "multi-component minimizer / trichotomy");
    int m_nc = 2, m_grid = 128;
    double m_a = 10.0, m_omega = 0.5, m_extent = 0.0;
    bool m_verify = false, m_full2d = false;
    std::string m_out;
    sc_multi->add_option("--nc", m_nc);
    sc_multi->add_option("--a", m_a);
    sc_multi->add_option("--omega", m_omega);
    sc_multi->add_option("--grid", m_grid);
    sc_multi->add_option("--extent", m_extent);
    sc_multi->add_flag("--full2d", m_full2d, "full 2d components (default: sector mode)");
    sc_multi->add_flag("--verify-trichotomy", m_verify);
    sc_multi->add_option("--out", m_out);
    add_common(sc_multi);

    // ---- bounds ----------------------------------------------------------
    auto* sc_bounds = app.add_subcommand("bounds", "closed-form constants and bounds");
    double bb_n = 1.0, bb_a = 1.0, bb_omega = 0.5;
    std::string bb_out;
    sc_bounds->add_option("--n", bb_n);
    sc_bounds->add_option("--a", bb_a);
    sc_bounds->add_option("--omega", bb_omega);
    sc_bounds->add_option("--out", bb_out);
    add_common(sc_bounds);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
        app.exit(e);
        return 2;  // usage error
    }

    try {
        std::map<std::string, std::string> cfg;
        if (!common.config_path.empty()) cfg = load_config(common.config_path);
        override_from(cfg, "trap", common.trap_spec);
        override_from(cfg, "cells", common.cells);
        override_from(cfg, "rmax", common.rmax);
        override_from(cfg, "format", common.format);
        override_from(cfg, "jobs", common.jobs);
        override_from(cfg, "seed", common.seed);

        const TrapPotential trap = make_trap(common.trap_spec);
        const int jobs = resolve_jobs(common.jobs);
        std::ofstream file;

        if (*sc_vortex) {
            override_from(cfg, "a", v_a);
            override_from(cfg, "omega", v_omega);
            const double rmax = common.rmax > 0 ? common.rmax : auto_rmax(v_n, v_a, trap);
            RadialGrid grid = RadialGrid::make(common.cells, rmax);
            GpParameters params{v_a, v_omega};
            VortexProfile p = minimize_vortex(v_n, params, trap, grid);
            std::ostream& os = open_output(file, v_out);
            os << "E_" << format_double(v_n) << "(" << format_double(v_a)
               << ") = " << format_double(p.energy) << "\n";
            os << "mu_tilde = " << format_double(p.mu_tilde) << "\n";
            os << "gp_energy = " << format_double(p.gp_energy()) << "\n";
            os << "converged = " << (p.converged ? "yes" : "no") << " (residual "
               << format_double(p.residual) << ", iterations " << p.iterations << ")\n";
            bool ok = true;
            if (v_check_bounds) {
                auto reports = vortex_bound_suite(p);
                if (common.format == "json")
                    os << bound_reports_json(reports) << "\n";
                else
                    write_bound_reports(os, reports);
                for (const auto& r : reports) ok = ok && r.satisfied;
            }
            if (!v_profile.empty()) {
                std::ofstream pf(v_profile);
                write_profile(pf, p);
            }
            return ok ? 0 : 3;
        }

        if (*sc_critical) {
            const double a_max = *std::max_element(c_as.begin(), c_as.end());
            const double rmax = common.rmax > 0 ? common.rmax : auto_rmax(c_nmax + 1, a_max, trap);
            RadialGrid grid = RadialGrid::make(common.cells, rmax);
            std::ostream& os = open_output(file, c_out);
            bool ok = true;
            std::string violating;
            os << "n,a,E_n,Omega_n,upper,lower,slack_upper,slack_lower\n";
            for (double a : c_as) {
                CriticalFrequencyTable t = critical_table(c_nmax, a, trap, grid);
                std::ostringstream block;
                write_critical_csv(block, t);
                std::istringstream lines(block.str());
                std::string line;
                std::getline(lines, line);  // drop the inner header
                while (std::getline(lines, line)) os << line << "\n";
                if (!t.all_bounds_ok()) {
                    ok = false;
                    for (const auto& e : t.entries)
                        if (!e.bounds.upper_ok || !e.bounds.lower_ok)
                            violating = "n=" + std::to_string(e.n) + " a=" + format_double(a);
                }
                if (!t.chain_ok()) {
                    ok = false;
                    violating = "chain at a=" + format_double(a);
                }
            }
            if (!ok) {
                std::cerr << "bound violation: " << violating << "\n";
                return 3;
            }
            return 0;
        }

        if (*sc_stab) {
            const double rmax = common.rmax > 0 ? common.rmax : auto_rmax(s_n, s_a, trap);
            RadialGrid grid = RadialGrid::make(common.cells, rmax);
            GpParameters params{s_a, s_omega};
            VortexProfile p = minimize_vortex(s_n, params, trap, grid);
            StabilityOptions sopts;
            sopts.m_max = s_mmax;
            StabilityReport rep = analyze_stability(p, params, sopts);
            std::ostream& os = open_output(file, s_out);
            if (common.format == "json")
                os << stability_report_json(rep) << "\n";
            else
                write_stability_report(os, rep);
            return 0;
        }

        if (*sc_break) {
            std::sort(b_omegas.begin(), b_omegas.end());
            std::sort(b_as.begin(), b_as.end());
            std::ostream& os = open_output(file, b_out);
            bool warned = false;
            const bool sweep = b_as.size() * b_omegas.size() > 1;
            if (sweep)
                os << "omega,a,E_gp,E_dm,best_vortex,best_n,gap,channels,dm_rank,breaking\n";
            for (double omega : b_omegas)
                for (double a : b_as) {
                    GpParameters params{a, omega};
                    const double rmax = common.rmax > 0 ? common.rmax : auto_rmax(0, a, trap);
                    RadialGrid rgrid = RadialGrid::make(common.cells, rmax);
                    const double extent = b_extent > 0 ? b_extent : suggested_extent(params, trap);
                    Grid2D grid2 = Grid2D::make(b_grid, extent);
                    Solve2DOptions o2;
                    o2.restarts = b_restarts;
                    o2.seed = common.seed;
                    o2.jobs = jobs;
                    Minimizer2D m = minimize_2d(params, trap, grid2, o2);
                    if (!m.converged) {
                        warned = true;
                        std::cerr << "warning: 2d solve not fully converged at a="
                                  << format_double(a) << " omega=" << format_double(omega)
                                  << " (residual " << format_double(m.residual) << ")\n";
                    }
                    std::vector<double> evs;
                    for (int n = 0; n <= b_nscan; ++n)
                        evs.push_back(minimize_vortex(n, GpParameters{a, 0.0}, trap, rgrid).energy);
                    BreakingDiagnosis d = detect_breaking(m, evs, params);
                    DmState dm = minimize_dm(params, trap, rgrid);
                    if (sweep) {
                        os << format_double(omega) << "," << format_double(a) << ","
                           << format_double(m.energy) << "," << format_double(dm.energy) << ","
                           << format_double(d.best_vortex_energy) << "," << d.best_vortex_n << ","
                           << format_double(d.gap) << "," << d.significant_channels << ","
                           << dm_rank(dm) << "," << (d.breaking ? 1 : 0) << "\n";
                    } else {
                        write_breaking_diagnosis(os, d, m);
                        os << "E_dm = " << format_double(dm.energy) << " (rank " << dm_rank(dm)
                           << ")\n";
                    }
                    if (!b_field_out.empty()) {
                        std::ofstream ff(b_field_out);
                        write_field_snapshot(ff, m.phi);
                    }
                }
            return (warned && b_strict) ? 4 : 0;
        }

        if (*sc_dm) {
            const double rmax = common.rmax > 0 ? common.rmax : auto_rmax(0, d_a, trap);
            RadialGrid grid = RadialGrid::make(common.cells, rmax);
            GpParameters params{d_a, d_omega};
            DmState st = minimize_dm(params, trap, grid, d_jmax);
            std::ostream& os = open_output(file, d_out);
            write_dm_state(os, st, d_orbitals);
            return 0;
        }

        if (*sc_multi) {
            GpParameters params{m_a, m_omega};
            const double rmax = common.rmax > 0 ? common.rmax : auto_rmax(0, m_a, trap);
            RadialGrid rgrid = RadialGrid::make(common.cells, rmax);
            std::ostream& os = open_output(file, m_out);
            if (m_verify) {
                const double extent = m_extent > 0 ? m_extent : suggested_extent(params, trap);
                Grid2D grid2 = Grid2D::make(m_grid, extent);
                Solve2DOptions o2;
                o2.jobs = jobs;
                o2.seed = common.seed;
                TrichotomyReport rep =
                    verify_trichotomy(params, trap, rgrid, grid2, o2, MultiOptions{});
                write_trichotomy(os, rep);
                return rep.all_consistent ? 0 : 3;
            }
            if (m_full2d) {
                const double extent = m_extent > 0 ? m_extent : suggested_extent(params, trap);
                Grid2D grid2 = Grid2D::make(m_grid, extent);
                MultiOptions mo;
                mo.jobs = jobs;
                mo.seed = common.seed;
                MultiState st = minimize_multi(m_nc, params, trap, grid2, mo);
                os << "E_gp_" << m_nc << " = " << format_double(st.energy) << "\n";
                os << "converged = " << (st.converged ? "yes" : "no") << "\n";
            } else {
                DmState st = minimize_multi_sector(m_nc, params, trap, rgrid);
                os << "E_gp_" << m_nc << " (sector mode) = " << format_double(st.energy) << "\n";
                write_dm_state(os, st, false);
            }
            return 0;
        }

        if (*sc_bounds) {
            std::ostream& os = open_output(file, bb_out);
            std::vector<BoundReport> rows;
            std::ostringstream in;
            in << "n=" << format_double(bb_n) << " a=" << format_double(bb_a)
               << " omega=" << format_double(bb_omega);
            const std::string inputs = in.str();
            auto pure = [&](const std::string& name, double v) {
                BoundReport r;
                r.name = name;
                r.inputs = inputs;
                r.bound_value = v;
                r.has_observed = false;
                rows.push_back(r);
            };
            if (bb_n > 0) pure("c_n", c_n(bb_n));
            pure("b_n", b_n(static_cast<int>(bb_n)));
            pure("energy_upper_bound", energy_upper_bound(bb_n, bb_a));
            if (bb_n >= 1) pure("d_n", d_n(static_cast<int>(bb_n)));
            if (bb_a > 0) pure("xi", xi(bb_a));
            if (bb_omega > 0 && bb_omega < 2) {
                pure("n_omega", n_omega(bb_omega));
                const AOmegaBounds ab = a_omega_bounds(bb_omega);
                pure("a_omega_lower", ab.lower);
                pure("a_omega_upper", ab.upper);
            }
            if (common.format == "json")
                os << bound_reports_json(rows) << "\n";
            else
                write_bound_reports(os, rows);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
