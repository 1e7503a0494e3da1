#include "gprotor/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace gprotor {

std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_profile(std::ostream& os, const VortexProfile& p) {
    os << "# vortex profile\n";
    os << "# n = " << format_double(p.n) << "\n";
    os << "# a = " << format_double(p.a) << "\n";
    os << "# energy = " << format_double(p.energy) << "\n";
    os << "# mu_tilde = " << format_double(p.mu_tilde) << "\n";
    os << "# columns: r f g\n";
    for (int i = 0; i < p.grid.size(); ++i)
        os << format_double(p.grid.r[i]) << " " << format_double(p.f[i]) << " "
           << format_double(p.g[i]) << "\n";
}

VortexProfile read_profile(std::istream& is) {
    VortexProfile p;
    std::string line;
    std::vector<double> r, f, g;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key, eq;
            double value;
            if (ls >> key >> eq >> value && eq == "=") {
                if (key == "n") p.n = value;
                if (key == "a") p.a = value;
                if (key == "energy") p.energy = value;
                if (key == "mu_tilde") p.mu_tilde = value;
            }
            continue;
        }
        std::istringstream ls(line);
        double rv, fv, gv;
        if (ls >> rv >> fv >> gv) {
            r.push_back(rv);
            f.push_back(fv);
            g.push_back(gv);
        }
    }
    if (r.size() < 2) throw std::runtime_error("profile file too short");
    const double h = r[1] - r[0];
    p.grid = RadialGrid::make(static_cast<int>(r.size()), r.back() + 0.5 * h);
    p.f = Eigen::Map<ArrayXd>(f.data(), static_cast<long>(f.size()));
    p.g = Eigen::Map<ArrayXd>(g.data(), static_cast<long>(g.size()));
    p.converged = true;
    return p;
}

namespace {

const char* verdict_name(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::Stable:
            return "stable";
        case StabilityVerdict::Unstable:
            return "unstable";
        default:
            return "marginal";
    }
}

}  // namespace

void write_stability_report(std::ostream& os, const StabilityReport& r) {
    os << "stability report: n = " << format_double(r.n) << ", a = " << format_double(r.params.a)
       << ", omega = " << format_double(r.params.omega) << "\n";
    os << "verdict: " << verdict_name(r.verdict) << "\n";
    os << "zero modes: Q(i*phi) = " << format_double(r.q_phase)
       << ", Q(dphi/dtheta) = " << format_double(r.q_rotation)
       << " (band " << format_double(r.zero_band) << ")\n";
    os << "channels (m, lambda_min):\n";
    for (const auto& c : r.channels) {
        os << "  " << c.m << " " << format_double(c.lambda_min);
        if (c.has_phase_mode) os << "  [phase mode at " << format_double(c.phase_mode) << "]";
        os << "\n";
    }
    os << "certificates (name, Q, Rayleigh):\n";
    for (const auto& c : r.certificates) {
        os << "  " << c.name << " " << format_double(c.q_value) << " "
           << format_double(c.rayleigh);
        if (!c.applicable) os << " [not applicable]";
        if (!c.note.empty()) os << "  # " << c.note;
        os << "\n";
    }
}

std::string stability_report_json(const StabilityReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["a"] = r.params.a;
    j["omega"] = r.params.omega;
    j["verdict"] = verdict_name(r.verdict);
    j["q_phase"] = r.q_phase;
    j["q_rotation"] = r.q_rotation;
    j["zero_band"] = r.zero_band;
    for (const auto& c : r.channels)
        j["channels"].push_back({{"m", c.m}, {"lambda_min", c.lambda_min}});
    for (const auto& c : r.certificates)
        j["certificates"].push_back({{"name", c.name},
                                     {"q", c.q_value},
                                     {"rayleigh", c.rayleigh},
                                     {"applicable", c.applicable}});
    return j.dump(2);
}

void write_critical_csv(std::ostream& os, const CriticalFrequencyTable& t) {
    os << "n,a,E_n,Omega_n,upper,lower,slack_upper,slack_lower\n";
    for (const auto& e : t.entries)
        os << e.n << "," << format_double(t.a) << "," << format_double(e.e_n) << ","
           << format_double(e.omega_n) << "," << format_double(e.bounds.upper) << ","
           << format_double(e.bounds.lower) << "," << format_double(e.bounds.slack_upper) << ","
           << format_double(e.bounds.slack_lower) << "\n";
}

std::string critical_table_json(const CriticalFrequencyTable& t) {
    nlohmann::json j;
    j["a"] = t.a;
    for (const auto& e : t.entries)
        j["entries"].push_back({{"n", e.n},
                                {"E_n", e.e_n},
                                {"Omega_n", e.omega_n},
                                {"upper", e.bounds.upper},
                                {"lower", e.bounds.lower},
                                {"slack_upper", e.bounds.slack_upper},
                                {"slack_lower", e.bounds.slack_lower}});
    return j.dump(2);
}

void write_field_snapshot(std::ostream& os, const Field2D& phi) {
    os << "# columns: x y re_phi im_phi density\n";
    for (int j = 0; j < phi.grid.n; ++j)
        for (int i = 0; i < phi.grid.n; ++i) {
            const auto v = phi.values(i, j);
            os << format_double(phi.grid.coord[i]) << " " << format_double(phi.grid.coord[j])
               << " " << format_double(v.real()) << " " << format_double(v.imag()) << " "
               << format_double(std::norm(v)) << "\n";
        }
}

void write_dm_state(std::ostream& os, const DmState& st, bool with_orbitals) {
    os << "# dm state: a = " << format_double(st.params.a)
       << ", omega = " << format_double(st.params.omega) << "\n";
    os << "# energy = " << format_double(st.energy) << ", mu_dm = " << format_double(st.mu_dm)
       << ", rank = " << dm_rank(st) << "\n";
    os << "# occupations (j, lambda_j, sector_energy):\n";
    for (std::size_t k = 0; k < st.sectors.size(); ++k)
        os << st.sectors[k] << " " << format_double(st.occupations[k]) << " "
           << format_double(st.sector_energies[k]) << "\n";
    if (!with_orbitals) return;
    os << "# orbitals: r then f_j columns for occupied sectors\n";
    for (int i = 0; i < st.grid.size(); ++i) {
        os << format_double(st.grid.r[i]);
        for (std::size_t k = 0; k < st.orbitals.size(); ++k)
            if (st.occupations[k] > 1e-8) os << " " << format_double(st.orbitals[k][i]);
        os << "\n";
    }
}

void write_bound_reports(std::ostream& os, const std::vector<BoundReport>& reports) {
    os << "name inputs bound observed slack status\n";
    for (const auto& r : reports)
        os << r.name << " [" << r.inputs << "] " << format_double(r.bound_value) << " "
           << format_double(r.observed_value) << " " << format_double(r.slack) << " "
           << (r.satisfied ? "OK" : "VIOLATED") << "\n";
}

std::string bound_reports_json(const std::vector<BoundReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports)
        j.push_back({{"name", r.name},
                     {"inputs", r.inputs},
                     {"bound", r.bound_value},
                     {"observed", r.observed_value},
                     {"slack", r.slack},
                     {"satisfied", r.satisfied}});
    return j.dump(2);
}

void write_breaking_diagnosis(std::ostream& os, const BreakingDiagnosis& d,
                              const Minimizer2D& m) {
    os << "E_2d = " << format_double(d.e_2d) << "\n";
    os << "best vortex: n = " << d.best_vortex_n
       << ", energy = " << format_double(d.best_vortex_energy) << "\n";
    os << "gap = " << format_double(d.gap) << "\n";
    os << "L expectation = " << format_double(m.l_expectation) << "\n";
    os << "significant channels = " << d.significant_channels << "\n";
    os << "nonradiality = " << format_double(d.nonradiality) << "\n";
    os << "breaking = " << (d.breaking ? "yes" : "no") << "\n";
    os << "spectrum (m, p_m):\n";
    for (int i = 0; i < m.spectrum.size(); ++i)
        os << "  " << (i - m.spectrum_m_max) << " " << format_double(m.spectrum[i]) << "\n";
}

void write_trichotomy(std::ostream& os, const TrichotomyReport& r) {
    os << "E_dm = " << format_double(r.e_dm) << ", rank = " << r.n_dm
       << ", E_gp = " << format_double(r.e_gp) << "\n";
    for (const auto& row : r.rows) {
        const char* label = row.label == TrichotomyCase::EqualsDm
                                ? "(i) equals DM"
                                : (row.label == TrichotomyCase::AboveDm ? "(ii) above DM"
                                                                        : "(iii) below GP");
        os << "n_c = " << row.n_c << ": E = " << format_double(row.energy) << "  " << label
           << (row.consistent ? "" : "  INCONSISTENT") << (row.note.empty() ? "" : "  # ")
           << row.note << "\n";
    }
    if (r.pair_density_l1 > 0.0)
        os << "two-component density L1 separation = " << format_double(r.pair_density_l1)
           << "\n";
}

}  // namespace gprotor
