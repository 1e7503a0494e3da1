#pragma once

#include "gprotor/bounds.hpp"
#include "gprotor/critical.hpp"
#include "gprotor/dm_solver.hpp"
#include "gprotor/multicomponent.hpp"
#include "gprotor/solver2d.hpp"
#include "gprotor/stability.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace gprotor {

/// Key-value configuration text: one `key = value` per line, '#' comments.
std::map<std::string, std::string> load_config(const std::string& path);

std::string format_double(double v);

void write_profile(std::ostream& os, const VortexProfile& p);
VortexProfile read_profile(std::istream& is);

void write_stability_report(std::ostream& os, const StabilityReport& r);
std::string stability_report_json(const StabilityReport& r);

void write_critical_csv(std::ostream& os, const CriticalFrequencyTable& t);
std::string critical_table_json(const CriticalFrequencyTable& t);

void write_field_snapshot(std::ostream& os, const Field2D& phi);

void write_dm_state(std::ostream& os, const DmState& st, bool with_orbitals = true);

void write_bound_reports(std::ostream& os, const std::vector<BoundReport>& reports);
std::string bound_reports_json(const std::vector<BoundReport>& reports);

void write_breaking_diagnosis(std::ostream& os, const BreakingDiagnosis& d,
                              const Minimizer2D& m);

void write_trichotomy(std::ostream& os, const TrichotomyReport& r);

}  // namespace gprotor
