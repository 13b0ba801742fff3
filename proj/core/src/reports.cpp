#include "qwork/reports.hpp"

#include <cstdlib>

#include "json.hpp"
#include "qwork/format.hpp"

namespace qwork {

namespace {

// Round-trip through the canonical 12-digit text form so report files and
// CSV files agree exactly on every number they share.
double rounded(double x) {
  return std::strtod(format_number(x).c_str(), nullptr);
}

nlohmann::json num_array(const std::vector<double>& values) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : values) arr.push_back(rounded(v));
  return arr;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_json(const MomentReport& report) {
  nlohmann::json j;
  j["orders"] = report.orders;
  j["enumerated"] = num_array(report.enumerated);
  j["closed_form"] = num_array(report.closed_form);
  j["gaps"] = num_array(report.gaps);
  return dump(j);
}

std::string to_json(const JarzynskiReport& report) {
  nlohmann::json j;
  j["beta"] = rounded(report.beta);
  j["lhs"] = rounded(report.lhs);
  j["rhs"] = rounded(report.rhs);
  j["delta_f"] = rounded(report.delta_f);
  j["gap"] = rounded(report.gap);
  j["commuting"] = report.commuting;
  j["rho_thermal"] = report.rho_thermal;
  if (report.lhs_closed_form) j["lhs_closed_form"] = rounded(*report.lhs_closed_form);
  if (report.discretization_gap) j["discretization_gap"] = rounded(*report.discretization_gap);
  return dump(j);
}

std::string to_json(const TimeReversalReport& report) {
  nlohmann::json j;
  j["histories_gap"] = rounded(report.histories_gap);
  j["measured_gap"] = rounded(report.measured_gap);
  j["tpm_gap"] = rounded(report.tpm_gap);
  j["mh_gap"] = rounded(report.mh_gap);
  nlohmann::json corr = nlohmann::json::array();
  for (const auto& [w, c] : report.measured_commutator_correction)
    corr.push_back({rounded(w), rounded(c)});
  j["measured_commutator_correction"] = corr;
  return dump(j);
}

std::string to_json(const ComparisonReport& report) {
  nlohmann::json j;
  nlohmann::json rows;
  for (const auto& [name, row] : report.rows) {
    rows[name] = {{"min_weight", rounded(row.min_weight)},
                  {"energy_conservation_gap", rounded(row.energy_conservation_gap)},
                  {"time_reversal_gap", rounded(row.time_reversal_gap)},
                  {"jarzynski_gap", rounded(row.jarzynski_gap)}};
  }
  j["rows"] = rows;
  j["histories_jarzynski_closed_form_gap"] =
      rounded(report.histories_jarzynski_closed_form_gap);
  j["classical_limit"] = report.classical_limit;
  if (report.coincidence_max_gap) j["coincidence_max_gap"] = rounded(*report.coincidence_max_gap);
  return dump(j);
}

}  // namespace qwork
