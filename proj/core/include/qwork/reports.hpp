#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qwork {

struct MomentReport {
  std::vector<int> orders;
  std::vector<double> enumerated;   // moments of the binned statistics
  std::vector<double> closed_form;  // operator expressions, continuum limit
  std::vector<double> gaps;         // |enumerated - closed_form|
};

struct JarzynskiReport {
  double beta = 0.0;
  double lhs = 0.0;      // <exp(-beta w)>
  double rhs = 0.0;      // Z_tau / Z_0
  double delta_f = 0.0;  // (1/beta) ln(Z_0 / Z_tau)
  double gap = 0.0;      // lhs - rhs
  bool commuting = false;
  bool rho_thermal = false;
  // Operator form Tr[exp(-beta (H_H(tau) - H(0))) rho] when the distribution
  // route was also taken; the difference is a discretization diagnostic.
  std::optional<double> lhs_closed_form;
  std::optional<double> discretization_gap;
};

struct TimeReversalReport {
  double histories_gap = 0.0;
  double measured_gap = 0.0;
  double tpm_gap = 0.0;
  double mh_gap = 0.0;
  // Per-bin correction sum_n delta[w + w_n] Tr[[C_n, C_n^dag] rho]; the
  // backward measured statistics equal the mirrored forward ones plus this.
  std::vector<std::pair<double, double>> measured_commutator_correction;
};

struct ComparisonRow {
  double min_weight = 0.0;
  double energy_conservation_gap = 0.0;
  double time_reversal_gap = 0.0;
  double jarzynski_gap = 0.0;
};

struct ComparisonReport {
  std::map<std::string, ComparisonRow> rows;  // keyed by distribution name
  double histories_jarzynski_closed_form_gap = 0.0;
  bool classical_limit = false;  // rho, H(0), H_H(tau) mutually commute
  std::optional<double> coincidence_max_gap;  // set when classical_limit
};

// JSON documents with numbers rounded to 12 significant digits.
std::string to_json(const MomentReport& report);
std::string to_json(const JarzynskiReport& report);
std::string to_json(const TimeReversalReport& report);
std::string to_json(const ComparisonReport& report);

}  // namespace qwork
