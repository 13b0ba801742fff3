#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwork/distributions.hpp"
#include "qwork/operators.hpp"
#include "qwork/protocol.hpp"

namespace qwork {

struct RunSettings {
  int steps = 0;
  std::optional<double> beta;      // thermal initial state
  std::optional<DensityMatrix> rho;  // explicit initial state (exactly one of the two)
  double bin_tol = -1.0;
  std::uint64_t enum_cap = std::uint64_t{1} << 24;
  std::string csv_path = "dist.csv";
  std::string report_path = "report.json";
  std::vector<DistributionOrigin> selected{
      DistributionOrigin::histories, DistributionOrigin::measured, DistributionOrigin::tpm,
      DistributionOrigin::margenau_hill};
};

struct ParsedConfig {
  ProtocolSpec spec;
  RunSettings run;
};

// Strict INI-style document with sections [protocol], [run], [output].
// Unknown keys, missing required keys, malformed values, non-Hermitian
// matrices and K <= 0 raise ConfigError naming the key and line.
ParsedConfig parse_protocol_config(const std::string& text);

// Thermal state of H(0) at run.beta, or the explicit run.rho.
DensityMatrix initial_state(const DiscretizedProtocol& proto, const RunSettings& run);

}  // namespace qwork
