// Work-distribution CLI: builds the four distributions from a protocol
// config, compares them, sweeps parameters, and reproduces the resonant
// qubit-drive cumulative plot.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qwork/config.hpp"
#include "qwork/csv.hpp"
#include "qwork/distributions.hpp"
#include "qwork/errors.hpp"
#include "qwork/format.hpp"
#include "qwork/protocol.hpp"
#include "qwork/reports.hpp"

namespace fs = std::filesystem;
using namespace qwork;

namespace {

// A built-in self-check failed: the tool refuses to emit known-bad artifacts.
struct RegressionError : Error {
  using Error::Error;
};

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  bool strict_degeneracy = false;
};

ParsedConfig load_config(const GlobalOpts& g) {
  if (g.config_path.empty()) throw ConfigError("--config is required for this command");
  std::ifstream in(g.config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + g.config_path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_protocol_config(text.str());
}

DiscretizedProtocol build(const GlobalOpts& g, const ParsedConfig& cfg, int steps) {
  DiscretizeOptions opt;
  opt.strict_degeneracy = g.strict_degeneracy;
  return discretize(cfg.spec, steps, opt);
}

DistributionOptions dist_options(const GlobalOpts& g, const RunSettings& run) {
  DistributionOptions opt;
  opt.bin_tol = run.bin_tol;
  opt.guard.cap = run.enum_cap;
  opt.threads = g.threads;
  return opt;
}

fs::path resolve(const GlobalOpts& g, const fs::path& p) {
  const fs::path full = p.is_absolute() ? p : fs::path(g.out_dir) / p;
  if (full.has_parent_path()) fs::create_directories(full.parent_path());
  return full;
}

// dist.csv -> dist_histories.csv and friends.
fs::path origin_csv(const fs::path& base, DistributionOrigin origin) {
  fs::path named = base.parent_path() / base.stem();
  named += std::string("_") + origin_name(origin);
  named += base.has_extension() ? base.extension() : fs::path(".csv");
  return named;
}

double rounded(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw ConfigError("write failed for '" + path.string() + "'");
}

WorkDistribution build_origin(DistributionOrigin origin, const DiscretizedProtocol& proto,
                              const DensityMatrix& rho, const DistributionOptions& opt) {
  switch (origin) {
    case DistributionOrigin::histories:
      return histories_distribution(proto, rho, opt);
    case DistributionOrigin::measured:
      return measured_distribution(proto, rho, opt);
    case DistributionOrigin::tpm:
      return tpm_distribution(proto, rho, opt.bin_tol);
    case DistributionOrigin::margenau_hill:
      return mh_distribution(proto, rho, opt.bin_tol);
  }
  throw DomainError("unknown distribution origin");
}

int cmd_dist(const GlobalOpts& g, const std::string& spill_path) {
  const ParsedConfig cfg = load_config(g);
  const DiscretizedProtocol proto = build(g, cfg, cfg.run.steps);
  const DensityMatrix rho = initial_state(proto, cfg.run);
  const DistributionOptions opt = dist_options(g, cfg.run);

  nlohmann::json report;
  const bool wants_enumerated =
      std::any_of(cfg.run.selected.begin(), cfg.run.selected.end(), [](DistributionOrigin o) {
        return o == DistributionOrigin::histories || o == DistributionOrigin::measured;
      });
  std::optional<EnumeratedDistributions> pair;
  if (wants_enumerated) pair = enumerated_distributions(proto, rho, opt);

  for (DistributionOrigin origin : cfg.run.selected) {
    WorkDistribution dist = origin == DistributionOrigin::histories ? pair->histories
                            : origin == DistributionOrigin::measured
                                ? pair->measured
                                : build_origin(origin, proto, rho, opt);
    const fs::path csv = resolve(g, origin_csv(cfg.run.csv_path, origin));
    write_distribution_csv(csv.string(), dist);
    report["distributions"][origin_name(origin)] = {
        {"mean", rounded(dist.mean())},
        {"variance", rounded(dist.variance())},
        {"min_weight", rounded(dist.min_weight())},
        {"support_points", dist.support().size()},
        {"csv", csv.string()},
    };
  }

  if (!spill_path.empty()) {
    std::ofstream out(resolve(g, spill_path), std::ios::binary);
    if (!out) throw ConfigError("cannot open spill file '" + spill_path + "'");
    spill_records(proto, rho, opt.guard, out);
  }

  write_text(resolve(g, cfg.run.report_path), report.dump(2) + "\n");
  return 0;
}

int cmd_compare(const GlobalOpts& g) {
  const ParsedConfig cfg = load_config(g);
  const DiscretizedProtocol proto = build(g, cfg, cfg.run.steps);
  const DensityMatrix rho = initial_state(proto, cfg.run);
  // Explicit-state runs still need a reference inverse temperature for the
  // Jarzynski column; 1.0 is used and flagged via rho_thermal = false.
  const double beta = cfg.run.beta && *cfg.run.beta > 0.0 ? *cfg.run.beta : 1.0;
  const ComparisonReport report =
      comparison_report(proto, rho, beta, dist_options(g, cfg.run));
  write_text(resolve(g, cfg.run.report_path), to_json(report));
  return 0;
}

int cmd_moments(const GlobalOpts& g, int max_order) {
  const ParsedConfig cfg = load_config(g);
  const DiscretizedProtocol proto = build(g, cfg, cfg.run.steps);
  const DensityMatrix rho = initial_state(proto, cfg.run);
  const MomentReport report =
      moment_report(proto, rho, max_order, dist_options(g, cfg.run));
  std::cout << to_json(report);
  return 0;
}

WorkDistribution measured_any_route(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                    const RunSettings& run, const DistributionOptions& opt) {
  if (proto.alphabet.all_rank_one())
    return measured_distribution_markov(proto, rho, run.bin_tol, run.enum_cap);
  return measured_distribution(proto, rho, opt);
}

int cmd_sweep(const GlobalOpts& g, const std::string& axis, std::vector<double> values) {
  const ParsedConfig cfg = load_config(g);
  if (values.empty()) throw ConfigError("sweep needs --values");
  if (std::adjacent_find(values.begin(), values.end(), std::greater_equal<double>()) !=
      values.end())
    throw ConfigError("sweep values must be strictly ascending");

  const bool is_ramp = std::holds_alternative<LinearRampSpec>(cfg.spec.variant);
  std::ostringstream csv;
  csv << "value,first_moment_gap,jarzynski_gap,zeno_tv\n";

  auto row = [&](double value, const DiscretizedProtocol& proto, const DensityMatrix& rho,
                 double jz_beta) {
    const double fm_gap =
        std::abs(first_moment_identity(proto, rho) - delta_u(proto, rho));
    // beta = 0 is the infinite-temperature edge where both sides are 1.
    const double jz_gap =
        jz_beta > 0.0 ? jarzynski_report(proto, rho, jz_beta).gap : 0.0;
    double zeno = std::numeric_limits<double>::quiet_NaN();
    if (is_ramp) {
      const WorkDistribution measured =
          measured_any_route(proto, rho, cfg.run, dist_options(g, cfg.run));
      zeno = zeno_tv_distance(measured, zeno_limit_distribution(cfg.spec, rho, cfg.run.bin_tol));
    }
    csv << format_number(value) << ',' << format_number(fm_gap) << ','
        << format_number(jz_gap) << ',' << format_number(zeno) << '\n';
  };

  if (axis == "K") {
    if (std::holds_alternative<TabulatedSpec>(cfg.spec.variant))
      throw ConfigError("K sweep needs a protocol that can be re-discretized");
    for (double v : values) {
      const int steps = static_cast<int>(std::llround(v));
      if (steps <= 0 || std::abs(v - steps) > 0.0)
        throw ConfigError("K sweep values must be positive integers");
      const DiscretizedProtocol proto = build(g, cfg, steps);
      const DensityMatrix rho = initial_state(proto, cfg.run);
      row(v, proto, rho, cfg.run.beta.value_or(0.0));
    }
  } else if (axis == "beta") {
    const DiscretizedProtocol proto = build(g, cfg, cfg.run.steps);
    for (double beta : values) {
      if (beta < 0.0) throw ConfigError("beta sweep values must be >= 0");
      const DensityMatrix rho =
          cfg.run.rho ? *cfg.run.rho : thermal_state(proto.initial_h(), beta);
      row(beta, proto, rho, beta);
    }
  } else {
    throw ConfigError("sweep axis must be K or beta, got '" + axis + "'");
  }

  write_text(resolve(g, cfg.run.csv_path), csv.str());
  return 0;
}

int cmd_fig2(const GlobalOpts& g) {
  // Frozen reproduction: resonant drive, K = 15 steps of pi/(2g), beta = 0.1.
  ProtocolSpec spec;
  spec.variant = QubitDriveSpec{1.0, 1.0};
  spec.tau = 15.0 * std::numbers::pi / 2.0;
  const DiscretizedProtocol proto = discretize(spec, 15);
  const DensityMatrix rho = thermal_state(proto.initial_h(), 0.1);

  DistributionOptions opt;
  opt.threads = g.threads;
  const EnumeratedDistributions both = enumerated_distributions(proto, rho, opt);

  bool negative_bin = false, non_monotone = false;
  for (const auto& p : both.histories.support()) negative_bin |= p.weight < 0.0;
  const auto q = cumulative(both.histories);
  for (std::size_t i = 1; i < q.size(); ++i) non_monotone |= q[i].second < q[i - 1].second;
  if (!negative_bin || !non_monotone)
    throw RegressionError("histories distribution lost its negativity signature");
  for (const auto& p : both.measured.support())
    if (p.weight < 0.0)
      throw RegressionError("measured distribution produced a negative probability");

  write_distribution_csv(resolve(g, "fig2_histories.csv").string(), both.histories);
  write_distribution_csv(resolve(g, "fig2_measured.csv").string(), both.measured);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum work statistics for unitarily driven finite systems"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "Protocol configuration file")
      ->envname("QWORK_CONFIG");
  app.add_option("--out", g.out_dir, "Output directory (default .)");
  app.add_option("--threads", g.threads, "Enumeration worker count")
      ->check(CLI::PositiveNumber);
  app.add_flag("--strict-degeneracy", g.strict_degeneracy,
               "Refuse degenerate power spectra instead of merging levels");

  auto* dist = app.add_subcommand("dist", "Build the selected work distributions");
  std::string spill_path;
  dist->add_option("--spill", spill_path, "Also dump every trajectory record to this file");

  auto* compare = app.add_subcommand("compare", "Property matrix across all four distributions");

  auto* sweep = app.add_subcommand("sweep", "Scan K or beta and tabulate convergence gaps");
  std::string axis;
  std::vector<double> values;
  sweep->add_option("--axis", axis, "K or beta")->required();
  sweep->add_option("--values", values, "Ascending axis values")
      ->required()
      ->delimiter(',');

  auto* fig2 = app.add_subcommand("fig2", "Frozen resonant-qubit cumulative-distribution run");

  auto* moments = app.add_subcommand("moments", "Enumerated vs closed-form work moments");
  int max_order = 4;
  moments->add_option("--max-order", max_order, "Highest moment order")
      ->check(CLI::NonNegativeNumber);

  // Global flags remain usable after the subcommand name.
  for (CLI::App* sub : {dist, compare, sweep, fig2, moments}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (dist->parsed()) return cmd_dist(g, spill_path);
    if (compare->parsed()) return cmd_compare(g);
    if (sweep->parsed()) return cmd_sweep(g, axis, values);
    if (fig2->parsed()) return cmd_fig2(g);
    if (moments->parsed()) return cmd_moments(g, max_order);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const RegressionError& e) {
    std::cerr << "regression: " << e.what() << "\n";
    return 5;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
