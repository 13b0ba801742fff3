#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qwork/operators.hpp"
#include "qwork/protocol.hpp"
#include "qwork/reports.hpp"
#include "qwork/trajectories.hpp"

namespace qwork {

enum class DistributionKind { quasi, probability };
enum class DistributionOrigin { histories, measured, tpm, margenau_hill };

const char* origin_name(DistributionOrigin origin);

struct WorkPoint {
  double w = 0.0;
  double weight = 0.0;
};

// Discrete work statistics on a strictly ascending support. Raw values are
// sorted and clustered: neighbours closer than bin_tol share a bin whose
// label is the first value seen, snapped onto the protocol lattice when one
// exists. Weights must sum to 1; probability-kind weights may dip below zero
// only by rounding (clamped), quasi-kind weights may be genuinely negative.
class WorkDistribution {
 public:
  static WorkDistribution from_raw(std::vector<WorkPoint> raw, DistributionKind kind,
                                   DistributionOrigin origin,
                                   double bin_tol = -1.0,  // < 0: tol::bin_factor x max|w|
                                   std::optional<double> lattice = std::nullopt);

  const std::vector<WorkPoint>& support() const { return points_; }
  DistributionKind kind() const { return kind_; }
  DistributionOrigin origin() const { return origin_; }
  double bin_tol() const { return bin_tol_; }

  double total_weight() const;
  double min_weight() const;
  double mean() const;
  double variance() const;

  // Identity when re-binned at the same tolerance.
  WorkDistribution rebinned(double bin_tol) const;

 private:
  WorkDistribution() = default;
  std::vector<WorkPoint> points_;
  DistributionKind kind_ = DistributionKind::quasi;
  DistributionOrigin origin_ = DistributionOrigin::histories;
  double bin_tol_ = 0.0;
};

double moment(const WorkDistribution& dist, int order);
std::vector<std::pair<double, double>> cumulative(const WorkDistribution& dist);

// Largest bin-by-bin weight difference, bins aligned within match_tol and
// missing bins read as zero. match_tol < 0 picks a width from both supports.
double max_bin_gap(const WorkDistribution& a, const WorkDistribution& b,
                   double match_tol = -1.0);
// Same, but bins of `backward` at w are held against bins of `forward` at -w.
double time_reversal_gap(const WorkDistribution& backward, const WorkDistribution& forward,
                         double match_tol = -1.0);

// ---------------------------------------------------------------------------
// Builders.

struct DistributionOptions {
  double bin_tol = -1.0;
  EnumerationGuard guard{};
  int threads = 1;
};

WorkDistribution histories_distribution(const DiscretizedProtocol& proto,
                                        const DensityMatrix& rho,
                                        const DistributionOptions& options = {});
WorkDistribution measured_distribution(const DiscretizedProtocol& proto,
                                       const DensityMatrix& rho,
                                       const DistributionOptions& options = {});
// Both of the above from a single traversal.
struct EnumeratedDistributions {
  WorkDistribution histories;
  WorkDistribution measured;
};
EnumeratedDistributions enumerated_distributions(const DiscretizedProtocol& proto,
                                                 const DensityMatrix& rho,
                                                 const DistributionOptions& options = {});

// Transfer-matrix route to the measured statistics; exact for rank-1
// alphabets and usable far beyond the enumeration cap.
WorkDistribution measured_distribution_markov(const DiscretizedProtocol& proto,
                                              const DensityMatrix& rho, double bin_tol = -1.0,
                                              std::uint64_t state_cap = std::uint64_t(1) << 24);

// Projective start and end measurements: joint weights
// Tr[Pi_m(tau) Pi_n(0) rho Pi_n(0) Pi_m(tau)] at w = e_m(tau) - e_n(0), with
// the final projectors taken in the Heisenberg picture.
WorkDistribution tpm_distribution(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                  double bin_tol = -1.0);
// Measurements applied in reversed order, binned at -w.
WorkDistribution tpm_backward_distribution(const DiscretizedProtocol& proto,
                                           const DensityMatrix& rho, double bin_tol = -1.0);
// Symmetrized endpoint weights Re Tr[Pi_m(tau) Pi_n(0) rho].
WorkDistribution mh_distribution(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                 double bin_tol = -1.0);

// ---------------------------------------------------------------------------
// Operator-level quantities.

// Tr[(H_H(tau) - H(0))^m rho]
double closed_form_moment(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                          int order);
// (1/2) sum_l binom(m,l) Tr[{H_H(tau)^l, (-H(0))^(m-l)} rho]
double mh_closed_form_moment(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                             int order);
// Tr[exp(i lambda (H_H(tau) - H(0))) rho] for complex lambda.
Complex mgf(const DiscretizedProtocol& proto, const DensityMatrix& rho, Complex lambda);

// Mean energy change Tr[(H_H(tau) - H(0)) rho].
double delta_u(const DiscretizedProtocol& proto, const DensityMatrix& rho);
// Exact finite-step identities for the histories mean and second moment.
double first_moment_identity(const DiscretizedProtocol& proto, const DensityMatrix& rho);
double second_moment_identity(const DiscretizedProtocol& proto, const DensityMatrix& rho);

MomentReport moment_report(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                           int max_order, const DistributionOptions& options = {});

// Fluctuation relation <exp(-beta w)> vs Z_tau/Z_0 for a given distribution,
// plus the operator form as a discretization diagnostic.
JarzynskiReport jarzynski_report(const WorkDistribution& dist, const DiscretizedProtocol& proto,
                                 const DensityMatrix& rho, double beta);
// Operator form only (continuum histories value).
JarzynskiReport jarzynski_report(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                 double beta);

// Forward vs reversed process for all four statistics.
TimeReversalReport time_reversal_check(const DiscretizedProtocol& proto,
                                       const DensityMatrix& rho,
                                       const DistributionOptions& options = {});

ComparisonReport comparison_report(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                   double beta, const DistributionOptions& options = {});

// ---------------------------------------------------------------------------
// Freeze limit of the measured statistics: project on the initial power
// eigenbasis, displace by the full schedule swing.

WorkDistribution zeno_limit_distribution(const ProtocolSpec& spec, const DensityMatrix& rho,
                                         double bin_tol = -1.0);
// Total variation against the limit, measured bins assigned to the nearest
// limit point.
double zeno_tv_distance(const WorkDistribution& measured, const WorkDistribution& limit);

}  // namespace qwork
