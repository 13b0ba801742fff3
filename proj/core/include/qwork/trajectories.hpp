#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "qwork/operators.hpp"
#include "qwork/protocol.hpp"

namespace qwork {

// One measurement history: a level index per alphabet slot, K+1 entries.
struct Trajectory {
  std::vector<int> indices;
};

struct TrajectoryRecord {
  Trajectory trajectory;
  double work = 0.0;
  Complex amplitude;             // Tr[C rho] for the chained class operator C
  double linear_weight = 0.0;    // Re amplitude
  double measured_weight = 0.0;  // Tr[C^dag C rho], tiny negatives clamped
};

struct EnumerationGuard {
  std::uint64_t cap = std::uint64_t(1) << 24;
};

std::uint64_t trajectory_count(const DiscretizedProtocol& proto);

// ---------------------------------------------------------------------------
// Per-trajectory quantities. The final slot never contributes work; a K-step
// protocol sums its first K power eigenvalues times dt.

double work_value(const Trajectory& t, const DiscretizedProtocol& proto);

Complex trajectory_amplitude(const Trajectory& t, const DiscretizedProtocol& proto,
                             const DensityMatrix& rho);
double linear_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                     const DensityMatrix& rho);
double measured_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                       const DensityMatrix& rho);

// Weight of the order-reversed class operator P(0)...P(K) and the negated
// work, i.e. one history of the time-reversed process.
std::pair<double, double> reverse_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                                         const DensityMatrix& rho);
double reverse_measured_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                               const DensityMatrix& rho);

// Fixed-basis protocols only: work split into the endpoint energy difference
// minus the energy exchanged at basis hops, w = endpoint_diff - delta_e.
struct EndpointDecomposition {
  double endpoint_diff = 0.0;
  double delta_e = 0.0;
};
EndpointDecomposition endpoint_decomposition(const Trajectory& t,
                                             const DiscretizedProtocol& proto);

// ---------------------------------------------------------------------------
// Enumeration. Depth-first over the alphabet with partial chain amplitudes
// reused along the prefix, memory O(K). Refuses to start when the trajectory
// count exceeds the guard cap.

using RecordSink = std::function<void(const TrajectoryRecord&)>;
void enumerate_trajectories(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                            const EnumerationGuard& guard, const RecordSink& sink);

// Work-binned sums from one traversal. `reverse_*` fields are filled only
// when requested; `amplitude_total` is sum_n Tr[C_n rho], identically 1 by
// completeness, kept as a cross-check.
struct WorkSums {
  double linear = 0.0;
  double measured = 0.0;
  double reverse_linear = 0.0;
  double reverse_measured = 0.0;
};
struct WorkAccumulation {
  std::map<double, WorkSums> bins;  // keyed by exact work value
  Complex amplitude_total;
  std::uint64_t count = 0;
};
WorkAccumulation accumulate_work(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                 const EnumerationGuard& guard, int threads = 1,
                                 bool with_reverse = false);

// Debug spill, one record per line: comma-joined indices, then work,
// Re/Im amplitude, linear and measured weight, tab-separated.
void spill_records(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                   const EnumerationGuard& guard, std::ostream& out);

// Measured-statistics bins computed by transfer-matrix recursion over the
// (work, level) state space instead of explicit enumeration. Exact for
// rank-1 alphabets at any K; the cap bounds the number of distinct partial
// work values instead of the trajectory count.
std::map<double, double> measured_bins_markov(const DiscretizedProtocol& proto,
                                              const DensityMatrix& rho,
                                              std::uint64_t state_cap = std::uint64_t(1) << 24);

}  // namespace qwork
