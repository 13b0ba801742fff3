#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qwork/operators.hpp"
#include "qwork/schedule.hpp"

namespace qwork {

// ---------------------------------------------------------------------------
// Drive variants.

// Rotating transverse field on a qubit:
//   H(t) = (omega/2) sz + (g/2) (cos(omega t) sx + sin(omega t) sy).
// Propagator and Heisenberg-picture power operator are known in closed form.
struct QubitDriveSpec {
  double omega = 1.0;
  double g = 1.0;
};

// H(t) = A + lambda(t) B.
struct LinearRampSpec {
  HermitianOperator a;
  HermitianOperator b;
  Schedule lambda;
};

// H(t) = sum_n E_n(t) |b_n><b_n| with a fixed orthonormal basis (columns of
// `basis`) and one energy track per level. Everything commutes, so this is
// the classical corner of the model space.
struct FixedBasisSpec {
  Matrix basis;
  std::vector<Schedule> tracks;
};

// Hamiltonian known only on the time grid; K+1 samples for K steps.
struct TabulatedSpec {
  std::vector<HermitianOperator> hamiltonians;
};

struct ProtocolSpec {
  std::variant<QubitDriveSpec, LinearRampSpec, FixedBasisSpec, TabulatedSpec> variant;
  double tau = 0.0;
};

Eigen::Index protocol_dim(const ProtocolSpec& spec);
void validate(const ProtocolSpec& spec);

// ---------------------------------------------------------------------------
// Discretization.

enum class PropagatorBackend {
  automatic,  // analytic where the variant has one, stepped for tabulated
  analytic,
  stepped,    // V_j = exp(-i H_j dt) V_{j-1}
};

struct DiscretizeOptions {
  PropagatorBackend backend = PropagatorBackend::automatic;
  // Sample power operators at t_j + dt/2 instead of t_j. Analytic backends only.
  bool midpoint_power = false;
  bool strict_degeneracy = false;
  double degeneracy_tol = -1.0;  // < 0: default window
  // Fine-grid size for ramp propagators under the analytic backend; the
  // midpoint product over this grid stands in for the exact time-ordered
  // exponential, with error O(tau^3 / substeps^2).
  int ramp_substeps = 4096;
};

// Eigensystem of the power operator at one measurement slot.
struct AlphabetSlot {
  std::vector<double> eigenvalues;  // strictly increasing
  std::vector<Matrix> projectors;
  std::vector<int> ranks;
  std::vector<CVector> vectors;  // unit eigenvector per rank-1 level, else size 0

  int size() const { return static_cast<int>(eigenvalues.size()); }
  bool all_rank_one() const;
};

// K+1 slots; a work trajectory picks one level per slot.
struct TrajectoryAlphabet {
  std::vector<AlphabetSlot> slots;

  int size() const { return static_cast<int>(slots.size()); }
  bool all_rank_one() const;
  std::uint64_t trajectory_count() const;  // product of slot sizes, saturating
};

struct DiscretizedProtocol {
  ProtocolSpec spec;
  DiscretizeOptions options;
  int steps = 0;  // K
  double dt = 0.0;

  std::vector<HermitianOperator> schrodinger_h;     // K+1
  std::vector<UnitaryOperator> propagators;         // K+1, V_0 = 1
  std::vector<HermitianOperator> heisenberg_h;      // K+1
  std::vector<HermitianOperator> heisenberg_power;  // K, steps j = 0..K-1
  HermitianOperator heisenberg_power_tau;           // power operator at the endpoint

  // Slot j <= K-1 mirrors heisenberg_power[j]; slot K belongs to the endpoint
  // operator, which carries no work but closes the chain of measurements.
  TrajectoryAlphabet alphabet;

  // Spacing of the work lattice when the protocol guarantees one.
  std::optional<double> work_lattice_quantum;

  // FixedBasis only: [slot][level] -> index of the energy track whose
  // projector carries that level; -1 when the match is ambiguous.
  std::optional<std::vector<std::vector<int>>> track_of;

  Eigen::Index dim() const { return schrodinger_h.front().dim(); }
  double tau() const { return spec.tau; }
  const HermitianOperator& initial_h() const { return heisenberg_h.front(); }
  const HermitianOperator& final_schrodinger_h() const { return schrodinger_h.back(); }
  const HermitianOperator& final_heisenberg_h() const { return heisenberg_h.back(); }
};

DiscretizedProtocol discretize(const ProtocolSpec& spec, int steps,
                               const DiscretizeOptions& options = {});

// Closed forms for the rotating-field qubit.
HermitianOperator qubit_drive_hamiltonian(double omega, double g, double t);
UnitaryOperator qubit_drive_unitary(double omega, double g, double t);
HermitianOperator qubit_drive_power(double omega, double g, double t);  // Heisenberg picture

}  // namespace qwork
