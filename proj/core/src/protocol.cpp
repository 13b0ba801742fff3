#include "qwork/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qwork {

namespace {

bool close_durations(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

bool AlphabetSlot::all_rank_one() const {
  return std::all_of(ranks.begin(), ranks.end(), [](int r) { return r == 1; });
}

bool TrajectoryAlphabet::all_rank_one() const {
  return std::all_of(slots.begin(), slots.end(),
                     [](const AlphabetSlot& s) { return s.all_rank_one(); });
}

std::uint64_t TrajectoryAlphabet::trajectory_count() const {
  std::uint64_t count = 1;
  for (const auto& slot : slots) {
    const std::uint64_t n = static_cast<std::uint64_t>(slot.size());
    if (n != 0 && count > std::numeric_limits<std::uint64_t>::max() / n)
      return std::numeric_limits<std::uint64_t>::max();
    count *= n;
  }
  return count;
}

Eigen::Index protocol_dim(const ProtocolSpec& spec) {
  return std::visit(
      [](const auto& v) -> Eigen::Index {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, QubitDriveSpec>)
          return 2;
        else if constexpr (std::is_same_v<T, LinearRampSpec>)
          return v.a.dim();
        else if constexpr (std::is_same_v<T, FixedBasisSpec>)
          return v.basis.rows();
        else
          return v.hamiltonians.empty() ? 0 : v.hamiltonians.front().dim();
      },
      spec.variant);
}

void validate(const ProtocolSpec& spec) {
  if (!(spec.tau > 0.0) || !std::isfinite(spec.tau))
    throw DomainError("protocol: tau must be finite and > 0, got " + std::to_string(spec.tau));

  if (const auto* qd = std::get_if<QubitDriveSpec>(&spec.variant)) {
    if (!std::isfinite(qd->omega) || !std::isfinite(qd->g))
      throw DomainError("protocol: qubit drive parameters must be finite");
  } else if (const auto* lr = std::get_if<LinearRampSpec>(&spec.variant)) {
    if (lr->a.dim() != lr->b.dim())
      throw ShapeError("protocol: ramp operators differ in dimension, " +
                       std::to_string(lr->a.dim()) + " vs " + std::to_string(lr->b.dim()));
    if (!close_durations(lr->lambda.duration(), spec.tau))
      throw DomainError("protocol: ramp schedule duration " +
                        std::to_string(lr->lambda.duration()) + " does not match tau " +
                        std::to_string(spec.tau));
  } else if (const auto* fb = std::get_if<FixedBasisSpec>(&spec.variant)) {
    if (fb->basis.rows() < 1 || fb->basis.rows() != fb->basis.cols())
      throw ShapeError("protocol: fixed basis must be a square matrix");
    const double residual =
        max_norm(fb->basis.adjoint() * fb->basis - identity(fb->basis.rows()));
    if (residual > tol::unitarity)
      throw DomainError("protocol: fixed basis columns are not orthonormal, residual " +
                        std::to_string(residual));
    if (static_cast<Eigen::Index>(fb->tracks.size()) != fb->basis.rows())
      throw ShapeError("protocol: need one energy track per basis column, got " +
                       std::to_string(fb->tracks.size()) + " for dimension " +
                       std::to_string(fb->basis.rows()));
    for (const auto& track : fb->tracks)
      if (!close_durations(track.duration(), spec.tau))
        throw DomainError("protocol: energy track duration does not match tau");
  } else if (const auto* tab = std::get_if<TabulatedSpec>(&spec.variant)) {
    if (tab->hamiltonians.size() < 2)
      throw DomainError("protocol: tabulated drive needs at least two samples");
    const Eigen::Index d = tab->hamiltonians.front().dim();
    for (const auto& h : tab->hamiltonians)
      if (h.dim() != d) throw ShapeError("protocol: tabulated samples differ in dimension");
  }
}

// ---------------------------------------------------------------------------
// Qubit drive closed forms.

HermitianOperator qubit_drive_hamiltonian(double omega, double g, double t) {
  Matrix h = 0.5 * omega * pauli_z() +
             0.5 * g * (std::cos(omega * t) * pauli_x() + std::sin(omega * t) * pauli_y());
  return HermitianOperator(std::move(h));
}

UnitaryOperator qubit_drive_unitary(double omega, double g, double t) {
  // exp(-i omega t sz / 2) exp(-i g t sx / 2)
  const double az = 0.5 * omega * t;
  const double ax = 0.5 * g * t;
  Matrix rz(2, 2);
  rz << std::exp(Complex(0, -az)), 0, 0, std::exp(Complex(0, az));
  Matrix rx(2, 2);
  rx << std::cos(ax), Complex(0, -std::sin(ax)), Complex(0, -std::sin(ax)), std::cos(ax);
  return UnitaryOperator(rz * rx);
}

HermitianOperator qubit_drive_power(double omega, double g, double t) {
  Matrix x = 0.5 * g * omega * (std::cos(g * t) * pauli_y() - std::sin(g * t) * pauli_z());
  return HermitianOperator(std::move(x));
}

// ---------------------------------------------------------------------------
// Discretization.

namespace {

// H(t) for the variants defined in continuous time (all but tabulated).
Matrix hamiltonian_at(const ProtocolSpec& spec, double t) {
  if (const auto* qd = std::get_if<QubitDriveSpec>(&spec.variant))
    return qubit_drive_hamiltonian(qd->omega, qd->g, t).matrix();
  if (const auto* lr = std::get_if<LinearRampSpec>(&spec.variant))
    return lr->a.matrix() + lr->lambda.value(t) * lr->b.matrix();
  const auto& fb = std::get<FixedBasisSpec>(spec.variant);
  Matrix h = Matrix::Zero(fb.basis.rows(), fb.basis.rows());
  for (Eigen::Index n = 0; n < fb.basis.cols(); ++n)
    h += fb.tracks[n].value(t) * (fb.basis.col(n) * fb.basis.col(n).adjoint());
  return h;
}

// Schrodinger-picture power source dH/dt for a slot sampled at time t. For
// tabulated drives the forward difference covers slots 0..K-1 and the
// backward difference closes slot K, where no forward sample exists.
Matrix power_source(const ProtocolSpec& spec, int steps, double dt, int slot, double t) {
  if (const auto* qd = std::get_if<QubitDriveSpec>(&spec.variant)) {
    const double c = 0.5 * qd->g * qd->omega;
    return c * (-std::sin(qd->omega * t) * pauli_x() + std::cos(qd->omega * t) * pauli_y());
  }
  if (const auto* lr = std::get_if<LinearRampSpec>(&spec.variant))
    return lr->lambda.derivative(t) * lr->b.matrix();
  if (const auto* fb = std::get_if<FixedBasisSpec>(&spec.variant)) {
    Matrix x = Matrix::Zero(fb->basis.rows(), fb->basis.rows());
    for (Eigen::Index n = 0; n < fb->basis.cols(); ++n)
      x += fb->tracks[n].derivative(t) * (fb->basis.col(n) * fb->basis.col(n).adjoint());
    return x;
  }
  const auto& tab = std::get<TabulatedSpec>(spec.variant);
  const int lo = slot < steps ? slot : steps - 1;
  return (tab.hamiltonians[lo + 1].matrix() - tab.hamiltonians[lo].matrix()) / dt;
}

AlphabetSlot slot_from_decomposition(const SpectralDecomposition& dec) {
  AlphabetSlot slot;
  slot.eigenvalues = dec.eigenvalues;
  slot.projectors = dec.projectors;
  slot.ranks = dec.ranks;
  slot.vectors.resize(dec.eigenvalues.size());
  for (int n = 0; n < dec.levels(); ++n)
    if (dec.ranks[n] == 1) slot.vectors[n] = dec.basis[n].col(0);
  return slot;
}

// Fixed-basis slots come straight from the tracks: tracks whose rate
// coincides at this instant merge into one level, mirroring the eigenvalue
// merge rule but with exact projectors and a track map for free.
AlphabetSlot slot_from_tracks(const FixedBasisSpec& fb, double t, double window, bool strict,
                              std::vector<int>* track_map) {
  const Eigen::Index d = fb.basis.rows();
  std::vector<std::pair<double, int>> rates(d);
  for (Eigen::Index n = 0; n < d; ++n)
    rates[n] = {fb.tracks[n].derivative(t), static_cast<int>(n)};
  std::sort(rates.begin(), rates.end());
  if (window < 0.0) {
    double spectral = 0.0;
    for (const auto& r : rates) spectral = std::max(spectral, std::abs(r.first));
    window = tol::degeneracy_factor * spectral;
  }

  AlphabetSlot slot;
  track_map->clear();
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index stop = start + 1;
    while (stop < d && rates[stop].first - rates[stop - 1].first <= window) ++stop;
    const int rank = static_cast<int>(stop - start);
    if (strict && rank > 1)
      throw DomainError("discretize: degenerate power level in strict mode near rate " +
                        std::to_string(rates[start].first));
    Matrix proj = Matrix::Zero(d, d);
    double mean = 0.0;
    for (Eigen::Index i = start; i < stop; ++i) {
      proj += fb.basis.col(rates[i].second) * fb.basis.col(rates[i].second).adjoint();
      mean += rates[i].first;
    }
    slot.eigenvalues.push_back(mean / rank);
    slot.projectors.push_back(proj);
    slot.ranks.push_back(rank);
    slot.vectors.push_back(rank == 1 ? CVector(fb.basis.col(rates[start].second)) : CVector());
    track_map->push_back(rank == 1 ? rates[start].second : -1);
    start = stop;
  }
  return slot;
}

}  // namespace

DiscretizedProtocol discretize(const ProtocolSpec& spec, int steps,
                               const DiscretizeOptions& options) {
  validate(spec);
  if (steps < 1)
    throw DomainError("discretize: steps must be >= 1, got " + std::to_string(steps));

  const bool tabulated = std::holds_alternative<TabulatedSpec>(spec.variant);
  if (tabulated) {
    const auto& tab = std::get<TabulatedSpec>(spec.variant);
    if (tab.hamiltonians.size() != static_cast<std::size_t>(steps) + 1)
      throw DomainError("discretize: tabulated drive has " +
                        std::to_string(tab.hamiltonians.size()) + " samples but " +
                        std::to_string(steps) + " steps need " + std::to_string(steps + 1));
  }

  PropagatorBackend backend = options.backend;
  if (backend == PropagatorBackend::automatic)
    backend = tabulated ? PropagatorBackend::stepped : PropagatorBackend::analytic;
  if (backend == PropagatorBackend::analytic && tabulated)
    throw DomainError("discretize: tabulated drives have no analytic propagator");
  if (options.midpoint_power && backend != PropagatorBackend::analytic)
    throw DomainError("discretize: midpoint power sampling needs the analytic backend");

  DiscretizedProtocol proto{.spec = spec,
                            .options = options,
                            .steps = steps,
                            .dt = spec.tau / steps,
                            .schrodinger_h = {},
                            .propagators = {},
                            .heisenberg_h = {},
                            .heisenberg_power = {},
                            .heisenberg_power_tau = HermitianOperator(identity(1)),
                            .alphabet = {},
                            .work_lattice_quantum = {},
                            .track_of = {}};
  const double dt = proto.dt;
  const Eigen::Index d = protocol_dim(spec);

  proto.schrodinger_h.reserve(steps + 1);
  for (int j = 0; j <= steps; ++j)
    proto.schrodinger_h.emplace_back(tabulated
                                         ? std::get<TabulatedSpec>(spec.variant)
                                               .hamiltonians[j]
                                               .matrix()
                                         : hamiltonian_at(spec, j * dt));

  // Grid-node propagators, plus midpoint ones when power sampling wants them.
  std::vector<UnitaryOperator> midpoint_v;
  proto.propagators.reserve(steps + 1);
  if (backend == PropagatorBackend::stepped) {
    proto.propagators.emplace_back(identity(d));
    for (int j = 1; j <= steps; ++j)
      proto.propagators.emplace_back(unitary_step(proto.schrodinger_h[j], dt).matrix() *
                                     proto.propagators.back().matrix());
  } else if (const auto* qd = std::get_if<QubitDriveSpec>(&spec.variant)) {
    for (int j = 0; j <= steps; ++j)
      proto.propagators.push_back(qubit_drive_unitary(qd->omega, qd->g, j * dt));
    if (options.midpoint_power)
      for (int j = 0; j < steps; ++j)
        midpoint_v.push_back(qubit_drive_unitary(qd->omega, qd->g, (j + 0.5) * dt));
  } else if (const auto* fb = std::get_if<FixedBasisSpec>(&spec.variant)) {
    auto phase_unitary = [&](double t) {
      Matrix v = Matrix::Zero(d, d);
      for (Eigen::Index n = 0; n < d; ++n)
        v += std::exp(Complex(0.0, -fb->tracks[n].integral(t))) *
             (fb->basis.col(n) * fb->basis.col(n).adjoint());
      return UnitaryOperator(std::move(v));
    };
    for (int j = 0; j <= steps; ++j) proto.propagators.push_back(phase_unitary(j * dt));
    if (options.midpoint_power)
      for (int j = 0; j < steps; ++j) midpoint_v.push_back(phase_unitary((j + 0.5) * dt));
  } else {
    // Ramp under the analytic backend: midpoint-rule product on a fine grid
    // aligned with the coarse one, so the node values are K-independent up to
    // O(tau^3 / substeps^2) and the coarse step count only controls sampling.
    int sub = std::max(1, (options.ramp_substeps + steps - 1) / steps);
    if (options.midpoint_power && sub % 2 != 0) ++sub;
    const double delta = dt / sub;
    Matrix v = identity(d);
    proto.propagators.emplace_back(v);
    for (int j = 0; j < steps; ++j) {
      for (int s = 0; s < sub; ++s) {
        const double t_mid = j * dt + (s + 0.5) * delta;
        v = unitary_step(HermitianOperator(hamiltonian_at(spec, t_mid)), delta).matrix() * v;
        if (options.midpoint_power && s + 1 == sub / 2) midpoint_v.emplace_back(v);
      }
      proto.propagators.emplace_back(v);
    }
  }

  proto.heisenberg_h.reserve(steps + 1);
  for (int j = 0; j <= steps; ++j)
    proto.heisenberg_h.push_back(
        heisenberg_transform(proto.schrodinger_h[j], proto.propagators[j]));

  // Power operators in the Heisenberg picture, one per step plus the endpoint.
  const auto* qd = std::get_if<QubitDriveSpec>(&spec.variant);
  const bool qubit_analytic = qd != nullptr && backend == PropagatorBackend::analytic;
  std::vector<HermitianOperator> power_all;
  power_all.reserve(steps + 2);
  for (int slot = 0; slot <= steps; ++slot) {
    const bool midpoint = options.midpoint_power && slot < steps;
    const double t = midpoint ? (slot + 0.5) * dt : slot * dt;
    if (qubit_analytic) {
      power_all.push_back(qubit_drive_power(qd->omega, qd->g, t));
      continue;
    }
    const UnitaryOperator& v = midpoint ? midpoint_v[slot] : proto.propagators[slot];
    power_all.push_back(
        heisenberg_transform(HermitianOperator(power_source(spec, steps, dt, slot, t)), v));
  }
  proto.heisenberg_power.assign(power_all.begin(), power_all.end() - 1);
  proto.heisenberg_power_tau = power_all.back();

  // Measurement alphabet, slot by slot.
  proto.alphabet.slots.reserve(steps + 1);
  if (const auto* fb = std::get_if<FixedBasisSpec>(&spec.variant)) {
    std::vector<std::vector<int>> track_of(steps + 1);
    for (int slot = 0; slot <= steps; ++slot) {
      const bool midpoint = options.midpoint_power && slot < steps;
      const double t = midpoint ? (slot + 0.5) * dt : slot * dt;
      proto.alphabet.slots.push_back(slot_from_tracks(*fb, t, options.degeneracy_tol,
                                                      options.strict_degeneracy,
                                                      &track_of[slot]));
    }
    proto.track_of = std::move(track_of);
  } else {
    for (int slot = 0; slot <= steps; ++slot) {
      const auto& op = slot < steps ? proto.heisenberg_power[slot] : proto.heisenberg_power_tau;
      proto.alphabet.slots.push_back(slot_from_decomposition(
          spectral_decompose(op, options.degeneracy_tol, options.strict_degeneracy)));
    }
  }

  // The rotating qubit drive keeps |power eigenvalues| = |g omega| / 2 at all
  // times, so every work value is an integer multiple of this spacing.
  if (qd != nullptr) {
    const double quantum = dt * 0.5 * std::abs(qd->g * qd->omega);
    if (quantum > 0.0) proto.work_lattice_quantum = quantum;
  }

  return proto;
}

}  // namespace qwork
