#include "qwork/distributions.hpp"

#include <algorithm>
#include <cmath>

namespace qwork {

const char* origin_name(DistributionOrigin origin) {
  switch (origin) {
    case DistributionOrigin::histories:
      return "histories";
    case DistributionOrigin::measured:
      return "measured";
    case DistributionOrigin::tpm:
      return "tpm";
    case DistributionOrigin::margenau_hill:
      return "margenau_hill";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Binning.

namespace {

// Sort, merge neighbours within bin_tol (label = first value of the cluster,
// snapped to the lattice when one exists), no validation. bin_tol < 0 picks
// the default data-driven width and is updated in place.
std::vector<WorkPoint> cluster_points(std::vector<WorkPoint> raw, double& bin_tol,
                                      const std::optional<double>& lattice) {
  std::stable_sort(raw.begin(), raw.end(),
                   [](const WorkPoint& a, const WorkPoint& b) { return a.w < b.w; });
  if (bin_tol < 0.0) {
    double peak = 0.0;
    for (const auto& p : raw) peak = std::max(peak, std::abs(p.w));
    bin_tol = tol::bin_factor * peak;
  }

  auto merge_pass = [&](const std::vector<WorkPoint>& in) {
    std::vector<WorkPoint> out;
    for (const auto& p : in) {
      if (!out.empty() && p.w - out.back().w <= bin_tol)
        out.back().weight += p.weight;
      else
        out.push_back(p);
    }
    return out;
  };

  std::vector<WorkPoint> binned = merge_pass(raw);
  if (lattice && *lattice > 0.0) {
    for (auto& p : binned) p.w = std::round(p.w / *lattice) * *lattice;
    binned = merge_pass(binned);  // snapping can fuse neighbours
  }
  return binned;
}

}  // namespace

WorkDistribution WorkDistribution::from_raw(std::vector<WorkPoint> raw, DistributionKind kind,
                                            DistributionOrigin origin, double bin_tol,
                                            std::optional<double> lattice) {
  if (raw.empty()) throw DomainError("WorkDistribution: empty support");
  std::vector<WorkPoint> binned = cluster_points(std::move(raw), bin_tol, lattice);

  double total = 0.0;
  for (const auto& p : binned) total += p.weight;
  if (std::abs(total - 1.0) > tol::normalization)
    throw NumericalError("WorkDistribution: weights do not sum to 1", total - 1.0);

  if (kind == DistributionKind::probability) {
    for (auto& p : binned) {
      if (p.weight < -tol::weight_clamp)
        throw NumericalError("WorkDistribution: negative probability bin", p.weight);
      if (p.weight < 0.0) p.weight = 0.0;
    }
  }

  WorkDistribution dist;
  dist.points_ = std::move(binned);
  dist.kind_ = kind;
  dist.origin_ = origin;
  dist.bin_tol_ = bin_tol;
  return dist;
}

double WorkDistribution::total_weight() const {
  double total = 0.0;
  for (const auto& p : points_) total += p.weight;
  return total;
}

double WorkDistribution::min_weight() const {
  double lo = points_.front().weight;
  for (const auto& p : points_) lo = std::min(lo, p.weight);
  return lo;
}

double WorkDistribution::mean() const {
  double m = 0.0;
  for (const auto& p : points_) m += p.w * p.weight;
  return m;
}

double WorkDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& p : points_) v += (p.w - m) * (p.w - m) * p.weight;
  return v;
}

WorkDistribution WorkDistribution::rebinned(double bin_tol) const {
  return from_raw(points_, kind_, origin_, bin_tol);
}

double moment(const WorkDistribution& dist, int order) {
  if (order < 0) throw DomainError("moment: order must be >= 0");
  double acc = 0.0;
  for (const auto& p : dist.support()) {
    double term = p.weight;
    for (int i = 0; i < order; ++i) term *= p.w;
    acc += term;
  }
  return acc;
}

std::vector<std::pair<double, double>> cumulative(const WorkDistribution& dist) {
  std::vector<std::pair<double, double>> q;
  q.reserve(dist.support().size());
  double acc = 0.0;
  for (const auto& p : dist.support()) {
    acc += p.weight;
    q.emplace_back(p.w, acc);
  }
  return q;
}

namespace {

double gap_on_points(const std::vector<WorkPoint>& a, const std::vector<WorkPoint>& b,
                     double match_tol) {
  if (match_tol < 0.0) {
    double peak = 1.0;
    for (const auto& p : a) peak = std::max(peak, std::abs(p.w));
    for (const auto& p : b) peak = std::max(peak, std::abs(p.w));
    match_tol = 1e-12 * peak;
  }
  double gap = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::abs(a[i].w - b[j].w) <= match_tol) {
      gap = std::max(gap, std::abs(a[i].weight - b[j].weight));
      ++i, ++j;
    } else if (a[i].w < b[j].w) {
      gap = std::max(gap, std::abs(a[i].weight));
      ++i;
    } else {
      gap = std::max(gap, std::abs(b[j].weight));
      ++j;
    }
  }
  for (; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i].weight));
  for (; j < b.size(); ++j) gap = std::max(gap, std::abs(b[j].weight));
  return gap;
}

std::vector<WorkPoint> mirrored(const std::vector<WorkPoint>& points) {
  std::vector<WorkPoint> out(points.rbegin(), points.rend());
  for (auto& p : out) p.w = -p.w;
  return out;
}

}  // namespace

double max_bin_gap(const WorkDistribution& a, const WorkDistribution& b, double match_tol) {
  if (match_tol < 0.0) match_tol = std::max(a.bin_tol(), b.bin_tol());
  if (match_tol <= 0.0) match_tol = -1.0;  // fall back to the data-driven width
  return gap_on_points(a.support(), b.support(), match_tol);
}

double time_reversal_gap(const WorkDistribution& backward, const WorkDistribution& forward,
                         double match_tol) {
  if (match_tol < 0.0) match_tol = std::max(backward.bin_tol(), forward.bin_tol());
  if (match_tol <= 0.0) match_tol = -1.0;
  return gap_on_points(backward.support(), mirrored(forward.support()), match_tol);
}

// ---------------------------------------------------------------------------
// Builders.

EnumeratedDistributions enumerated_distributions(const DiscretizedProtocol& proto,
                                                 const DensityMatrix& rho,
                                                 const DistributionOptions& options) {
  const WorkAccumulation acc =
      accumulate_work(proto, rho, options.guard, options.threads, false);
  std::vector<WorkPoint> hist, meas;
  hist.reserve(acc.bins.size());
  meas.reserve(acc.bins.size());
  for (const auto& [w, sums] : acc.bins) {
    hist.push_back({w, sums.linear});
    meas.push_back({w, sums.measured});
  }
  return {WorkDistribution::from_raw(std::move(hist), DistributionKind::quasi,
                                     DistributionOrigin::histories, options.bin_tol,
                                     proto.work_lattice_quantum),
          WorkDistribution::from_raw(std::move(meas), DistributionKind::probability,
                                     DistributionOrigin::measured, options.bin_tol,
                                     proto.work_lattice_quantum)};
}

WorkDistribution histories_distribution(const DiscretizedProtocol& proto,
                                        const DensityMatrix& rho,
                                        const DistributionOptions& options) {
  return enumerated_distributions(proto, rho, options).histories;
}

WorkDistribution measured_distribution(const DiscretizedProtocol& proto,
                                       const DensityMatrix& rho,
                                       const DistributionOptions& options) {
  return enumerated_distributions(proto, rho, options).measured;
}

WorkDistribution measured_distribution_markov(const DiscretizedProtocol& proto,
                                              const DensityMatrix& rho, double bin_tol,
                                              std::uint64_t state_cap) {
  const auto bins = measured_bins_markov(proto, rho, state_cap);
  std::vector<WorkPoint> raw;
  raw.reserve(bins.size());
  for (const auto& [w, p] : bins) raw.push_back({w, p});
  return WorkDistribution::from_raw(std::move(raw), DistributionKind::probability,
                                    DistributionOrigin::measured, bin_tol,
                                    proto.work_lattice_quantum);
}

namespace {

double clamp_bin(double p, const char* what) {
  if (p < -tol::weight_clamp)
    throw NumericalError(std::string(what) + ": negative joint probability", p);
  return p < 0.0 ? 0.0 : p;
}

struct EndpointSpectra {
  SpectralDecomposition start;  // H(0)
  SpectralDecomposition stop;   // H_H(tau)
};

EndpointSpectra endpoint_spectra(const DiscretizedProtocol& proto) {
  return {spectral_decompose(proto.initial_h(), proto.options.degeneracy_tol,
                             proto.options.strict_degeneracy),
          spectral_decompose(proto.final_heisenberg_h(), proto.options.degeneracy_tol,
                             proto.options.strict_degeneracy)};
}

}  // namespace

WorkDistribution tpm_distribution(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                  double bin_tol) {
  const EndpointSpectra es = endpoint_spectra(proto);
  std::vector<WorkPoint> raw;
  raw.reserve(es.start.levels() * es.stop.levels());
  for (int n = 0; n < es.start.levels(); ++n) {
    const Matrix projected = es.start.projectors[n] * rho.matrix() * es.start.projectors[n];
    for (int m = 0; m < es.stop.levels(); ++m) {
      const double p = (es.stop.projectors[m] * projected).trace().real();
      raw.push_back({es.stop.eigenvalues[m] - es.start.eigenvalues[n],
                     clamp_bin(p, "tpm_distribution")});
    }
  }
  return WorkDistribution::from_raw(std::move(raw), DistributionKind::probability,
                                    DistributionOrigin::tpm, bin_tol);
}

WorkDistribution tpm_backward_distribution(const DiscretizedProtocol& proto,
                                           const DensityMatrix& rho, double bin_tol) {
  const EndpointSpectra es = endpoint_spectra(proto);
  std::vector<WorkPoint> raw;
  raw.reserve(es.start.levels() * es.stop.levels());
  for (int m = 0; m < es.stop.levels(); ++m) {
    const Matrix projected = es.stop.projectors[m] * rho.matrix() * es.stop.projectors[m];
    for (int n = 0; n < es.start.levels(); ++n) {
      const double p = (es.start.projectors[n] * projected).trace().real();
      raw.push_back({-(es.stop.eigenvalues[m] - es.start.eigenvalues[n]),
                     clamp_bin(p, "tpm_backward_distribution")});
    }
  }
  return WorkDistribution::from_raw(std::move(raw), DistributionKind::probability,
                                    DistributionOrigin::tpm, bin_tol);
}

namespace {

WorkDistribution mh_from_spectra(const EndpointSpectra& es, const DensityMatrix& rho,
                                 double bin_tol, bool backward) {
  std::vector<WorkPoint> raw;
  raw.reserve(es.start.levels() * es.stop.levels());
  for (int n = 0; n < es.start.levels(); ++n)
    for (int m = 0; m < es.stop.levels(); ++m) {
      const Matrix sym = 0.5 * (es.stop.projectors[m] * es.start.projectors[n] +
                                es.start.projectors[n] * es.stop.projectors[m]);
      const double p = (sym * rho.matrix()).trace().real();
      const double w = es.stop.eigenvalues[m] - es.start.eigenvalues[n];
      raw.push_back({backward ? -w : w, p});
    }
  return WorkDistribution::from_raw(std::move(raw), DistributionKind::quasi,
                                    DistributionOrigin::margenau_hill, bin_tol);
}

}  // namespace

WorkDistribution mh_distribution(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                 double bin_tol) {
  return mh_from_spectra(endpoint_spectra(proto), rho, bin_tol, false);
}

// ---------------------------------------------------------------------------
// Operator-level quantities.

namespace {

Matrix heisenberg_difference(const DiscretizedProtocol& proto) {
  return proto.final_heisenberg_h().matrix() - proto.initial_h().matrix();
}

}  // namespace

double closed_form_moment(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                          int order) {
  if (order < 0) throw DomainError("closed_form_moment: order must be >= 0");
  const Matrix d = heisenberg_difference(proto);
  Matrix power = identity(proto.dim());
  for (int i = 0; i < order; ++i) power = Matrix(power * d);
  return (power * rho.matrix()).trace().real();
}

double mh_closed_form_moment(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                             int order) {
  if (order < 0) throw DomainError("mh_closed_form_moment: order must be >= 0");
  const Matrix h_tau = proto.final_heisenberg_h().matrix();
  const Matrix h_0 = -proto.initial_h().matrix();
  std::vector<Matrix> pow_tau{identity(proto.dim())}, pow_0{identity(proto.dim())};
  for (int i = 0; i < order; ++i) {
    pow_tau.push_back(Matrix(pow_tau.back() * h_tau));
    pow_0.push_back(Matrix(pow_0.back() * h_0));
  }
  double acc = 0.0;
  double binom = 1.0;  // binom(order, l), updated multiplicatively
  for (int l = 0; l <= order; ++l) {
    const Matrix anti = pow_tau[l] * pow_0[order - l] + pow_0[order - l] * pow_tau[l];
    acc += binom * 0.5 * (anti * rho.matrix()).trace().real();
    binom = binom * (order - l) / (l + 1);
  }
  return acc;
}

Complex mgf(const DiscretizedProtocol& proto, const DensityMatrix& rho, Complex lambda) {
  const SpectralDecomposition dec =
      spectral_decompose(HermitianOperator(heisenberg_difference(proto)));
  Complex acc = 0.0;
  for (int n = 0; n < dec.levels(); ++n)
    acc += std::exp(Complex(0.0, 1.0) * lambda * dec.eigenvalues[n]) *
           (dec.projectors[n] * rho.matrix()).trace();
  return acc;
}

double delta_u(const DiscretizedProtocol& proto, const DensityMatrix& rho) {
  return closed_form_moment(proto, rho, 1);
}

double first_moment_identity(const DiscretizedProtocol& proto, const DensityMatrix& rho) {
  double acc = 0.0;
  for (const auto& x : proto.heisenberg_power)
    acc += (x.matrix() * rho.matrix()).trace().real();
  return proto.dt * acc;
}

double second_moment_identity(const DiscretizedProtocol& proto, const DensityMatrix& rho) {
  Matrix s = Matrix::Zero(proto.dim(), proto.dim());
  for (const auto& x : proto.heisenberg_power) s += x.matrix();
  return proto.dt * proto.dt * ((s * s) * rho.matrix()).trace().real();
}

MomentReport moment_report(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                           int max_order, const DistributionOptions& options) {
  if (max_order < 0) throw DomainError("moment_report: max order must be >= 0");
  const WorkDistribution hist = histories_distribution(proto, rho, options);
  MomentReport report;
  for (int m = 0; m <= max_order; ++m) {
    report.orders.push_back(m);
    report.enumerated.push_back(moment(hist, m));
    report.closed_form.push_back(closed_form_moment(proto, rho, m));
    report.gaps.push_back(std::abs(report.enumerated.back() - report.closed_form.back()));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Fluctuation relation.

namespace {

JarzynskiReport jarzynski_base(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                               double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw DomainError("jarzynski_report: beta must be finite and > 0, got " +
                      std::to_string(beta));
  JarzynskiReport report;
  report.beta = beta;
  const double ln_z0 = log_partition(proto.initial_h(), beta);
  const double ln_zt = log_partition(proto.final_schrodinger_h(), beta);
  report.rhs = std::exp(ln_zt - ln_z0);
  report.delta_f = (ln_z0 - ln_zt) / beta;
  report.commuting =
      commutator_max_norm(proto.final_heisenberg_h().matrix(), proto.initial_h().matrix()) <=
      tol::commutator;
  report.rho_thermal =
      max_norm(rho.matrix() - thermal_state(proto.initial_h(), beta).matrix()) <= 1e-10;
  report.lhs_closed_form = mgf(proto, rho, Complex(0.0, beta)).real();
  return report;
}

}  // namespace

JarzynskiReport jarzynski_report(const WorkDistribution& dist, const DiscretizedProtocol& proto,
                                 const DensityMatrix& rho, double beta) {
  JarzynskiReport report = jarzynski_base(proto, rho, beta);
  double lhs = 0.0;
  for (const auto& p : dist.support()) lhs += p.weight * std::exp(-beta * p.w);
  report.lhs = lhs;
  report.gap = report.lhs - report.rhs;
  report.discretization_gap = std::abs(report.lhs - *report.lhs_closed_form);
  return report;
}

JarzynskiReport jarzynski_report(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                 double beta) {
  JarzynskiReport report = jarzynski_base(proto, rho, beta);
  report.lhs = *report.lhs_closed_form;
  report.gap = report.lhs - report.rhs;
  return report;
}

// ---------------------------------------------------------------------------
// Time reversal.

namespace {

struct ForwardBackward {
  WorkDistribution histories_fwd, histories_bwd;
  WorkDistribution measured_fwd, measured_bwd;
  std::vector<WorkPoint> commutator_correction;
};

ForwardBackward enumerate_forward_backward(const DiscretizedProtocol& proto,
                                           const DensityMatrix& rho,
                                           const DistributionOptions& options) {
  const WorkAccumulation acc =
      accumulate_work(proto, rho, options.guard, options.threads, true);
  std::vector<WorkPoint> hist, meas, hist_b, meas_b, corr;
  for (const auto& [w, sums] : acc.bins) {
    hist.push_back({w, sums.linear});
    meas.push_back({w, sums.measured});
    hist_b.push_back({-w, sums.reverse_linear});
    meas_b.push_back({-w, sums.reverse_measured});
    corr.push_back({-w, sums.reverse_measured - sums.measured});
  }
  ForwardBackward out{
      WorkDistribution::from_raw(std::move(hist), DistributionKind::quasi,
                                 DistributionOrigin::histories, options.bin_tol,
                                 proto.work_lattice_quantum),
      WorkDistribution::from_raw(std::move(hist_b), DistributionKind::quasi,
                                 DistributionOrigin::histories, options.bin_tol,
                                 proto.work_lattice_quantum),
      WorkDistribution::from_raw(std::move(meas), DistributionKind::probability,
                                 DistributionOrigin::measured, options.bin_tol,
                                 proto.work_lattice_quantum),
      WorkDistribution::from_raw(std::move(meas_b), DistributionKind::probability,
                                 DistributionOrigin::measured, options.bin_tol,
                                 proto.work_lattice_quantum),
      {}};
  double width = options.bin_tol;
  out.commutator_correction = cluster_points(std::move(corr), width, proto.work_lattice_quantum);
  return out;
}

}  // namespace

TimeReversalReport time_reversal_check(const DiscretizedProtocol& proto,
                                       const DensityMatrix& rho,
                                       const DistributionOptions& options) {
  const ForwardBackward fb = enumerate_forward_backward(proto, rho, options);
  TimeReversalReport report;
  report.histories_gap = time_reversal_gap(fb.histories_bwd, fb.histories_fwd);
  report.measured_gap = time_reversal_gap(fb.measured_bwd, fb.measured_fwd);
  report.tpm_gap = time_reversal_gap(tpm_backward_distribution(proto, rho, options.bin_tol),
                                     tpm_distribution(proto, rho, options.bin_tol));
  report.mh_gap =
      time_reversal_gap(mh_from_spectra(endpoint_spectra(proto), rho, options.bin_tol, true),
                        mh_distribution(proto, rho, options.bin_tol));
  for (const auto& p : fb.commutator_correction)
    report.measured_commutator_correction.emplace_back(p.w, p.weight);
  return report;
}

// ---------------------------------------------------------------------------
// Comparison across all four statistics.

ComparisonReport comparison_report(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                   double beta, const DistributionOptions& options) {
  const ForwardBackward fb = enumerate_forward_backward(proto, rho, options);
  const WorkDistribution tpm = tpm_distribution(proto, rho, options.bin_tol);
  const WorkDistribution tpm_b = tpm_backward_distribution(proto, rho, options.bin_tol);
  const WorkDistribution mh = mh_distribution(proto, rho, options.bin_tol);
  const WorkDistribution mh_b = mh_from_spectra(endpoint_spectra(proto), rho, options.bin_tol, true);

  const double du = delta_u(proto, rho);

  // The histories mean converges to delta U only in the continuum; the
  // finite-step value obeys an exact identity instead, so the reported gap
  // extrapolates the identity means at K and 2K one order in dt. Tabulated
  // protocols cannot be rebuilt at 2K (the samples are the protocol), so
  // those report the un-extrapolated gap.
  double extrapolated_mean = first_moment_identity(proto, rho);
  if (!std::holds_alternative<TabulatedSpec>(proto.spec.variant)) {
    const DiscretizedProtocol doubled = discretize(proto.spec, 2 * proto.steps, proto.options);
    extrapolated_mean = 2.0 * first_moment_identity(doubled, rho) - extrapolated_mean;
  }

  ComparisonReport report;
  auto add_row = [&](const WorkDistribution& dist, double energy_gap, double tr_gap) {
    ComparisonRow row;
    row.min_weight = dist.min_weight();
    row.energy_conservation_gap = energy_gap;
    row.time_reversal_gap = tr_gap;
    row.jarzynski_gap = jarzynski_report(dist, proto, rho, beta).gap;
    report.rows[origin_name(dist.origin())] = row;
  };
  add_row(fb.histories_fwd, std::abs(extrapolated_mean - du),
          time_reversal_gap(fb.histories_bwd, fb.histories_fwd));
  add_row(fb.measured_fwd, std::abs(fb.measured_fwd.mean() - du),
          time_reversal_gap(fb.measured_bwd, fb.measured_fwd));
  add_row(tpm, std::abs(tpm.mean() - du), time_reversal_gap(tpm_b, tpm));
  add_row(mh, std::abs(mh.mean() - du), time_reversal_gap(mh_b, mh));

  report.histories_jarzynski_closed_form_gap = jarzynski_report(proto, rho, beta).gap;

  const Matrix& h0 = proto.initial_h().matrix();
  const Matrix& ht = proto.final_heisenberg_h().matrix();
  report.classical_limit = commutator_max_norm(h0, ht) <= tol::commutator &&
                           commutator_max_norm(h0, rho.matrix()) <= tol::commutator &&
                           commutator_max_norm(ht, rho.matrix()) <= tol::commutator;
  if (report.classical_limit) {
    const WorkDistribution* all[] = {&fb.histories_fwd, &fb.measured_fwd, &tpm, &mh};
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) worst = std::max(worst, max_bin_gap(*all[i], *all[j]));
    report.coincidence_max_gap = worst;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Freeze limit.

WorkDistribution zeno_limit_distribution(const ProtocolSpec& spec, const DensityMatrix& rho,
                                         double bin_tol) {
  const auto* lr = std::get_if<LinearRampSpec>(&spec.variant);
  if (lr == nullptr)
    throw DomainError("zeno_limit_distribution: ramp protocols only");
  if (lr->b.dim() != rho.dim())
    throw ShapeError("zeno_limit_distribution: state dimension mismatch");
  const SpectralDecomposition dec = spectral_decompose(lr->b);
  const double swing = lr->lambda.end() - lr->lambda.start();
  std::vector<WorkPoint> raw;
  raw.reserve(dec.levels());
  for (int n = 0; n < dec.levels(); ++n)
    raw.push_back({swing * dec.eigenvalues[n],
                   clamp_bin((dec.projectors[n] * rho.matrix()).trace().real(),
                             "zeno_limit_distribution")});
  return WorkDistribution::from_raw(std::move(raw), DistributionKind::probability,
                                    DistributionOrigin::measured, bin_tol);
}

double zeno_tv_distance(const WorkDistribution& measured, const WorkDistribution& limit) {
  const auto& cells = limit.support();
  std::vector<double> mass(cells.size(), 0.0);
  for (const auto& p : measured.support()) {
    // Nearest limit point owns the bin.
    std::size_t best = 0;
    double best_dist = std::abs(p.w - cells[0].w);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const double d = std::abs(p.w - cells[c].w);
      if (d < best_dist) {
        best_dist = d;
        best = c;
      }
    }
    mass[best] += p.weight;
  }
  double tv = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c)
    tv += std::abs(mass[c] - cells[c].weight);
  return 0.5 * tv;
}

}  // namespace qwork
