#include "qwork/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "qwork/format.hpp"

namespace qwork {

std::uint64_t trajectory_count(const DiscretizedProtocol& proto) {
  return proto.alphabet.trajectory_count();
}

namespace {

double clamp_probability(double p, const char* what) {
  if (p < -tol::weight_clamp)
    throw NumericalError(std::string(what) + ": probability below the rounding floor", p);
  return p < 0.0 ? 0.0 : p;
}

void check_trajectory(const Trajectory& t, const DiscretizedProtocol& proto) {
  const auto& slots = proto.alphabet.slots;
  if (t.indices.size() != slots.size())
    throw ShapeError("trajectory: expected " + std::to_string(slots.size()) +
                     " indices, got " + std::to_string(t.indices.size()));
  for (std::size_t j = 0; j < slots.size(); ++j)
    if (t.indices[j] < 0 || t.indices[j] >= slots[j].size())
      throw DomainError("trajectory: index " + std::to_string(t.indices[j]) +
                        " out of range at slot " + std::to_string(j));
}

// Precomputed per-protocol data shared by every trajectory visit. Rank-1
// alphabets use overlap chains; anything else falls back to projector
// products.
struct ChainContext {
  const TrajectoryAlphabet* alphabet = nullptr;
  int K = 0;
  double dt = 0.0;
  bool rank1 = false;
  std::vector<Matrix> hop;  // hop[j](m, n) = <j+1, m | j, n>
  Matrix rho_end;           // (n0, nK) -> <0, n0| rho |K, nK>
  Matrix rho_end_rev;       // (nK, n0) -> <K, nK| rho |0, n0>
  Eigen::VectorXd q0, qk;   // diagonal occupations at the two end slots
  const Matrix* rho = nullptr;
};

ChainContext make_context(const DiscretizedProtocol& proto, const DensityMatrix& rho) {
  ChainContext cx;
  cx.alphabet = &proto.alphabet;
  cx.K = proto.steps;
  cx.dt = proto.dt;
  cx.rho = &rho.matrix();
  cx.rank1 = proto.alphabet.all_rank_one();
  if (!cx.rank1) return cx;

  const auto& slots = proto.alphabet.slots;
  std::vector<Matrix> frames(slots.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    Matrix v(rho.dim(), slots[j].size());
    for (int n = 0; n < slots[j].size(); ++n) v.col(n) = slots[j].vectors[n];
    frames[j] = std::move(v);
  }
  cx.hop.resize(slots.size() - 1);
  for (std::size_t j = 0; j + 1 < slots.size(); ++j)
    cx.hop[j] = frames[j + 1].adjoint() * frames[j];
  cx.rho_end = frames.front().adjoint() * rho.matrix() * frames.back();
  cx.rho_end_rev = frames.back().adjoint() * rho.matrix() * frames.front();
  Eigen::VectorXd q0 = (frames.front().adjoint() * rho.matrix() * frames.front())
                           .diagonal()
                           .real();
  Eigen::VectorXd qk =
      (frames.back().adjoint() * rho.matrix() * frames.back()).diagonal().real();
  for (Eigen::Index n = 0; n < q0.size(); ++n)
    q0[n] = clamp_probability(q0[n], "occupation");
  for (Eigen::Index n = 0; n < qk.size(); ++n)
    qk[n] = clamp_probability(qk[n], "occupation");
  cx.q0 = std::move(q0);
  cx.qk = std::move(qk);
  return cx;
}

// Leaf payload: forward amplitude and measured weight, reversed ones when
// asked for. Work is the forward value; the reversed history carries -work.
template <class Visit>
void dfs_rank1(const ChainContext& cx, bool with_reverse, std::vector<int>& idx, int depth,
               Complex chain, double work, const Visit& visit) {
  const AlphabetSlot& slot = cx.alphabet->slots[depth];
  for (int n = 0; n < slot.size(); ++n) {
    idx[depth] = n;
    const Complex c2 = depth == 0 ? Complex(1.0, 0.0)
                                  : chain * cx.hop[depth - 1](n, idx[depth - 1]);
    const double w2 = work + (depth < cx.K ? cx.dt * slot.eigenvalues[n] : 0.0);
    if (depth == cx.K) {
      const double mod2 = std::norm(c2);
      const Complex amp = cx.rho_end(idx[0], n) * c2;
      const double meas = clamp_probability(cx.q0[idx[0]] * mod2, "measured weight");
      double rev_lin = 0.0, rev_meas = 0.0;
      if (with_reverse) {
        rev_lin = (std::conj(c2) * cx.rho_end_rev(n, idx[0])).real();
        rev_meas = clamp_probability(cx.qk[n] * mod2, "reversed measured weight");
      }
      visit(idx, w2, amp, meas, rev_lin, rev_meas);
    } else {
      dfs_rank1(cx, with_reverse, idx, depth + 1, c2, w2, visit);
    }
  }
}

template <class Visit>
void dfs_general(const ChainContext& cx, bool with_reverse, std::vector<int>& idx, int depth,
                 const Matrix& prefix, double work, const Visit& visit) {
  const AlphabetSlot& slot = cx.alphabet->slots[depth];
  for (int n = 0; n < slot.size(); ++n) {
    idx[depth] = n;
    const Matrix p2 =
        depth == 0 ? slot.projectors[n] : Matrix(slot.projectors[n] * prefix);
    const double w2 = work + (depth < cx.K ? cx.dt * slot.eigenvalues[n] : 0.0);
    if (depth == cx.K) {
      const Complex amp = (p2 * (*cx.rho)).trace();
      const double meas =
          clamp_probability(((p2.adjoint() * p2) * (*cx.rho)).trace().real(),
                            "measured weight");
      double rev_lin = 0.0, rev_meas = 0.0;
      if (with_reverse) {
        rev_lin = (p2.adjoint() * (*cx.rho)).trace().real();
        rev_meas = clamp_probability(((p2 * p2.adjoint()) * (*cx.rho)).trace().real(),
                                     "reversed measured weight");
      }
      visit(idx, w2, amp, meas, rev_lin, rev_meas);
    } else {
      dfs_general(cx, with_reverse, idx, depth + 1, p2, w2, visit);
    }
  }
}

// Run a subtree with the first `start` indices fixed.
template <class Visit>
void run_subtree(const ChainContext& cx, bool with_reverse, std::vector<int>& idx, int start,
                 const Visit& visit) {
  if (cx.rank1) {
    Complex chain(1.0, 0.0);
    double work = 0.0;
    for (int j = 0; j < start; ++j) {
      if (j > 0) chain *= cx.hop[j - 1](idx[j], idx[j - 1]);
      if (j < cx.K) work += cx.dt * cx.alphabet->slots[j].eigenvalues[idx[j]];
    }
    if (start > cx.K) {
      // Fully fixed trajectory (only possible when tasks cover every slot).
      throw DomainError("run_subtree: prefix covers the whole trajectory");
    }
    dfs_rank1(cx, with_reverse, idx, start, chain, work, visit);
  } else {
    Matrix prefix;
    double work = 0.0;
    for (int j = 0; j < start; ++j) {
      const Matrix& p = cx.alphabet->slots[j].projectors[idx[j]];
      prefix = j == 0 ? p : Matrix(p * prefix);
      if (j < cx.K) work += cx.dt * cx.alphabet->slots[j].eigenvalues[idx[j]];
    }
    dfs_general(cx, with_reverse, idx, start, prefix, work, visit);
  }
}

void check_guard(const DiscretizedProtocol& proto, const EnumerationGuard& guard) {
  const std::uint64_t count = proto.alphabet.trajectory_count();
  if (count > guard.cap)
    throw ResourceError("enumeration: trajectory count exceeds cap " +
                            std::to_string(guard.cap),
                        count);
}

}  // namespace

// ---------------------------------------------------------------------------
// Per-trajectory quantities.

double work_value(const Trajectory& t, const DiscretizedProtocol& proto) {
  check_trajectory(t, proto);
  double w = 0.0;
  for (int j = 0; j < proto.steps; ++j)
    w += proto.alphabet.slots[j].eigenvalues[t.indices[j]];
  return proto.dt * w;
}

namespace {

template <class Leaf>
auto visit_single(const Trajectory& t, const DiscretizedProtocol& proto,
                  const DensityMatrix& rho, bool with_reverse, const Leaf& leaf) {
  check_trajectory(t, proto);
  const ChainContext cx = make_context(proto, rho);
  const int K = cx.K;
  if (cx.rank1) {
    Complex chain(1.0, 0.0);
    for (int j = 1; j <= K; ++j) chain *= cx.hop[j - 1](t.indices[j], t.indices[j - 1]);
    const double mod2 = std::norm(chain);
    const Complex amp = cx.rho_end(t.indices[0], t.indices[K]) * chain;
    const double meas = cx.q0[t.indices[0]] * mod2;
    const Complex rev_amp =
        std::conj(chain) * cx.rho_end_rev(t.indices[K], t.indices[0]);
    const double rev_meas = cx.qk[t.indices[K]] * mod2;
    (void)with_reverse;
    return leaf(amp, meas, rev_amp, rev_meas);
  }
  Matrix c = proto.alphabet.slots[0].projectors[t.indices[0]];
  for (int j = 1; j <= K; ++j) c = Matrix(proto.alphabet.slots[j].projectors[t.indices[j]] * c);
  const Complex amp = (c * rho.matrix()).trace();
  const double meas = ((c.adjoint() * c) * rho.matrix()).trace().real();
  const Complex rev_amp = (c.adjoint() * rho.matrix()).trace();
  const double rev_meas = ((c * c.adjoint()) * rho.matrix()).trace().real();
  return leaf(amp, meas, rev_amp, rev_meas);
}

}  // namespace

Complex trajectory_amplitude(const Trajectory& t, const DiscretizedProtocol& proto,
                             const DensityMatrix& rho) {
  return visit_single(t, proto, rho, false,
                      [](Complex amp, double, Complex, double) { return amp; });
}

double linear_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                     const DensityMatrix& rho) {
  return trajectory_amplitude(t, proto, rho).real();
}

double measured_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                       const DensityMatrix& rho) {
  const double meas = visit_single(
      t, proto, rho, false, [](Complex, double m, Complex, double) { return m; });
  return clamp_probability(meas, "measured weight");
}

std::pair<double, double> reverse_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                                         const DensityMatrix& rho) {
  const Complex rev_amp = visit_single(
      t, proto, rho, true, [](Complex, double, Complex ra, double) { return ra; });
  return {rev_amp.real(), -work_value(t, proto)};
}

double reverse_measured_weight(const Trajectory& t, const DiscretizedProtocol& proto,
                               const DensityMatrix& rho) {
  const double rev = visit_single(
      t, proto, rho, true, [](Complex, double, Complex, double rm) { return rm; });
  return clamp_probability(rev, "reversed measured weight");
}

EndpointDecomposition endpoint_decomposition(const Trajectory& t,
                                             const DiscretizedProtocol& proto) {
  const auto* fb = std::get_if<FixedBasisSpec>(&proto.spec.variant);
  if (fb == nullptr || !proto.track_of)
    throw DomainError("endpoint_decomposition: fixed-basis protocols only");
  check_trajectory(t, proto);

  auto track = [&](int slot, int level) {
    const int tr = (*proto.track_of)[slot][level];
    if (tr < 0)
      throw DomainError("endpoint_decomposition: level has no unique track at slot " +
                        std::to_string(slot));
    return tr;
  };

  const int K = proto.steps;
  const double dt = proto.dt;
  EndpointDecomposition out;
  out.endpoint_diff = fb->tracks[track(K, t.indices[K])].value(proto.tau()) -
                      fb->tracks[track(0, t.indices[0])].value(0.0);
  for (int j = 0; j < K; ++j) {
    const double tj1 = (j + 1) * dt;
    out.delta_e += fb->tracks[track(j + 1, t.indices[j + 1])].value(tj1) -
                   fb->tracks[track(j, t.indices[j])].value(tj1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration.

void enumerate_trajectories(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                            const EnumerationGuard& guard, const RecordSink& sink) {
  check_guard(proto, guard);
  const ChainContext cx = make_context(proto, rho);
  std::vector<int> idx(proto.steps + 1, 0);
  run_subtree(cx, false, idx, 0,
              [&](const std::vector<int>& indices, double w, Complex amp, double meas,
                  double, double) {
                TrajectoryRecord rec;
                rec.trajectory.indices = indices;
                rec.work = w;
                rec.amplitude = amp;
                rec.linear_weight = amp.real();
                rec.measured_weight = meas;
                sink(rec);
              });
}

WorkAccumulation accumulate_work(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                                 const EnumerationGuard& guard, int threads,
                                 bool with_reverse) {
  check_guard(proto, guard);
  const ChainContext cx = make_context(proto, rho);
  const auto& slots = proto.alphabet.slots;

  auto make_visitor = [with_reverse](WorkAccumulation* acc) {
    return [acc, with_reverse](const std::vector<int>&, double w, Complex amp, double meas,
                               double rev_lin, double rev_meas) {
      WorkSums& s = acc->bins[w];
      s.linear += amp.real();
      s.measured += meas;
      if (with_reverse) {
        s.reverse_linear += rev_lin;
        s.reverse_measured += rev_meas;
      }
      acc->amplitude_total += amp;
      ++acc->count;
    };
  };

  if (threads <= 1) {
    WorkAccumulation acc;
    std::vector<int> idx(proto.steps + 1, 0);
    run_subtree(cx, with_reverse, idx, 0, make_visitor(&acc));
    return acc;
  }

  // Workers own disjoint subtrees fixed by the first slot (and the second
  // when the first is narrower than the thread count). Per-task results merge
  // in task order, so the outcome does not depend on scheduling.
  std::vector<std::vector<int>> prefixes;
  if (slots[0].size() >= threads || slots.size() < 2) {
    for (int n = 0; n < slots[0].size(); ++n) prefixes.push_back({n});
  } else {
    for (int n0 = 0; n0 < slots[0].size(); ++n0)
      for (int n1 = 0; n1 < slots[1].size(); ++n1) prefixes.push_back({n0, n1});
  }

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(prefixes.size())));
  std::vector<WorkAccumulation> partial(prefixes.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t task = w; task < prefixes.size(); task += workers) {
        std::vector<int> idx(proto.steps + 1, 0);
        std::copy(prefixes[task].begin(), prefixes[task].end(), idx.begin());
        run_subtree(cx, with_reverse, idx, static_cast<int>(prefixes[task].size()),
                    make_visitor(&partial[task]));
      }
    });
  }
  for (auto& th : pool) th.join();

  WorkAccumulation acc;
  for (const auto& part : partial) {
    for (const auto& [w, sums] : part.bins) {
      WorkSums& s = acc.bins[w];
      s.linear += sums.linear;
      s.measured += sums.measured;
      s.reverse_linear += sums.reverse_linear;
      s.reverse_measured += sums.reverse_measured;
    }
    acc.amplitude_total += part.amplitude_total;
    acc.count += part.count;
  }
  return acc;
}

void spill_records(const DiscretizedProtocol& proto, const DensityMatrix& rho,
                   const EnumerationGuard& guard, std::ostream& out) {
  enumerate_trajectories(proto, rho, guard, [&](const TrajectoryRecord& rec) {
    std::string line;
    for (std::size_t j = 0; j < rec.trajectory.indices.size(); ++j) {
      if (j) line += ',';
      line += std::to_string(rec.trajectory.indices[j]);
    }
    line += '\t';
    line += format_number(rec.work);
    line += '\t';
    line += format_number(rec.amplitude.real());
    line += '\t';
    line += format_number(rec.amplitude.imag());
    line += '\t';
    line += format_number(rec.linear_weight);
    line += '\t';
    line += format_number(rec.measured_weight);
    line += '\n';
    out << line;
  });
}

// ---------------------------------------------------------------------------
// Transfer-matrix route for the measured statistics.

std::map<double, double> measured_bins_markov(const DiscretizedProtocol& proto,
                                              const DensityMatrix& rho,
                                              std::uint64_t state_cap) {
  if (!proto.alphabet.all_rank_one())
    throw DomainError("measured_bins_markov: needs rank-1 alphabets at every slot");
  const auto& slots = proto.alphabet.slots;
  const int K = proto.steps;
  const double dt = proto.dt;

  std::vector<Matrix> frames(slots.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    Matrix v(proto.dim(), slots[j].size());
    for (int n = 0; n < slots[j].size(); ++n) v.col(n) = slots[j].vectors[n];
    frames[j] = std::move(v);
  }

  // Partial work values that differ by less than this are one state; far
  // below any default bin width, far above accumulated rounding.
  double span = 0.0;
  for (int j = 0; j < K; ++j) {
    double peak = 0.0;
    for (double x : slots[j].eigenvalues) peak = std::max(peak, std::abs(x));
    span += dt * peak;
  }
  const double key_tol = 1e-12 * std::max(1.0, span);

  Eigen::VectorXd start =
      (frames[0].adjoint() * rho.matrix() * frames[0]).diagonal().real();
  for (Eigen::Index n = 0; n < start.size(); ++n)
    start[n] = clamp_probability(start[n], "occupation");

  std::map<double, Eigen::VectorXd> dp;
  dp.emplace(0.0, std::move(start));

  for (int j = 0; j < K; ++j) {
    const Eigen::MatrixXd t_hop = (frames[j + 1].adjoint() * frames[j]).cwiseAbs2();
    std::map<double, Eigen::VectorXd> next;
    for (const auto& [w, vec] : dp) {
      for (int n = 0; n < slots[j].size(); ++n) {
        if (vec[n] == 0.0) continue;
        const double key = w + dt * slots[j].eigenvalues[n];
        auto [it, fresh] = next.try_emplace(key, Eigen::VectorXd::Zero(slots[j + 1].size()));
        it->second += vec[n] * t_hop.col(n);
      }
    }
    // Merge keys that collided up to rounding.
    std::map<double, Eigen::VectorXd> merged;
    for (auto& [w, vec] : next) {
      if (!merged.empty()) {
        auto last = std::prev(merged.end());
        if (w - last->first <= key_tol) {
          last->second += vec;
          continue;
        }
      }
      merged.emplace(w, std::move(vec));
    }
    if (merged.size() > state_cap)
      throw ResourceError("measured_bins_markov: state count exceeds cap", merged.size());
    dp = std::move(merged);
  }

  std::map<double, double> bins;
  for (const auto& [w, vec] : dp) bins[w] = vec.sum();
  return bins;
}

}  // namespace qwork
