#include "qwork/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace qwork {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Schedule Schedule::linear(double v0, double v1, double tau) {
  if (!(tau > 0.0)) throw DomainError("Schedule::linear: tau must be > 0");
  Schedule s;
  s.kind_ = Kind::linear;
  s.v0_ = v0;
  s.v1_ = v1;
  s.tau_ = tau;
  return s;
}

Schedule Schedule::cosine(double v0, double v1, double tau) {
  if (!(tau > 0.0)) throw DomainError("Schedule::cosine: tau must be > 0");
  Schedule s;
  s.kind_ = Kind::cosine;
  s.v0_ = v0;
  s.v1_ = v1;
  s.tau_ = tau;
  return s;
}

Schedule Schedule::sampled(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size())
    throw DomainError("Schedule::sampled: times and values differ in length");
  if (times.size() < 2) throw DomainError("Schedule::sampled: need at least two samples");
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end())
    throw DomainError("Schedule::sampled: times must be strictly increasing");
  if (times.front() != 0.0)
    throw DomainError("Schedule::sampled: first sample must sit at t = 0");

  Schedule s;
  s.kind_ = Kind::sampled;
  s.tau_ = times.back();
  s.v0_ = values.front();
  s.v1_ = values.back();
  // Central-difference slope at each node, one-sided at the ends; value
  // queries interpolate these nodal slopes so the derivative is continuous.
  const std::size_t n = times.size();
  s.node_slopes_.resize(n);
  s.node_slopes_[0] = (values[1] - values[0]) / (times[1] - times[0]);
  s.node_slopes_[n - 1] = (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    s.node_slopes_[i] = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

namespace {

// Index of the segment containing t (clamped to the grid).
std::size_t segment_of(const std::vector<double>& times, double t) {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  if (hi == 0) return 0;
  if (hi >= times.size()) return times.size() - 2;
  return hi - 1;
}

}  // namespace

double Schedule::value(double t) const {
  switch (kind_) {
    case Kind::linear:
      return v0_ + (v1_ - v0_) * (t / tau_);
    case Kind::cosine:
      return v0_ + 0.5 * (v1_ - v0_) * (1.0 - std::cos(kPi * t / tau_));
    case Kind::sampled: {
      const std::size_t i = segment_of(times_, t);
      const double f = (t - times_[i]) / (times_[i + 1] - times_[i]);
      return values_[i] + f * (values_[i + 1] - values_[i]);
    }
  }
  return 0.0;
}

double Schedule::derivative(double t) const {
  switch (kind_) {
    case Kind::linear:
      return (v1_ - v0_) / tau_;
    case Kind::cosine:
      return 0.5 * (v1_ - v0_) * (kPi / tau_) * std::sin(kPi * t / tau_);
    case Kind::sampled: {
      const std::size_t i = segment_of(times_, t);
      const double f = (t - times_[i]) / (times_[i + 1] - times_[i]);
      return node_slopes_[i] + f * (node_slopes_[i + 1] - node_slopes_[i]);
    }
  }
  return 0.0;
}

double Schedule::integral(double t) const {
  switch (kind_) {
    case Kind::linear:
      return v0_ * t + 0.5 * (v1_ - v0_) * t * t / tau_;
    case Kind::cosine:
      return v0_ * t +
             0.5 * (v1_ - v0_) * (t - (tau_ / kPi) * std::sin(kPi * t / tau_));
    case Kind::sampled: {
      // Trapezoid over full segments plus the partial one.
      double acc = 0.0;
      std::size_t i = 0;
      while (i + 1 < times_.size() && times_[i + 1] <= t) {
        acc += 0.5 * (values_[i] + values_[i + 1]) * (times_[i + 1] - times_[i]);
        ++i;
      }
      if (i + 1 < times_.size() && t > times_[i]) {
        const double vt = value(t);
        acc += 0.5 * (values_[i] + vt) * (t - times_[i]);
      }
      return acc;
    }
  }
  return 0.0;
}

double Schedule::start() const { return kind_ == Kind::sampled ? values_.front() : v0_; }
double Schedule::end() const { return kind_ == Kind::sampled ? values_.back() : v1_; }

}  // namespace qwork
