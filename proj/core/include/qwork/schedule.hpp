#pragma once

#include <vector>

#include "qwork/errors.hpp"

namespace qwork {

// Scalar function of time on [0, tau]: the ramp profile lambda(t) of a
// driven Hamiltonian, or one energy track of a fixed-basis protocol.
// Linear and cosine profiles carry exact derivatives and integrals; sampled
// profiles interpolate linearly and differentiate by central differences on
// the sample grid.
class Schedule {
 public:
  enum class Kind { linear, cosine, sampled };

  static Schedule linear(double v0, double v1, double tau);
  // Smooth ramp v0 -> v1 with vanishing endpoint slope:
  // v0 + (v1 - v0) (1 - cos(pi t / tau)) / 2.
  static Schedule cosine(double v0, double v1, double tau);
  static Schedule sampled(std::vector<double> times, std::vector<double> values);

  double value(double t) const;
  double derivative(double t) const;
  double integral(double t) const;  // int_0^t value(s) ds

  Kind kind() const { return kind_; }
  double start() const;  // value(0)
  double end() const;    // value(tau)
  double duration() const { return tau_; }

 private:
  Schedule() = default;
  Kind kind_ = Kind::linear;
  double v0_ = 0.0, v1_ = 0.0, tau_ = 1.0;
  std::vector<double> times_, values_, node_slopes_;
};

}  // namespace qwork
