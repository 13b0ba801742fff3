#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qwork/errors.hpp"
#include "qwork/tolerances.hpp"

namespace qwork {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

double max_norm(const Matrix& m);
Matrix identity(Eigen::Index dim);

// Pauli matrices in the computational basis.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

// ---------------------------------------------------------------------------
// Validated operator wrappers. Construction checks the defining invariant
// once; everything downstream can then rely on it.

class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix m, double tolerance = tol::hermiticity);
  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;  // stored symmetrized, (A + A^dag)/2
};

class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix m, double tolerance = tol::unitarity);
  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m);
  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

// Eigenvalue clusters of a Hermitian operator. Eigenvalues closer than the
// merge window are treated as one degenerate level with a rank>1 projector,
// so the list is strictly increasing.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  std::vector<Matrix> projectors;       // Hermitian, idempotent, complete
  std::vector<int> ranks;
  std::vector<Matrix> basis;            // d x rank orthonormal columns per level

  Eigen::Index dim() const { return projectors.empty() ? 0 : projectors.front().rows(); }
  int levels() const { return static_cast<int>(eigenvalues.size()); }
  Matrix reconstruct() const;           // sum_n x_n P_n
  // Unit eigenvector of a rank-1 level; DomainError on a degenerate one.
  CVector vector(int level) const;
};

// ---------------------------------------------------------------------------
// Operations. All matrix functions go through the eigensystem of a Hermitian
// operator; nothing here exponentiates a non-normal matrix.

// degeneracy_tol < 0 selects the default window tol::degeneracy_factor x
// spectral norm. With strict set, any degenerate level raises DomainError.
SpectralDecomposition spectral_decompose(const HermitianOperator& a,
                                         double degeneracy_tol = -1.0,
                                         bool strict = false);

// exp(-i H dt)
UnitaryOperator unitary_step(const HermitianOperator& h, double dt);

// exp(-beta H)/Z, evaluated with the largest exponent factored out so large
// beta*spread cannot overflow. beta = 0 gives the maximally mixed state.
DensityMatrix thermal_state(const HermitianOperator& h, double beta);

// ln Tr exp(-beta H), same overflow guard.
double log_partition(const HermitianOperator& h, double beta);

// V^dag X V, re-symmetrized.
HermitianOperator heisenberg_transform(const HermitianOperator& x, const UnitaryOperator& v);

double commutator_max_norm(const Matrix& a, const Matrix& b);

}  // namespace qwork
