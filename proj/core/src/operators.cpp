#include "qwork/operators.hpp"

#include <algorithm>
#include <cmath>

namespace qwork {

double max_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw ShapeError(std::string(what) + ": need a square matrix of dimension >= 1, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

Eigen::SelfAdjointEigenSolver<Matrix> solve_hermitian(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": eigensolver failed to converge",
                         max_norm(m));
  return solver;
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix m, double tolerance) {
  require_square(m, "HermitianOperator");
  const double residual = max_norm(m - m.adjoint());
  if (residual > tolerance)
    throw DomainError("HermitianOperator: ||A - A^dag|| = " + std::to_string(residual) +
                      " exceeds tolerance " + std::to_string(tolerance));
  mat_ = 0.5 * (m + m.adjoint().eval());
}

UnitaryOperator::UnitaryOperator(Matrix m, double tolerance) {
  require_square(m, "UnitaryOperator");
  const double residual = max_norm(m.adjoint() * m - identity(m.rows()));
  if (residual > tolerance)
    throw DomainError("UnitaryOperator: ||U^dag U - 1|| = " + std::to_string(residual) +
                      " exceeds tolerance " + std::to_string(tolerance));
  mat_ = std::move(m);
}

DensityMatrix::DensityMatrix(Matrix m) {
  require_square(m, "DensityMatrix");
  const double herm = max_norm(m - m.adjoint());
  if (herm > tol::hermiticity)
    throw DomainError("DensityMatrix: not Hermitian, ||rho - rho^dag|| = " +
                      std::to_string(herm));
  Matrix sym = 0.5 * (m + m.adjoint().eval());
  const double trace_gap = std::abs(sym.trace() - Complex(1.0, 0.0));
  if (trace_gap > tol::density_trace)
    throw DomainError("DensityMatrix: |Tr rho - 1| = " + std::to_string(trace_gap) +
                      " exceeds " + std::to_string(tol::density_trace));
  const auto solver = solve_hermitian(sym, "DensityMatrix");
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -tol::density_psd)
    throw DomainError("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
  mat_ = std::move(sym);
}

Matrix SpectralDecomposition::reconstruct() const {
  Matrix sum = Matrix::Zero(dim(), dim());
  for (int n = 0; n < levels(); ++n) sum += eigenvalues[n] * projectors[n];
  return sum;
}

CVector SpectralDecomposition::vector(int level) const {
  if (level < 0 || level >= levels())
    throw DomainError("SpectralDecomposition::vector: level out of range");
  if (ranks[level] != 1)
    throw DomainError("SpectralDecomposition::vector: level " + std::to_string(level) +
                      " is degenerate (rank " + std::to_string(ranks[level]) + ")");
  return basis[level].col(0);
}

SpectralDecomposition spectral_decompose(const HermitianOperator& a, double degeneracy_tol,
                                         bool strict) {
  const auto solver = solve_hermitian(a.matrix(), "spectral_decompose");
  const Eigen::VectorXd& vals = solver.eigenvalues();  // ascending
  const Matrix& vecs = solver.eigenvectors();
  const Eigen::Index d = a.dim();

  if (degeneracy_tol < 0.0) {
    const double spectral_norm = vals.cwiseAbs().maxCoeff();
    degeneracy_tol = tol::degeneracy_factor * spectral_norm;
  }

  SpectralDecomposition out;
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index stop = start + 1;
    while (stop < d && vals[stop] - vals[stop - 1] <= degeneracy_tol) ++stop;
    const Eigen::Index rank = stop - start;
    if (strict && rank > 1)
      throw DomainError("spectral_decompose: degenerate level of rank " +
                        std::to_string(rank) + " near eigenvalue " +
                        std::to_string(vals[start]) + " in strict mode");
    const Matrix cluster = vecs.middleCols(start, rank);
    out.eigenvalues.push_back(vals.segment(start, rank).mean());
    out.projectors.push_back(cluster * cluster.adjoint());
    out.ranks.push_back(static_cast<int>(rank));
    out.basis.push_back(cluster);
    start = stop;
  }
  return out;
}

UnitaryOperator unitary_step(const HermitianOperator& h, double dt) {
  const auto solver = solve_hermitian(h.matrix(), "unitary_step");
  const Eigen::Index d = h.dim();
  CVector phases(d);
  for (Eigen::Index n = 0; n < d; ++n)
    phases[n] = std::exp(Complex(0.0, -solver.eigenvalues()[n] * dt));
  Matrix u = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
  return UnitaryOperator(std::move(u));
}

DensityMatrix thermal_state(const HermitianOperator& h, double beta) {
  if (beta < 0.0 || !std::isfinite(beta))
    throw DomainError("thermal_state: beta must be finite and >= 0, got " +
                      std::to_string(beta));
  const auto solver = solve_hermitian(h.matrix(), "thermal_state");
  const Eigen::Index d = h.dim();
  // Factor out the largest exponent so beta * spectral spread can be huge.
  Eigen::VectorXd exponents = -beta * solver.eigenvalues();
  const double shift = exponents.maxCoeff();
  Eigen::VectorXd weights = (exponents.array() - shift).exp();
  weights /= weights.sum();
  Matrix rho = solver.eigenvectors() * weights.asDiagonal().toDenseMatrix().cast<Complex>() *
               solver.eigenvectors().adjoint();
  return DensityMatrix(std::move(rho));
}

double log_partition(const HermitianOperator& h, double beta) {
  if (beta < 0.0 || !std::isfinite(beta))
    throw DomainError("log_partition: beta must be finite and >= 0, got " +
                      std::to_string(beta));
  const auto solver = solve_hermitian(h.matrix(), "log_partition");
  Eigen::VectorXd exponents = -beta * solver.eigenvalues();
  const double shift = exponents.maxCoeff();
  return shift + std::log((exponents.array() - shift).exp().sum());
}

HermitianOperator heisenberg_transform(const HermitianOperator& x, const UnitaryOperator& v) {
  if (x.dim() != v.dim())
    throw ShapeError("heisenberg_transform: operator dim " + std::to_string(x.dim()) +
                     " vs unitary dim " + std::to_string(v.dim()));
  Matrix out = v.matrix().adjoint() * x.matrix() * v.matrix();
  return HermitianOperator(std::move(out));
}

double commutator_max_norm(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("commutator_max_norm: dimension mismatch");
  return max_norm(a * b - b * a);
}

}  // namespace qwork
