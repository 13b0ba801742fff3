#pragma once

namespace qwork::tol {

// Every invariant check in the library and in the test suites reads its
// threshold from here. All operator-level distances are max-norm (largest
// entry modulus).

inline constexpr double hermiticity = 1e-10;       // ||A - A^dag||
inline constexpr double unitarity = 1e-10;         // ||U^dag U - 1||
inline constexpr double density_trace = 1e-12;     // |Tr rho - 1|
inline constexpr double density_psd = 1e-10;       // min eigenvalue >= -this
inline constexpr double projector = 1e-10;         // orthogonality, completeness, reconstruction
inline constexpr double normalization = 1e-10;     // |sum of weights - 1|
inline constexpr double first_law = 1e-9;          // finite-step mean-work identity
inline constexpr double commutator = 1e-9;         // ||[A,B]|| treated as commuting below this
inline constexpr double weight_clamp = 1e-12;      // probabilities above -this clamp to 0

// Scale factors for data-dependent tolerances.
inline constexpr double degeneracy_factor = 1e-9;  // x spectral norm: eigenvalue merge window
inline constexpr double bin_factor = 1e-9;         // x max|w|: work bin merge window

}  // namespace qwork::tol
