// Copyright 2026 The choiscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef CHOISCOPE_NUMERICS_HPP_
#define CHOISCOPE_NUMERICS_HPP_

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace choiscope {

using Complex = std::complex<double>;

// Dense complex matrix, stored row-major. Every composite-index formula in
// the library is written index-wise, so the storage order never leaks into
// results.
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RealVector = Eigen::VectorXd;

// Absolute and relative thresholds shared by every numerical predicate.
struct Tolerance {
  double atol = 1e-9;
  double rtol = 1e-9;
};

// Result of a Hermitian eigendecomposition. Eigenvalues ascend; column k of
// `eigenvectors` belongs to eigenvalue k.
struct HermitianEigen {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

ComplexMatrix identity(std::size_t n);

/// Largest absolute entry, 0 for an empty matrix.
double max_abs(const ComplexMatrix& m);

/// Largest absolute entrywise difference. Shapes must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

double frobenius_norm(const ComplexMatrix& m);

bool all_finite(const ComplexMatrix& m);

/// True when ||m - m^dagger||_max <= tol.atol. False for non-square input.
bool is_hermitian(const ComplexMatrix& m, Tolerance tol = {});

/// |v><w| = v w^dagger.
ComplexMatrix outer(const ComplexVector& v, const ComplexVector& w);

/// Eigendecomposition of a Hermitian matrix. The input is symmetrised as
/// (M + M^dagger)/2 after the Hermiticity check so that round-off in the
/// caller does not produce complex eigenvalues.
///
/// Throws Error{kNonFinite} for NaN/inf entries and Error{kNotHermitian} when
/// ||M - M^dagger||_max > tol.atol (or M is not square).
HermitianEigen eig_hermitian(const ComplexMatrix& m, Tolerance tol = {});

/// Minimum eigenvalue >= -atol. Throws kNotHermitian like eig_hermitian.
bool is_psd(const ComplexMatrix& m, Tolerance tol = {});

/// Number of singular values above atol + rtol * sigma_max.
std::size_t svd_rank(const ComplexMatrix& m, Tolerance tol = {});

/// Moore-Penrose inverse of a Hermitian PSD matrix: eigenvalues above atol
/// are inverted, the rest are zeroed.
ComplexMatrix pseudo_inverse(const ComplexMatrix& m, Tolerance tol = {});

/// Hilbert-Schmidt inner product tr(A^dagger B).
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace choiscope

#endif  // CHOISCOPE_NUMERICS_HPP_
