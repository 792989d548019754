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


// The Hilbert-Schmidt space of superoperators on M_N.  Given orthonormal
// operator bases {E_a} and {F_b}, a map has two coefficient matrices:
//
//   L = sum_ab P[a,b] |E_a>><<F_b|      (X -> E_a tr(F_b^dagger X))
//     = sum_ab Q[a,b] E_a (x) conj(F_b)  (X -> E_a X F_b^dagger)
//
// Coefficient matrices are flattened row-major, (a, b) -> a * N^2 + b, when a
// kernel acts on them.

#ifndef CHOISCOPE_SUPEROP_HPP_
#define CHOISCOPE_SUPEROP_HPP_

#include <cstddef>
#include <vector>

#include "choiscope/channels.hpp"
#include "choiscope/numerics.hpp"
#include "choiscope/random.hpp"

namespace choiscope {

struct OperatorBasis {
  std::vector<ComplexMatrix> elements;
  std::size_t n = 0;

  // Throws NotOrthonormal unless there are n^2 orthonormal n x n elements.
  static OperatorBasis make(std::vector<ComplexMatrix> elements, double tol = 1e-10);
};

struct SuperopCoeffs {
  ComplexMatrix p;
  ComplexMatrix q;
  OperatorBasis e;
  OperatorBasis f;
};

enum class CoeffDirection { kQToP, kPToQ };

double orthonormality_deviation(const std::vector<ComplexMatrix>& elements);

// |i><j| at position j * n + i, matching vectorize.
OperatorBasis elementary_basis(std::size_t n);

// Elementary basis rotated by a Haar unitary on vectorized coordinates.
OperatorBasis random_basis(std::size_t n, Rng& rng);

// sum_a tr(Phi(E_a)^dagger Psi(E_a)).
Complex superop_inner(const Channel& phi, const Channel& psi, const OperatorBasis& basis);

ComplexMatrix delta_liouville(const ComplexMatrix& e, const ComplexMatrix& f);
ComplexMatrix theta_liouville(const ComplexMatrix& e, const ComplexMatrix& f);

SuperopCoeffs coefficients(const Channel& phi, const OperatorBasis& e, const OperatorBasis& f);

ComplexMatrix reconstruct_from_p(const ComplexMatrix& p, const OperatorBasis& e,
                                 const OperatorBasis& f);
ComplexMatrix reconstruct_from_q(const ComplexMatrix& q, const OperatorBasis& e,
                                 const OperatorBasis& f);

// N^4 x N^4 matrix with entry tr(E_a^dagger E_m F_b F_n^dagger) at
// (a * N^2 + b, m * N^2 + n).
ComplexMatrix coefficient_kernel(const OperatorBasis& e, const OperatorBasis& f);

// The same kernel serves both directions.  Materialized for N <= 3,
// contracted through the Liouville matrix otherwise.
ComplexMatrix convert_coeffs(const ComplexMatrix& c, const OperatorBasis& e,
                             const OperatorBasis& f, CoeffDirection direction);

// sum_a Phi(E_a) (x) F_a.
ComplexMatrix lambda_iso(const Channel& phi, const OperatorBasis& e, const OperatorBasis& f);

struct ResolutionDeviation {
  double vec_identity = 0.0;  // sum E (x) conj(E) against |I>><<I|
  double swap = 0.0;          // sum E (x) E^dagger against the swap
};

ResolutionDeviation basis_resolution_deviation(const OperatorBasis& basis);
bool basis_resolution_checks(const OperatorBasis& basis, double tol = 1e-9);

}  // namespace choiscope

#endif  // CHOISCOPE_SUPEROP_HPP_
