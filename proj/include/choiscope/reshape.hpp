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


#ifndef CHOISCOPE_RESHAPE_HPP_
#define CHOISCOPE_RESHAPE_HPP_

#include <cstddef>
#include <optional>
#include <utility>

#include "choiscope/numerics.hpp"

namespace choiscope {

// Index calculus for bipartite operators.
//
// Composite convention: the basis vector |m>|mu> (A index m, B index mu,
// both 0-based) sits at flat index mu * d_A + m. The A index varies fastest
// even though A is written first, so the matrix of X (x) Y has entry
// x[m][n] * y[mu][nu] at row mu*d_A + m, column nu*d_A + n.
//
// Worked 2x2 example, X = [[a, b], [c, d]], Y = diag(1, 2):
//
//   X (x) Y = [[a, b, 0,  0 ],
//              [c, d, 0,  0 ],
//              [0, 0, 2a, 2b],
//              [0, 0, 2c, 2d]]
//
// i.e. the block matrix [y_{mu nu} X]. Vectorization stacks columns, so
// vectorize(G)[j*p + i] = G(i, j).

struct BipartiteShape {
  std::size_t d_a = 1;
  std::size_t d_b = 1;

  std::size_t dim() const { return d_a * d_b; }
  bool operator==(const BipartiteShape&) const = default;
};

enum class TransposeTarget { kA, kB, kBoth };

ComplexVector vectorize(const ComplexMatrix& g);

/// Inverse of vectorize. Throws kDimensionMismatch unless v.size() == p*q.
ComplexMatrix devectorize(const ComplexVector& v, std::size_t p, std::size_t q);

/// X (x) Y under the composite convention above. Factors may be rectangular.
ComplexMatrix tensor(const ComplexMatrix& x, const ComplexMatrix& y);

/// |x>|y> under the composite convention: entry mu*dim(x) + m is x_m y_mu.
ComplexVector tensor(const ComplexVector& x, const ComplexVector& y);

ComplexMatrix partial_trace_b(const ComplexMatrix& z, BipartiteShape shape);
ComplexMatrix partial_trace_a(const ComplexMatrix& z, BipartiteShape shape);

/// S = sum_ij |ij><ji| on C^n (x) C^n.
ComplexMatrix swap_operator(std::size_t n);

/// F(Z) = S Z S, F_r(Z) = S Z, F_c(Z) = Z S. Require d_A == d_B.
ComplexMatrix flip(const ComplexMatrix& z, BipartiteShape shape);
ComplexMatrix flip_row(const ComplexMatrix& z, BipartiteShape shape);
ComplexMatrix flip_col(const ComplexMatrix& z, BipartiteShape shape);

/// T_A(Z)_{m mu, n nu} = Z_{n mu, m nu}; T_B swaps the B indices; kBoth is
/// the full transpose.
ComplexMatrix partial_transpose(const ComplexMatrix& z, BipartiteShape shape,
                                TransposeTarget which);

/// Realignment: R(Z)[n*d_A + m, nu*d_B + mu] = Z[mu*d_A + m, nu*d_A + n].
/// Column nu*d_B + mu of R(Z) is vectorize of block Z_{mu nu}. Output is
/// d_A^2 x d_B^2.
ComplexMatrix realign(const ComplexMatrix& z, BipartiteShape shape);

/// Inverse of realign for the same shape. Coincides with realign when
/// d_A == d_B.
ComplexMatrix unrealign(const ComplexMatrix& w, BipartiteShape shape);

/// R'(Z)_{mn, mu nu} = Z_{nu n, mu m}. Requires d_A == d_B.
ComplexMatrix realign_prime(const ComplexMatrix& z, BipartiteShape shape);

/// sum_{i,j} (I (x) |i><j|) Z (|i><j| (x) I), evaluated with explicit matrix
/// products. Independent route to realign for N^2 x N^2 inputs.
ComplexMatrix realign_sandwich(const ComplexMatrix& z);

/// Splits Z = X (x) Y when realign(Z) has rank one. The scale is balanced so
/// that ||X||_F == ||Y||_F. Returns nullopt when the rank exceeds one.
/// Throws kZeroMatrix for Z == 0.
std::optional<std::pair<ComplexMatrix, ComplexMatrix>> product_factorize(
    const ComplexMatrix& z, BipartiteShape shape, Tolerance tol = {});

/// Evaluates both sides of |X (x) Y>> = (I (x) S (x) I)|X>>|Y>> and returns
/// the largest entrywise deviation.
double tensor_vec_identity_deviation(const ComplexMatrix& x, const ComplexMatrix& y);

/// tensor_vec_identity_deviation(x, y) <= 1e-10.
bool tensor_vec_identity_check(const ComplexMatrix& x, const ComplexMatrix& y);

}  // namespace choiscope

#endif  // CHOISCOPE_RESHAPE_HPP_
