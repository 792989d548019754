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


// Best separable approximation of bipartite states and operations.
//
// A decomposition writes rho = sum_a w_a |e_a f_a><e_a f_a| + residual, with
// the residual PSD and the weights maximal with respect to the chosen product
// vectors.  The optimum over a fixed candidate set is found with a primal-dual
// interior point solver followed by coordinate-ascent polishing; bsa_state
// grows the candidate set by column generation against the dual matrix.
// Reported weights are a certified lower bound on the true separable weight.

#ifndef CHOISCOPE_BSA_HPP_
#define CHOISCOPE_BSA_HPP_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "choiscope/channels.hpp"
#include "choiscope/numerics.hpp"
#include "choiscope/reshape.hpp"

namespace choiscope {

struct ProductVector {
  ComplexVector e;  // A factor
  ComplexVector f;  // B factor

  // Normalizes both factors; throws ZeroMatrix on a zero factor.
  static ProductVector make(ComplexVector e, ComplexVector f);
  ComplexVector composite() const { return tensor(e, f); }
};

struct BsaTerm {
  double weight = 0.0;
  ProductVector vector;
  std::size_t candidate_index = 0;  // position in the candidate list it came from
};

struct BsaDecomposition {
  double lambda_total = 0.0;
  std::vector<BsaTerm> terms;
  ComplexMatrix separable_part;  // sum w_a P_a / sum w_a (zero when there are no terms)
  ComplexMatrix residual;        // rho - lambda_total * separable_part
  double residual_min_eigenvalue = 0.0;
  std::size_t candidate_set_size = 0;
  std::vector<double> sweep_history;  // sum of weights after the solver and each polish sweep
  bool converged = true;
  std::size_t rounds = 0;  // candidate-set rounds run by bsa_state
};

struct BsaOptions {
  std::size_t max_rounds = 40;
  std::size_t stall_rounds = 3;
  double stall_tol = 1e-5;
  std::size_t generation_starts = 40;
  std::size_t max_sweeps = 500;
};

// Range membership: psi is in range(rho) when the squared norm of its
// component along eigenvectors at or below 1e-12 * lambda_max is <= 1e-9.
inline constexpr double kRangeLeakTol = 1e-9;

// Largest w >= 0 with rho - w |psi><psi| PSD (psi is normalized first).
// Throws NotAState if rho is not Hermitian PSD within tol.
double max_lambda(const ComplexMatrix& rho, const ComplexVector& psi, Tolerance tol = {});

// Pair (w1, w2) maximizing w1 + w2 with rho - w1 P1 - w2 P2 PSD, each weight
// maximal given the other.  Throws InvalidArgument when P1 == P2.
std::pair<double, double> max_pair(const ComplexMatrix& rho, const ComplexVector& psi1,
                                   const ComplexVector& psi2, Tolerance tol = {});

// Seeded unit product vectors inside range(rho), duplicates removed.
std::vector<ProductVector> candidate_products(const ComplexMatrix& rho, BipartiteShape shape,
                                              std::size_t count, std::uint64_t seed);

// Optimal weights over a fixed candidate list.  Throws CandidateOutsideRange
// if a candidate leaves range(rho).
BsaDecomposition osa_fixed_set(const ComplexMatrix& rho, const std::vector<ProductVector>& v,
                               Tolerance tol = {}, std::size_t max_sweeps = 500);

// Best separable approximation of a unit-trace bipartite state.
BsaDecomposition bsa_state(const ComplexMatrix& rho, BipartiteShape shape, std::size_t budget,
                           std::uint64_t seed, const BsaOptions& options = {});

// max over candidates of |max_lambda(rho_a, P_a) - w_a|, where rho_a removes
// every other term from rho.  Candidates without a term have w_a = 0.
double single_maximality_gap(const ComplexMatrix& rho, const BsaDecomposition& dec,
                             const std::vector<ProductVector>& v);

// Largest gain of max_pair over the current weights, over up to max_pairs
// pairs that involve at least one term.
double pair_maximality_gap(const ComplexMatrix& rho, const BsaDecomposition& dec,
                           const std::vector<ProductVector>& v, std::size_t max_pairs,
                           std::uint64_t seed);

// ---- Operations on a bipartite system H1 (x) H2, both of dimension n. ----

// Permutation P with P vectorize(M) = vec'(M), where vec' groups the
// indices of M as (A_out, A_in, B_out, B_in) with A_out fastest.  Symmetric
// and involutive.
ComplexMatrix regroup_permutation(std::size_t n);

// sum_k vec'(M_k) vec'(M_k)^dagger, divided by n^2 when normalized is set.
ComplexMatrix bipartite_choi(const KrausSet& kraus, std::size_t n, bool normalized);

struct OperationBsa {
  Channel bsa_part;
  Channel ent_part;
  double lambda = 0.0;
  double choi_trace = 0.0;
  std::vector<ComplexMatrix> product_kraus;  // A (x) B, one per term
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> factors;
  BsaDecomposition state;  // decomposition of the regrouped, normalized Choi state
};

OperationBsa bsa_operation(const Channel& phi, std::size_t n, std::size_t budget,
                           std::uint64_t seed, const BsaOptions& options = {});

struct KrausSplit {
  std::vector<ComplexMatrix> product;
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> factors;
  std::vector<ComplexMatrix> rest;
};

KrausSplit kraus_factor_split(const KrausSet& kraus, BipartiteShape shape, Tolerance tol = {});

// Choi matrix of the product part is dominated by that of the whole map.
bool kraus_split_consistent(const KrausSet& kraus, const KrausSplit& split, Tolerance tol = {});

enum class SeparabilityVerdict { kSeparable, kEntangled, kInconclusive };

struct SeparabilityResult {
  SeparabilityVerdict verdict = SeparabilityVerdict::kInconclusive;
  std::vector<ComplexMatrix> witness_kraus;  // product Kraus set when separable
  double entangled_weight = 0.0;             // 1 - lambda
  double ent_relative_norm = 0.0;            // ||D_ent||_F / ||D||_F
  OperationBsa bsa;
};

SeparabilityResult is_separable_operation(const Channel& phi, std::size_t n, std::size_t budget,
                                          std::uint64_t seed, const BsaOptions& options = {});

}  // namespace choiscope

#endif  // CHOISCOPE_BSA_HPP_
