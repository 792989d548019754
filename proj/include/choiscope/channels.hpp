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


// Quantum operations in three representations: Kraus operators, the
// Liouville (superoperator) matrix acting on column-stacked vectors, and the
// unnormalized Choi matrix.  For a map from d_in to d_out dimensions:
//
//   vectorize(Phi(rho)) = L * vectorize(rho),      L is d_out^2 x d_in^2
//   D = sum_{mu,nu} Phi(|mu><nu|) (x) |mu><nu|,     shape (d_A, d_B) = (d_out, d_in)
//
// with L = realign(D) and D = unrealign(L).

#ifndef CHOISCOPE_CHANNELS_HPP_
#define CHOISCOPE_CHANNELS_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "choiscope/numerics.hpp"
#include "choiscope/reshape.hpp"

namespace choiscope {

struct KrausSet {
  std::vector<ComplexMatrix> operators;
  std::size_t d_in = 0;
  std::size_t d_out = 0;

  // Throws ShapeMismatch on an empty list or inconsistent shapes.
  static KrausSet make(std::vector<ComplexMatrix> operators);
};

struct LiouvilleMatrix {
  ComplexMatrix matrix;
  std::size_t d_in = 0;
  std::size_t d_out = 0;

  static LiouvilleMatrix make(ComplexMatrix matrix, std::size_t d_in, std::size_t d_out);
};

struct ChoiMatrix {
  ComplexMatrix matrix;
  std::size_t d_in = 0;
  std::size_t d_out = 0;

  BipartiteShape shape() const { return {d_out, d_in}; }
  static ChoiMatrix make(ComplexMatrix matrix, std::size_t d_in, std::size_t d_out);
};

struct DensityMatrix {
  ComplexMatrix matrix;
  Complex trace;

  // Throws NotAState unless the matrix is square, finite, Hermitian and PSD.
  // The trace is not required to be one.
  static DensityMatrix make(ComplexMatrix matrix, Tolerance tol = {});
};

struct ValidationReport {
  bool hermiticity_preserving = false;
  bool trace_preserving = false;
  bool trace_nonincreasing = false;
  bool completely_positive = false;
  double choi_trace = 0.0;
  double min_choi_eigenvalue = 0.0;
};

LiouvilleMatrix kraus_to_liouville(const KrausSet& kraus);
ChoiMatrix liouville_to_choi(const LiouvilleMatrix& l);
LiouvilleMatrix choi_to_liouville(const ChoiMatrix& d);

// Eigenvalues in [-atol, atol] are dropped; anything below -atol throws
// NotCompletelyPositiveError carrying the offending eigenvalue.
KrausSet choi_to_kraus(const ChoiMatrix& d, Tolerance tol = {});

// Direct evaluation of sum Phi(|mu><nu|) (x) |mu><nu| from the Kraus sum.
ChoiMatrix choi_from_definition(const KrausSet& kraus);

// Immutable channel value.  The Liouville and Choi forms are always present;
// Kraus operators are present when the map was given by them or its Choi
// matrix is PSD.
class Channel {
 public:
  static Channel from_kraus(KrausSet kraus);
  static Channel from_liouville(LiouvilleMatrix l);
  static Channel from_choi(ChoiMatrix d);

  std::size_t d_in() const { return liouville_.d_in; }
  std::size_t d_out() const { return liouville_.d_out; }
  const LiouvilleMatrix& liouville() const { return liouville_; }
  const ChoiMatrix& choi() const { return choi_; }
  const std::optional<KrausSet>& kraus() const { return kraus_; }

 private:
  Channel(LiouvilleMatrix l, ChoiMatrix d, std::optional<KrausSet> k);

  LiouvilleMatrix liouville_;
  ChoiMatrix choi_;
  std::optional<KrausSet> kraus_;
};

enum class ApplyRoute { kDefault, kKraus, kLiouville, kChoi };

// kDefault uses the Kraus sum when available and the Liouville matrix
// otherwise.  The Choi route evaluates Tr_B[D (I (x) rho^T)].
ComplexMatrix apply(const Channel& phi, const ComplexMatrix& rho,
                    ApplyRoute route = ApplyRoute::kDefault);

ValidationReport validate(const Channel& phi, Tolerance tol = {});

Channel dual(const Channel& phi);

// phi after psi.
Channel compose(const Channel& phi, const Channel& psi);
ChoiMatrix compose_choi(const ChoiMatrix& phi, const ChoiMatrix& psi);

Channel mix(const std::vector<double>& coeffs, const std::vector<Channel>& channels);

// Channel on the N^2-dimensional composite, phi on the A factor.
Channel tensor_channels(const Channel& phi, const Channel& psi);
KrausSet tensor_kraus(const KrausSet& phi, const KrausSet& psi);

double realign_image_identity_deviation(const Channel& phi, const Channel& psi,
                                        const ComplexMatrix& rho);
bool realign_image_identity_check(const Channel& phi, const Channel& psi,
                                  const ComplexMatrix& rho, double tol = 1e-9);

enum class TransposeSide { kLeft, kRight, kBoth };

// kLeft: transpose after phi.  kRight: transpose before phi.  kBoth: both.
Channel transpose_conjugations(const Channel& phi, TransposeSide side);
ChoiMatrix transpose_conjugated_choi(const ChoiMatrix& d, TransposeSide side);

}  // namespace choiscope

#endif  // CHOISCOPE_CHANNELS_HPP_
