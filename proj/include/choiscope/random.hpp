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


// Seeded generators for test fixtures and candidate sets.  Everything draws
// from a caller-owned std::mt19937_64, so results are reproducible per seed.

#ifndef CHOISCOPE_RANDOM_HPP_
#define CHOISCOPE_RANDOM_HPP_

#include <cstddef>
#include <random>

#include "choiscope/channels.hpp"
#include "choiscope/numerics.hpp"

namespace choiscope {

using Rng = std::mt19937_64;

// Entries with independent standard normal real and imaginary parts.
ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng);

ComplexVector random_unit_vector(std::size_t n, Rng& rng);

// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
ComplexMatrix haar_unitary(std::size_t n, Rng& rng);

// Trace-one state G G^dagger / tr with G of shape n x rank.
ComplexMatrix random_state(std::size_t n, Rng& rng, std::size_t rank = 0);

// Random PSD matrix G G^dagger without normalization.
ComplexMatrix random_psd(std::size_t n, Rng& rng);

// Kraus operators cut from the first d_in columns of a Haar unitary on
// n_kraus * d_out dimensions, so sum K^dagger K = I exactly.
KrausSet random_isometry_kraus(std::size_t d_in, std::size_t d_out, std::size_t n_kraus,
                               Rng& rng);

// CP-TP channel on dimension n with n_kraus operators (default n).
Channel random_channel(std::size_t n, Rng& rng, std::size_t n_kraus = 0);

}  // namespace choiscope

#endif  // CHOISCOPE_RANDOM_HPP_
