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


#include "choiscope/random.hpp"

#include <cmath>

#include "choiscope/error.hpp"

namespace choiscope {

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

ComplexVector random_unit_vector(std::size_t n, Rng& rng) {
  ComplexVector v = ginibre(n, 1, rng).col(0);
  return v / v.norm();
}

ComplexMatrix haar_unitary(std::size_t n, Rng& rng) {
  const Eigen::MatrixXcd g = ginibre(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex diag = r(k, k);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(k) *= diag / mag;
  }
  return q;
}

ComplexMatrix random_state(std::size_t n, Rng& rng, std::size_t rank) {
  if (rank == 0) rank = n;
  const ComplexMatrix g = ginibre(n, rank, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) * 0.5;
}

ComplexMatrix random_psd(std::size_t n, Rng& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  const ComplexMatrix p = g * g.adjoint();
  return (p + p.adjoint()) * 0.5;
}

KrausSet random_isometry_kraus(std::size_t d_in, std::size_t d_out, std::size_t n_kraus,
                               Rng& rng) {
  if (d_in == 0 || d_out == 0 || n_kraus == 0 || n_kraus * d_out < d_in) {
    throw Error(ErrorKind::kInvalidArgument,
                "random_isometry_kraus needs n_kraus * d_out >= d_in > 0");
  }
  const ComplexMatrix u = haar_unitary(n_kraus * d_out, rng);
  std::vector<ComplexMatrix> ops;
  const auto rows = static_cast<Eigen::Index>(d_out);
  for (std::size_t k = 0; k < n_kraus; ++k) {
    ops.emplace_back(u.block(static_cast<Eigen::Index>(k) * rows, 0, rows,
                             static_cast<Eigen::Index>(d_in)));
  }
  return KrausSet::make(std::move(ops));
}

Channel random_channel(std::size_t n, Rng& rng, std::size_t n_kraus) {
  return Channel::from_kraus(random_isometry_kraus(n, n, n_kraus == 0 ? n : n_kraus, rng));
}

}  // namespace choiscope
