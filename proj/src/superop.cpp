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


#include "choiscope/superop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "choiscope/error.hpp"
#include "choiscope/reshape.hpp"

namespace choiscope {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

constexpr std::size_t kMaxMaterializedKernel = 3;

void require_basis(const OperatorBasis& b, const char* op) {
  if (b.elements.size() != b.n * b.n || orthonormality_deviation(b.elements) > 1e-10) {
    throw Error(ErrorKind::kNotOrthonormal, std::string(op) + ": basis is not orthonormal");
  }
}

void require_pair(const OperatorBasis& e, const OperatorBasis& f, const char* op) {
  require_basis(e, op);
  require_basis(f, op);
  if (e.n != f.n) throw Error(ErrorKind::kShapeMismatch, std::string(op) + ": basis sizes differ");
}

void require_square_map(const Channel& phi, std::size_t n, const char* op) {
  if (phi.d_in() != n || phi.d_out() != n) {
    throw Error(ErrorKind::kShapeMismatch, std::string(op) + ": map is not on dimension " +
                                               std::to_string(n));
  }
}

}  // namespace

double orthonormality_deviation(const std::vector<ComplexMatrix>& elements) {
  double worst = 0.0;
  for (std::size_t a = 0; a < elements.size(); ++a) {
    for (std::size_t b = a; b < elements.size(); ++b) {
      if (elements[a].rows() != elements[b].rows() || elements[a].cols() != elements[b].cols()) {
        return std::numeric_limits<double>::infinity();
      }
      const Complex expected = a == b ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(hs_inner(elements[a], elements[b]) - expected));
    }
  }
  return worst;
}

OperatorBasis OperatorBasis::make(std::vector<ComplexMatrix> elements, double tol) {
  if (elements.empty()) throw Error(ErrorKind::kNotOrthonormal, "empty basis");
  const auto n = static_cast<std::size_t>(elements.front().rows());
  for (const auto& el : elements) {
    if (el.rows() != idx(n) || el.cols() != idx(n)) {
      throw Error(ErrorKind::kNotOrthonormal, "basis elements must all be n x n");
    }
  }
  if (elements.size() != n * n) {
    throw Error(ErrorKind::kNotOrthonormal, "basis of M_" + std::to_string(n) + " needs " +
                                                std::to_string(n * n) + " elements");
  }
  const double dev = orthonormality_deviation(elements);
  if (dev > tol) {
    throw Error(ErrorKind::kNotOrthonormal, "Gram deviation " + std::to_string(dev));
  }
  return {std::move(elements), n};
}

OperatorBasis elementary_basis(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "elementary_basis needs N >= 1");
  std::vector<ComplexMatrix> els;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      ComplexMatrix e = ComplexMatrix::Zero(idx(n), idx(n));
      e(idx(i), idx(j)) = 1.0;
      els.push_back(std::move(e));
    }
  }
  return {std::move(els), n};
}

OperatorBasis random_basis(std::size_t n, Rng& rng) {
  const ComplexMatrix u = haar_unitary(n * n, rng);
  std::vector<ComplexMatrix> els;
  for (Index a = 0; a < u.cols(); ++a) els.push_back(devectorize(u.col(a), n, n));
  return OperatorBasis::make(std::move(els));
}

Complex superop_inner(const Channel& phi, const Channel& psi, const OperatorBasis& basis) {
  require_basis(basis, "superop_inner");
  require_square_map(phi, basis.n, "superop_inner");
  require_square_map(psi, basis.n, "superop_inner");
  Complex total = 0.0;
  for (const auto& e : basis.elements) {
    total += hs_inner(apply(phi, e, ApplyRoute::kLiouville), apply(psi, e, ApplyRoute::kLiouville));
  }
  return total;
}

ComplexMatrix delta_liouville(const ComplexMatrix& e, const ComplexMatrix& f) {
  if (e.rows() != e.cols() || f.rows() != f.cols() || e.rows() != f.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "delta_liouville needs square operators of one size");
  }
  return outer(vectorize(e), vectorize(f));
}

ComplexMatrix theta_liouville(const ComplexMatrix& e, const ComplexMatrix& f) {
  if (e.rows() != e.cols() || f.rows() != f.cols() || e.rows() != f.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "theta_liouville needs square operators of one size");
  }
  return tensor(e, ComplexMatrix(f.conjugate()));
}

SuperopCoeffs coefficients(const Channel& phi, const OperatorBasis& e, const OperatorBasis& f) {
  require_pair(e, f, "coefficients");
  require_square_map(phi, e.n, "coefficients");
  const Index n2 = idx(e.n * e.n);
  const ComplexMatrix& l = phi.liouville().matrix;
  ComplexMatrix p(n2, n2), q(n2, n2);
  std::vector<ComplexVector> ve, vf;
  for (Index a = 0; a < n2; ++a) {
    ve.push_back(vectorize(e.elements[a]));
    vf.push_back(vectorize(f.elements[a]));
  }
  for (Index a = 0; a < n2; ++a) {
    for (Index b = 0; b < n2; ++b) {
      p(a, b) = ve[a].dot(l * vf[b]);
      q(a, b) = hs_inner(theta_liouville(e.elements[a], f.elements[b]), l);
    }
  }
  return {std::move(p), std::move(q), e, f};
}

ComplexMatrix reconstruct_from_p(const ComplexMatrix& p, const OperatorBasis& e,
                                 const OperatorBasis& f) {
  require_pair(e, f, "reconstruct_from_p");
  const Index n2 = idx(e.n * e.n);
  ComplexMatrix l = ComplexMatrix::Zero(n2, n2);
  for (Index a = 0; a < n2; ++a)
    for (Index b = 0; b < n2; ++b) l += p(a, b) * delta_liouville(e.elements[a], f.elements[b]);
  return l;
}

ComplexMatrix reconstruct_from_q(const ComplexMatrix& q, const OperatorBasis& e,
                                 const OperatorBasis& f) {
  require_pair(e, f, "reconstruct_from_q");
  const Index n2 = idx(e.n * e.n);
  ComplexMatrix l = ComplexMatrix::Zero(n2, n2);
  for (Index a = 0; a < n2; ++a)
    for (Index b = 0; b < n2; ++b) l += q(a, b) * theta_liouville(e.elements[a], f.elements[b]);
  return l;
}

ComplexMatrix coefficient_kernel(const OperatorBasis& e, const OperatorBasis& f) {
  require_pair(e, f, "coefficient_kernel");
  const Index n2 = idx(e.n * e.n);
  ComplexMatrix k(n2 * n2, n2 * n2);
  for (Index a = 0; a < n2; ++a) {
    const ComplexMatrix ea_dag = e.elements[a].adjoint();
    for (Index m = 0; m < n2; ++m) {
      const ComplexMatrix left = ea_dag * e.elements[m];
      for (Index b = 0; b < n2; ++b) {
        const ComplexMatrix lf = left * f.elements[b];
        for (Index nn = 0; nn < n2; ++nn) {
          k(a * n2 + b, m * n2 + nn) = (lf * f.elements[nn].adjoint()).trace();
        }
      }
    }
  }
  return k;
}

ComplexMatrix convert_coeffs(const ComplexMatrix& c, const OperatorBasis& e,
                             const OperatorBasis& f, CoeffDirection direction) {
  require_pair(e, f, "convert_coeffs");
  const Index n2 = idx(e.n * e.n);
  if (c.rows() != n2 || c.cols() != n2) {
    throw Error(ErrorKind::kShapeMismatch, "coefficient matrix must be N^2 x N^2");
  }
  if (e.n <= kMaxMaterializedKernel) {
    const ComplexMatrix k = coefficient_kernel(e, f);
    ComplexVector flat(n2 * n2);
    for (Index a = 0; a < n2; ++a)
      for (Index b = 0; b < n2; ++b) flat(a * n2 + b) = c(a, b);
    const ComplexVector out = k * flat;
    ComplexMatrix res(n2, n2);
    for (Index a = 0; a < n2; ++a)
      for (Index b = 0; b < n2; ++b) res(a, b) = out(a * n2 + b);
    return res;
  }
  // The kernel factors through the Liouville matrix: rebuild L from one
  // coefficient family and read off the other.
  const ComplexMatrix l = direction == CoeffDirection::kQToP ? reconstruct_from_q(c, e, f)
                                                              : reconstruct_from_p(c, e, f);
  const Channel phi = Channel::from_liouville({l, e.n, e.n});
  const SuperopCoeffs co = coefficients(phi, e, f);
  return direction == CoeffDirection::kQToP ? co.p : co.q;
}

ComplexMatrix lambda_iso(const Channel& phi, const OperatorBasis& e, const OperatorBasis& f) {
  require_pair(e, f, "lambda_iso");
  require_square_map(phi, e.n, "lambda_iso");
  const Index n2 = idx(e.n * e.n);
  ComplexMatrix out = ComplexMatrix::Zero(n2, n2);
  for (std::size_t a = 0; a < e.elements.size(); ++a) {
    out += tensor(apply(phi, e.elements[a], ApplyRoute::kLiouville), f.elements[a]);
  }
  return out;
}

ResolutionDeviation basis_resolution_deviation(const OperatorBasis& basis) {
  require_basis(basis, "basis_resolution_checks");
  const Index n2 = idx(basis.n * basis.n);
  ComplexMatrix conj_sum = ComplexMatrix::Zero(n2, n2);
  ComplexMatrix dag_sum = ComplexMatrix::Zero(n2, n2);
  for (const auto& e : basis.elements) {
    conj_sum += tensor(e, ComplexMatrix(e.conjugate()));
    dag_sum += tensor(e, ComplexMatrix(e.adjoint()));
  }
  const ComplexVector vec_i = vectorize(identity(basis.n));
  return {max_abs(conj_sum - outer(vec_i, vec_i)), max_abs(dag_sum - swap_operator(basis.n))};
}

bool basis_resolution_checks(const OperatorBasis& basis, double tol) {
  const ResolutionDeviation dev = basis_resolution_deviation(basis);
  return dev.vec_identity <= tol && dev.swap <= tol;
}

}  // namespace choiscope
