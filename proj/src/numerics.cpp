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


#include "choiscope/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "choiscope/error.hpp"

namespace choiscope {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNotHermitian: return "NotHermitian";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kNotPsd: return "NotPsd";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNonSquareSubsystems: return "NonSquareSubsystems";
    case ErrorKind::kZeroMatrix: return "ZeroMatrix";
    case ErrorKind::kNotCompletelyPositive: return "NotCompletelyPositive";
    case ErrorKind::kNotAState: return "NotAState";
    case ErrorKind::kCandidateOutsideRange: return "CandidateOutsideRange";
    case ErrorKind::kNonConvergence: return "NonConvergence";
    case ErrorKind::kNotOrthonormal: return "NotOrthonormal";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kParseError: return "ParseError";
  }
  return "Unknown";
}

ComplexMatrix identity(std::size_t n) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(n),
                                 static_cast<Eigen::Index>(n));
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "max_abs_diff of differently shaped matrices");
  }
  return max_abs(a - b);
}

double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

bool is_hermitian(const ComplexMatrix& m, Tolerance tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol.atol;
}

ComplexMatrix outer(const ComplexVector& v, const ComplexVector& w) {
  return v * w.adjoint();
}

HermitianEigen eig_hermitian(const ComplexMatrix& m, Tolerance tol) {
  if (!all_finite(m)) throw Error(ErrorKind::kNonFinite, "matrix has non-finite entries");
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kNotHermitian, "matrix is not square");
  }
  const double skew = max_abs(m - m.adjoint());
  if (skew > tol.atol) {
    throw Error(ErrorKind::kNotHermitian,
                "||M - M^dagger||_max = " + std::to_string(skew));
  }
  const Eigen::MatrixXcd sym = (m + m.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kNonConvergence, "Hermitian eigensolver failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

bool is_psd(const ComplexMatrix& m, Tolerance tol) {
  const HermitianEigen eig = eig_hermitian(m, tol);
  return eig.eigenvalues.size() == 0 || eig.eigenvalues(0) >= -tol.atol;
}

std::size_t svd_rank(const ComplexMatrix& m, Tolerance tol) {
  if (!all_finite(m)) throw Error(ErrorKind::kNonFinite, "matrix has non-finite entries");
  if (m.size() == 0) return 0;
  const Eigen::MatrixXcd dense = m;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense);
  const RealVector& sigma = svd.singularValues();
  const double cutoff = tol.atol + tol.rtol * sigma(0);
  return static_cast<std::size_t>((sigma.array() > cutoff).count());
}

ComplexMatrix pseudo_inverse(const ComplexMatrix& m, Tolerance tol) {
  const HermitianEigen eig = eig_hermitian(m, tol);
  if (eig.eigenvalues.size() > 0 && eig.eigenvalues(0) < -tol.atol) {
    throw Error(ErrorKind::kNotPsd,
                "minimum eigenvalue " + std::to_string(eig.eigenvalues(0)));
  }
  const Eigen::Index n = m.rows();
  RealVector inv = RealVector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (eig.eigenvalues(k) > tol.atol) inv(k) = 1.0 / eig.eigenvalues(k);
  }
  return eig.eigenvectors * inv.cast<Complex>().asDiagonal() *
         eig.eigenvectors.adjoint();
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "hs_inner of differently shaped matrices");
  }
  return (a.conjugate().cwiseProduct(b)).sum();
}

}  // namespace choiscope
