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


#include "choiscope/channels.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "choiscope/error.hpp"

namespace choiscope {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

std::string dims(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) * 0.5; }

double min_eigenvalue(const ComplexMatrix& hermitian) {
  const HermitianEigen eig = eig_hermitian(hermitian_part(hermitian), {0.0, 0.0});
  return eig.eigenvalues.size() == 0 ? 0.0 : eig.eigenvalues(0);
}

std::optional<KrausSet> try_kraus(const ChoiMatrix& d) {
  try {
    return choi_to_kraus(d);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void require_square_channel(const Channel& phi, const char* op) {
  if (phi.d_in() != phi.d_out()) {
    throw Error(ErrorKind::kShapeMismatch, std::string(op) + " needs d_in == d_out");
  }
}

}  // namespace

KrausSet KrausSet::make(std::vector<ComplexMatrix> operators) {
  if (operators.empty()) throw Error(ErrorKind::kShapeMismatch, "empty Kraus set");
  const Index rows = operators.front().rows(), cols = operators.front().cols();
  if (rows == 0 || cols == 0) throw Error(ErrorKind::kShapeMismatch, "empty Kraus operator");
  for (const auto& op : operators) {
    if (op.rows() != rows || op.cols() != cols) {
      throw Error(ErrorKind::kShapeMismatch, "Kraus operators of shapes " + dims(rows, cols) +
                                                 " and " + dims(op.rows(), op.cols()));
    }
  }
  KrausSet k;
  k.d_out = static_cast<std::size_t>(rows);
  k.d_in = static_cast<std::size_t>(cols);
  k.operators = std::move(operators);
  return k;
}

LiouvilleMatrix LiouvilleMatrix::make(ComplexMatrix matrix, std::size_t d_in,
                                      std::size_t d_out) {
  if (d_in == 0 || d_out == 0 || matrix.rows() != idx(d_out * d_out) ||
      matrix.cols() != idx(d_in * d_in)) {
    throw Error(ErrorKind::kShapeMismatch, "Liouville matrix " + dims(matrix.rows(), matrix.cols()) +
                                               " for d_in=" + std::to_string(d_in) +
                                               ", d_out=" + std::to_string(d_out));
  }
  return {std::move(matrix), d_in, d_out};
}

ChoiMatrix ChoiMatrix::make(ComplexMatrix matrix, std::size_t d_in, std::size_t d_out) {
  const Index n = idx(d_in * d_out);
  if (n == 0 || matrix.rows() != n || matrix.cols() != n) {
    throw Error(ErrorKind::kShapeMismatch, "Choi matrix " + dims(matrix.rows(), matrix.cols()) +
                                               " for d_in=" + std::to_string(d_in) +
                                               ", d_out=" + std::to_string(d_out));
  }
  return {std::move(matrix), d_in, d_out};
}

DensityMatrix DensityMatrix::make(ComplexMatrix matrix, Tolerance tol) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::kNotAState, "state must be a nonempty square matrix");
  }
  if (!all_finite(matrix)) throw Error(ErrorKind::kNotAState, "non-finite entries");
  if (!is_hermitian(matrix, tol)) throw Error(ErrorKind::kNotAState, "not Hermitian");
  const double lo = min_eigenvalue(matrix);
  if (lo < -tol.atol) {
    throw Error(ErrorKind::kNotAState, "minimum eigenvalue " + std::to_string(lo));
  }
  const Complex tr = matrix.trace();
  return {std::move(matrix), tr};
}

LiouvilleMatrix kraus_to_liouville(const KrausSet& kraus) {
  const Index n_out = idx(kraus.d_out * kraus.d_out), n_in = idx(kraus.d_in * kraus.d_in);
  ComplexMatrix l = ComplexMatrix::Zero(n_out, n_in);
  for (const auto& g : kraus.operators) {
    if (g.rows() != idx(kraus.d_out) || g.cols() != idx(kraus.d_in)) {
      throw Error(ErrorKind::kShapeMismatch, "Kraus operator shape disagrees with the set");
    }
    l += tensor(g, ComplexMatrix(g.conjugate()));
  }
  return {std::move(l), kraus.d_in, kraus.d_out};
}

ChoiMatrix liouville_to_choi(const LiouvilleMatrix& l) {
  LiouvilleMatrix::make(l.matrix, l.d_in, l.d_out);
  return {unrealign(l.matrix, {l.d_out, l.d_in}), l.d_in, l.d_out};
}

LiouvilleMatrix choi_to_liouville(const ChoiMatrix& d) {
  ChoiMatrix::make(d.matrix, d.d_in, d.d_out);
  return {realign(d.matrix, d.shape()), d.d_in, d.d_out};
}

KrausSet choi_to_kraus(const ChoiMatrix& d, Tolerance tol) {
  ChoiMatrix::make(d.matrix, d.d_in, d.d_out);
  if (!is_hermitian(d.matrix, tol)) {
    throw NotCompletelyPositiveError(min_eigenvalue(d.matrix), "Choi matrix is not Hermitian");
  }
  const HermitianEigen eig = eig_hermitian(d.matrix, tol);
  const double lo = eig.eigenvalues(0);
  if (lo < -tol.atol) {
    throw NotCompletelyPositiveError(
        lo, "Choi matrix has eigenvalue " + std::to_string(lo) + " < -atol");
  }
  std::vector<ComplexMatrix> ops;
  for (Index k = eig.eigenvalues.size() - 1; k >= 0; --k) {
    const double lambda = eig.eigenvalues(k);
    if (lambda <= tol.atol) break;
    const ComplexVector v = eig.eigenvectors.col(k) * std::sqrt(lambda);
    ops.push_back(devectorize(v, d.d_out, d.d_in));
  }
  if (ops.empty()) ops.push_back(ComplexMatrix::Zero(idx(d.d_out), idx(d.d_in)));
  return KrausSet::make(std::move(ops));
}

ChoiMatrix choi_from_definition(const KrausSet& kraus) {
  const std::size_t din = kraus.d_in, dout = kraus.d_out;
  ComplexMatrix d = ComplexMatrix::Zero(idx(din * dout), idx(din * dout));
  for (std::size_t mu = 0; mu < din; ++mu) {
    for (std::size_t nu = 0; nu < din; ++nu) {
      ComplexMatrix e = ComplexMatrix::Zero(idx(din), idx(din));
      e(idx(mu), idx(nu)) = 1.0;
      ComplexMatrix image = ComplexMatrix::Zero(idx(dout), idx(dout));
      for (const auto& g : kraus.operators) image += g * e * g.adjoint();
      d += tensor(image, e);
    }
  }
  return {std::move(d), din, dout};
}

Channel::Channel(LiouvilleMatrix l, ChoiMatrix d, std::optional<KrausSet> k)
    : liouville_(std::move(l)), choi_(std::move(d)), kraus_(std::move(k)) {}

Channel Channel::from_kraus(KrausSet kraus) {
  kraus = KrausSet::make(std::move(kraus.operators));
  LiouvilleMatrix l = kraus_to_liouville(kraus);
  ChoiMatrix d = liouville_to_choi(l);
  return Channel(std::move(l), std::move(d), std::move(kraus));
}

Channel Channel::from_liouville(LiouvilleMatrix l) {
  l = LiouvilleMatrix::make(std::move(l.matrix), l.d_in, l.d_out);
  ChoiMatrix d = liouville_to_choi(l);
  auto k = try_kraus(d);
  return Channel(std::move(l), std::move(d), std::move(k));
}

Channel Channel::from_choi(ChoiMatrix d) {
  d = ChoiMatrix::make(std::move(d.matrix), d.d_in, d.d_out);
  LiouvilleMatrix l = choi_to_liouville(d);
  auto k = try_kraus(d);
  return Channel(std::move(l), std::move(d), std::move(k));
}

ComplexMatrix apply(const Channel& phi, const ComplexMatrix& rho, ApplyRoute route) {
  const Index din = idx(phi.d_in()), dout = idx(phi.d_out());
  if (rho.rows() != din || rho.cols() != din) {
    throw Error(ErrorKind::kShapeMismatch,
                "input " + dims(rho.rows(), rho.cols()) + " for a map on dimension " +
                    std::to_string(din));
  }
  if (route == ApplyRoute::kDefault) {
    route = phi.kraus() ? ApplyRoute::kKraus : ApplyRoute::kLiouville;
  }
  switch (route) {
    case ApplyRoute::kKraus: {
      if (!phi.kraus()) {
        throw Error(ErrorKind::kNotCompletelyPositive, "map has no Kraus representation");
      }
      ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
      for (const auto& g : phi.kraus()->operators) out += g * rho * g.adjoint();
      return out;
    }
    case ApplyRoute::kLiouville:
      return devectorize(phi.liouville().matrix * vectorize(rho), phi.d_out(), phi.d_out());
    case ApplyRoute::kChoi: {
      const ComplexMatrix lifted =
          phi.choi().matrix * tensor(identity(phi.d_out()), ComplexMatrix(rho.transpose()));
      return partial_trace_b(lifted, phi.choi().shape());
    }
    case ApplyRoute::kDefault:
      break;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown apply route");
}

ValidationReport validate(const Channel& phi, Tolerance tol) {
  ValidationReport r;
  const ComplexMatrix& d = phi.choi().matrix;
  r.choi_trace = d.trace().real();
  r.hermiticity_preserving = all_finite(d) && is_hermitian(d, tol);
  if (!all_finite(d)) {
    r.min_choi_eigenvalue = std::nan("");
    return r;
  }
  r.min_choi_eigenvalue = min_eigenvalue(d);
  r.completely_positive = r.hermiticity_preserving && r.min_choi_eigenvalue >= -tol.atol;

  const ComplexMatrix marginal = partial_trace_a(d, phi.choi().shape());
  const ComplexMatrix eye = identity(phi.d_in());
  r.trace_preserving = max_abs(marginal - eye) <= tol.atol;
  r.trace_nonincreasing = is_hermitian(marginal, tol) && min_eigenvalue(eye - marginal) >= -tol.atol;
  return r;
}

Channel dual(const Channel& phi) {
  if (phi.kraus()) {
    std::vector<ComplexMatrix> ops;
    for (const auto& g : phi.kraus()->operators) ops.emplace_back(g.adjoint());
    return Channel::from_kraus(KrausSet::make(std::move(ops)));
  }
  return Channel::from_liouville(
      {ComplexMatrix(phi.liouville().matrix.adjoint()), phi.d_out(), phi.d_in()});
}

Channel compose(const Channel& phi, const Channel& psi) {
  if (psi.d_out() != phi.d_in()) {
    throw Error(ErrorKind::kShapeMismatch, "compose: inner dimensions " +
                                               std::to_string(psi.d_out()) + " and " +
                                               std::to_string(phi.d_in()));
  }
  return Channel::from_liouville(
      {phi.liouville().matrix * psi.liouville().matrix, psi.d_in(), phi.d_out()});
}

ChoiMatrix compose_choi(const ChoiMatrix& phi, const ChoiMatrix& psi) {
  if (psi.d_out != phi.d_in) throw Error(ErrorKind::kShapeMismatch, "compose_choi: inner dimensions");
  const ComplexMatrix l = realign(phi.matrix, phi.shape()) * realign(psi.matrix, psi.shape());
  return {unrealign(l, {phi.d_out, psi.d_in}), psi.d_in, phi.d_out};
}

Channel mix(const std::vector<double>& coeffs, const std::vector<Channel>& channels) {
  if (coeffs.size() != channels.size() || channels.empty()) {
    throw Error(ErrorKind::kShapeMismatch, "mix needs one coefficient per channel");
  }
  const std::size_t din = channels.front().d_in(), dout = channels.front().d_out();
  ComplexMatrix l = ComplexMatrix::Zero(idx(dout * dout), idx(din * din));
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].d_in() != din || channels[i].d_out() != dout) {
      throw Error(ErrorKind::kShapeMismatch, "mix of channels with different shapes");
    }
    l += coeffs[i] * channels[i].liouville().matrix;
  }
  return Channel::from_liouville({std::move(l), din, dout});
}

Channel tensor_channels(const Channel& phi, const Channel& psi) {
  if (phi.d_in() != phi.d_out() || psi.d_in() != psi.d_out() || phi.d_in() != psi.d_in()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "tensor_channels needs two maps on the same dimension N");
  }
  const std::size_t n = phi.d_in();
  const ComplexMatrix eye = identity(n);
  const ComplexMatrix middle = tensor(tensor(eye, swap_operator(n)), eye);
  ComplexMatrix l = middle * tensor(phi.liouville().matrix, psi.liouville().matrix) * middle;
  return Channel::from_liouville({std::move(l), n * n, n * n});
}

KrausSet tensor_kraus(const KrausSet& phi, const KrausSet& psi) {
  std::vector<ComplexMatrix> ops;
  for (const auto& a : phi.operators) {
    for (const auto& b : psi.operators) ops.push_back(tensor(a, b));
  }
  return KrausSet::make(std::move(ops));
}

double realign_image_identity_deviation(const Channel& phi, const Channel& psi,
                                        const ComplexMatrix& rho) {
  const Channel both = tensor_channels(phi, psi);
  const std::size_t n = phi.d_in();
  const ComplexMatrix sigma = apply(both, rho);
  const ComplexMatrix lhs = realign(sigma, {n, n});
  const ComplexMatrix rhs =
      phi.liouville().matrix * realign(rho, {n, n}) * psi.liouville().matrix.transpose();
  return max_abs(lhs - rhs);
}

bool realign_image_identity_check(const Channel& phi, const Channel& psi,
                                  const ComplexMatrix& rho, double tol) {
  return realign_image_identity_deviation(phi, psi, rho) <= tol;
}

Channel transpose_conjugations(const Channel& phi, TransposeSide side) {
  require_square_channel(phi, "transpose_conjugations");
  const ComplexMatrix s = swap_operator(phi.d_in());
  const ComplexMatrix& l = phi.liouville().matrix;
  ComplexMatrix out;
  switch (side) {
    case TransposeSide::kLeft: out = s * l; break;
    case TransposeSide::kRight: out = l * s; break;
    case TransposeSide::kBoth: out = s * l * s; break;
  }
  return Channel::from_liouville({std::move(out), phi.d_in(), phi.d_out()});
}

ChoiMatrix transpose_conjugated_choi(const ChoiMatrix& d, TransposeSide side) {
  if (d.d_in != d.d_out) {
    throw Error(ErrorKind::kShapeMismatch, "transpose_conjugated_choi needs d_in == d_out");
  }
  TransposeTarget target = TransposeTarget::kBoth;
  if (side == TransposeSide::kLeft) target = TransposeTarget::kA;
  if (side == TransposeSide::kRight) target = TransposeTarget::kB;
  return {partial_transpose(d.matrix, d.shape(), target), d.d_in, d.d_out};
}

}  // namespace choiscope
