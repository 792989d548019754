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


#include "choiscope/reshape.hpp"

#include <cmath>
#include <string>

#include "choiscope/error.hpp"

namespace choiscope {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void require_bipartite(const ComplexMatrix& z, BipartiteShape shape, const char* op) {
  const Index n = idx(shape.dim());
  if (shape.d_a == 0 || shape.d_b == 0 || z.rows() != n || z.cols() != n) {
    throw Error(ErrorKind::kShapeMismatch,
                std::string(op) + ": expected " + std::to_string(n) + "x" +
                    std::to_string(n) + ", got " + std::to_string(z.rows()) + "x" +
                    std::to_string(z.cols()));
  }
}

void require_square_subsystems(const ComplexMatrix& z, BipartiteShape shape,
                               const char* op) {
  require_bipartite(z, shape, op);
  if (shape.d_a != shape.d_b) {
    throw Error(ErrorKind::kNonSquareSubsystems,
                std::string(op) + " needs d_A == d_B");
  }
}

}  // namespace

ComplexVector vectorize(const ComplexMatrix& g) {
  const Index p = g.rows();
  ComplexVector v(g.size());
  for (Index j = 0; j < g.cols(); ++j) {
    for (Index i = 0; i < p; ++i) v(j * p + i) = g(i, j);
  }
  return v;
}

ComplexMatrix devectorize(const ComplexVector& v, std::size_t p, std::size_t q) {
  if (static_cast<std::size_t>(v.size()) != p * q) {
    throw Error(ErrorKind::kDimensionMismatch,
                "devectorize: length " + std::to_string(v.size()) + " != " +
                    std::to_string(p) + "*" + std::to_string(q));
  }
  ComplexMatrix g(idx(p), idx(q));
  for (Index j = 0; j < idx(q); ++j) {
    for (Index i = 0; i < idx(p); ++i) g(i, j) = v(j * idx(p) + i);
  }
  return g;
}

ComplexMatrix tensor(const ComplexMatrix& x, const ComplexMatrix& y) {
  const Index ra = x.rows(), ca = x.cols();
  ComplexMatrix out(y.rows() * ra, y.cols() * ca);
  for (Index mu = 0; mu < y.rows(); ++mu) {
    for (Index nu = 0; nu < y.cols(); ++nu) {
      out.block(mu * ra, nu * ca, ra, ca) = y(mu, nu) * x;
    }
  }
  return out;
}

ComplexVector tensor(const ComplexVector& x, const ComplexVector& y) {
  const Index da = x.size();
  ComplexVector out(da * y.size());
  for (Index mu = 0; mu < y.size(); ++mu) out.segment(mu * da, da) = y(mu) * x;
  return out;
}

ComplexMatrix partial_trace_b(const ComplexMatrix& z, BipartiteShape shape) {
  require_bipartite(z, shape, "partial_trace_b");
  const Index da = idx(shape.d_a);
  ComplexMatrix out = ComplexMatrix::Zero(da, da);
  for (Index mu = 0; mu < idx(shape.d_b); ++mu) out += z.block(mu * da, mu * da, da, da);
  return out;
}

ComplexMatrix partial_trace_a(const ComplexMatrix& z, BipartiteShape shape) {
  require_bipartite(z, shape, "partial_trace_a");
  const Index da = idx(shape.d_a), db = idx(shape.d_b);
  ComplexMatrix out(db, db);
  for (Index mu = 0; mu < db; ++mu) {
    for (Index nu = 0; nu < db; ++nu) out(mu, nu) = z.block(mu * da, nu * da, da, da).trace();
  }
  return out;
}

ComplexMatrix swap_operator(std::size_t n) {
  const Index d = idx(n);
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  // |i>|j> lives at j*n + i and is sent to |j>|i> at i*n + j.
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  }
  return s;
}

ComplexMatrix flip(const ComplexMatrix& z, BipartiteShape shape) {
  require_square_subsystems(z, shape, "flip");
  const Index d = idx(shape.d_a);
  ComplexMatrix out(z.rows(), z.cols());
  for (Index m = 0; m < d; ++m)
    for (Index mu = 0; mu < d; ++mu)
      for (Index n = 0; n < d; ++n)
        for (Index nu = 0; nu < d; ++nu)
          out(mu * d + m, nu * d + n) = z(m * d + mu, n * d + nu);
  return out;
}

ComplexMatrix flip_row(const ComplexMatrix& z, BipartiteShape shape) {
  require_square_subsystems(z, shape, "flip_row");
  const Index d = idx(shape.d_a);
  ComplexMatrix out(z.rows(), z.cols());
  for (Index m = 0; m < d; ++m)
    for (Index mu = 0; mu < d; ++mu) out.row(mu * d + m) = z.row(m * d + mu);
  return out;
}

ComplexMatrix flip_col(const ComplexMatrix& z, BipartiteShape shape) {
  require_square_subsystems(z, shape, "flip_col");
  const Index d = idx(shape.d_a);
  ComplexMatrix out(z.rows(), z.cols());
  for (Index n = 0; n < d; ++n)
    for (Index nu = 0; nu < d; ++nu) out.col(nu * d + n) = z.col(n * d + nu);
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& z, BipartiteShape shape,
                                TransposeTarget which) {
  require_bipartite(z, shape, "partial_transpose");
  if (which == TransposeTarget::kBoth) return z.transpose();
  const Index da = idx(shape.d_a), db = idx(shape.d_b);
  ComplexMatrix out(z.rows(), z.cols());
  for (Index m = 0; m < da; ++m)
    for (Index mu = 0; mu < db; ++mu)
      for (Index n = 0; n < da; ++n)
        for (Index nu = 0; nu < db; ++nu) {
          out(mu * da + m, nu * da + n) = which == TransposeTarget::kA
                                              ? z(mu * da + n, nu * da + m)
                                              : z(nu * da + m, mu * da + n);
        }
  return out;
}

ComplexMatrix realign(const ComplexMatrix& z, BipartiteShape shape) {
  require_bipartite(z, shape, "realign");
  const Index da = idx(shape.d_a), db = idx(shape.d_b);
  ComplexMatrix out(da * da, db * db);
  for (Index m = 0; m < da; ++m)
    for (Index n = 0; n < da; ++n)
      for (Index mu = 0; mu < db; ++mu)
        for (Index nu = 0; nu < db; ++nu)
          out(n * da + m, nu * db + mu) = z(mu * da + m, nu * da + n);
  return out;
}

ComplexMatrix unrealign(const ComplexMatrix& w, BipartiteShape shape) {
  const Index da = idx(shape.d_a), db = idx(shape.d_b);
  if (w.rows() != da * da || w.cols() != db * db) {
    throw Error(ErrorKind::kShapeMismatch,
                "unrealign: expected " + std::to_string(da * da) + "x" +
                    std::to_string(db * db));
  }
  ComplexMatrix out(da * db, da * db);
  for (Index m = 0; m < da; ++m)
    for (Index n = 0; n < da; ++n)
      for (Index mu = 0; mu < db; ++mu)
        for (Index nu = 0; nu < db; ++nu)
          out(mu * da + m, nu * da + n) = w(n * da + m, nu * db + mu);
  return out;
}

ComplexMatrix realign_prime(const ComplexMatrix& z, BipartiteShape shape) {
  require_square_subsystems(z, shape, "realign_prime");
  const Index d = idx(shape.d_a);
  ComplexMatrix out(d * d, d * d);
  for (Index m = 0; m < d; ++m)
    for (Index n = 0; n < d; ++n)
      for (Index mu = 0; mu < d; ++mu)
        for (Index nu = 0; nu < d; ++nu)
          out(n * d + m, nu * d + mu) = z(n * d + nu, m * d + mu);
  return out;
}

ComplexMatrix realign_sandwich(const ComplexMatrix& z) {
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(z.rows()))));
  if (z.rows() != z.cols() || idx(n * n) != z.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "realign_sandwich needs an N^2 x N^2 matrix");
  }
  const ComplexMatrix eye = identity(n);
  ComplexMatrix out = ComplexMatrix::Zero(z.rows(), z.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      ComplexMatrix e_ij = ComplexMatrix::Zero(idx(n), idx(n));
      e_ij(idx(i), idx(j)) = 1.0;
      out += tensor(eye, e_ij) * z * tensor(e_ij, eye);
    }
  }
  return out;
}

std::optional<std::pair<ComplexMatrix, ComplexMatrix>> product_factorize(
    const ComplexMatrix& z, BipartiteShape shape, Tolerance tol) {
  require_bipartite(z, shape, "product_factorize");
  if (max_abs(z) == 0.0) throw Error(ErrorKind::kZeroMatrix, "product_factorize of zero");
  const ComplexMatrix w = realign(z, shape);
  if (svd_rank(w, tol) != 1) return std::nullopt;
  const Eigen::MatrixXcd dense = w;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double root = std::sqrt(svd.singularValues()(0));
  const ComplexVector u = svd.matrixU().col(0) * root;
  const ComplexVector v = svd.matrixV().col(0).conjugate() * root;
  return std::make_pair(devectorize(u, shape.d_a, shape.d_a),
                        devectorize(v, shape.d_b, shape.d_b));
}

double tensor_vec_identity_deviation(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows()) {
    throw Error(ErrorKind::kShapeMismatch,
                "tensor_vec_identity_check needs square factors of equal size");
  }
  const auto n = static_cast<std::size_t>(x.rows());
  const ComplexMatrix eye = identity(n);
  const ComplexMatrix middle = tensor(tensor(eye, swap_operator(n)), eye);
  const ComplexVector lhs = vectorize(tensor(x, y));
  const ComplexVector rhs = middle * tensor(vectorize(x), vectorize(y));
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

bool tensor_vec_identity_check(const ComplexMatrix& x, const ComplexMatrix& y) {
  return tensor_vec_identity_deviation(x, y) <= 1e-10;
}

}  // namespace choiscope
