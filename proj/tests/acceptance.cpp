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


// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.  Every check compares library output against reference
// formulas written here or in test_util.hpp.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "choiscope/bsa.hpp"
#include "choiscope/channels.hpp"
#include "choiscope/cli.hpp"
#include "choiscope/error.hpp"
#include "choiscope/io.hpp"
#include "choiscope/reshape.hpp"
#include "choiscope/superop.hpp"
#include "test_util.hpp"

namespace {

using namespace choiscope;
using Index = Eigen::Index;
using testutil::elem;
using testutil::ix;
using testutil::kraus_apply;
using testutil::max_abs;
using testutil::min_eig;
using testutil::rand_matrix;
using testutil::rand_state;
using testutil::rand_unit;
using testutil::ref_kron;
using testutil::ref_realign;
using testutil::ref_swap;
using testutil::ref_vec;

// Collects failures and the largest error seen for one criterion.
class Check {
 public:
  // Records err against bound; returns false on failure.
  bool le(const std::string& what, double err, double bound) {
    worst_ = std::max(worst_, err);
    if (!(err <= bound)) {
      fail(what + ": " + fmt(err) + " > " + fmt(bound));
      return false;
    }
    return true;
  }
  bool ge(const std::string& what, double value, double bound) {
    if (!(value >= bound)) {
      fail(what + ": " + fmt(value) + " < " + fmt(bound));
      return false;
    }
    return true;
  }
  bool truth(const std::string& what, bool ok) {
    if (!ok) fail(what);
    return ok;
  }
  void fail(const std::string& msg) {
    if (failures_.size() < 5) failures_.push_back(msg);
    ++failure_count_;
  }
  bool passed() const { return failure_count_ == 0; }
  double worst() const { return worst_; }
  const std::vector<std::string>& failures() const { return failures_; }
  std::size_t failure_count() const { return failure_count_; }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

 private:
  double worst_ = 0.0;
  std::vector<std::string> failures_;
  std::size_t failure_count_ = 0;
};

ComplexMatrix tr(const ComplexMatrix& m) { return m.transpose(); }

ComplexMatrix proj(const ComplexVector& v) { return v * v.adjoint() / v.squaredNorm(); }

// Reference partial traces for shape (a, b), composite index mu * a + m.
ComplexMatrix ref_trace_b(const ComplexMatrix& z, Index a, Index b) {
  ComplexMatrix out = ComplexMatrix::Zero(a, a);
  for (Index m = 0; m < a; ++m)
    for (Index n = 0; n < a; ++n)
      for (Index mu = 0; mu < b; ++mu) out(m, n) += z(mu * a + m, mu * a + n);
  return out;
}

ComplexMatrix ref_trace_a(const ComplexMatrix& z, Index a, Index b) {
  ComplexMatrix out = ComplexMatrix::Zero(b, b);
  for (Index mu = 0; mu < b; ++mu)
    for (Index nu = 0; nu < b; ++nu)
      for (Index m = 0; m < a; ++m) out(mu, nu) += z(mu * a + m, nu * a + m);
  return out;
}

// Permutation taking vec(X) (x) vec(Y) to vec(X (x) Y) for X a x a, Y b x b.
ComplexMatrix vec_tensor_permutation(Index a, Index b) {
  const Index n = a * a * b * b;
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (Index m = 0; m < a; ++m)
    for (Index nn = 0; nn < a; ++nn)
      for (Index mu = 0; mu < b; ++mu)
        for (Index nu = 0; nu < b; ++nu) {
          const Index row = (nu * a + nn) * (a * b) + (mu * a + m);  // entry (mu a + m, nu a + n) of X (x) Y
          const Index col = (nn * a + m) + a * a * (nu * b + mu);    // x_mn y_mu_nu in vec X (x) vec Y
          p(row, col) = 1.0;
        }
  return p;
}

// Index rules for the square-subsystem transformations.
ComplexMatrix ref_flip(const ComplexMatrix& z, Index n) {
  ComplexMatrix out(z.rows(), z.cols());
  for (Index m = 0; m < n; ++m)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nn = 0; nn < n; ++nn)
        for (Index nu = 0; nu < n; ++nu) out(mu * n + m, nu * n + nn) = z(m * n + mu, nn * n + nu);
  return out;
}

ComplexMatrix ref_partial_transpose_a(const ComplexMatrix& z, Index n) {
  ComplexMatrix out(z.rows(), z.cols());
  for (Index m = 0; m < n; ++m)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nn = 0; nn < n; ++nn)
        for (Index nu = 0; nu < n; ++nu) out(mu * n + m, nu * n + nn) = z(mu * n + nn, nu * n + m);
  return out;
}

ComplexMatrix ref_partial_transpose_b(const ComplexMatrix& z, Index n) {
  ComplexMatrix out(z.rows(), z.cols());
  for (Index m = 0; m < n; ++m)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nn = 0; nn < n; ++nn)
        for (Index nu = 0; nu < n; ++nu) out(mu * n + m, nu * n + nn) = z(nu * n + m, mu * n + nn);
  return out;
}

// ---- criterion 1 ----

void reshape_identities(Check& c) {
  std::mt19937_64 g(101);
  const std::vector<std::pair<Index, Index>> shapes{{2, 2}, {2, 3}};
  for (const auto& [a, b] : shapes) {
    const BipartiteShape sh{std::size_t(a), std::size_t(b)};
    const std::string tag = "(" + std::to_string(a) + "," + std::to_string(b) + ") ";
    const ComplexVector via = ref_vec(identity(std::size_t(a)));
    for (int k = 0; k < 100; ++k) {
      // Vectorization identities on a x b matrices.
      const ComplexMatrix t = rand_matrix(a, a, g), q = rand_matrix(a, a, g), x = rand_matrix(a, b, g),
                          r = rand_matrix(b, b, g), y = rand_matrix(b, a, g), w = rand_matrix(a, b, g);
      c.le(tag + "vec rule", (vectorize(x) - ref_vec(x)).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "eq1 left", (vectorize(t) - tensor(t, identity(std::size_t(a))) * via).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "eq1 right", (vectorize(t) - tensor(identity(std::size_t(a)), tr(t)) * via).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "eq2", (vectorize(ComplexMatrix(q * x * r)) - tensor(q, tr(r)) * vectorize(x)).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "eq3 left",
           (vectorize(ComplexMatrix(x * y)) - tensor(x, identity(std::size_t(a))) * vectorize(y)).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "eq3 right",
           (vectorize(ComplexMatrix(x * y)) - tensor(identity(std::size_t(a)), tr(y)) * vectorize(x)).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "eq4", (vectorize(ComplexMatrix(y.conjugate())).adjoint() - vectorize(y).transpose()).cwiseAbs().maxCoeff(), 1e-10);
      // Partial traces of dyads on the (a, b) composite.
      const ComplexMatrix dyad = vectorize(x) * vectorize(w).adjoint();
      c.le(tag + "trace_b dyad", max_abs(partial_trace_b(dyad, sh) - x * w.adjoint()), 1e-10);
      c.le(tag + "trace_a dyad", max_abs(partial_trace_a(dyad, sh) - tr(x) * w.conjugate()), 1e-10);
      const ComplexMatrix z = rand_matrix(a * b, a * b, g);
      c.le(tag + "trace_b", max_abs(partial_trace_b(z, sh) - ref_trace_b(z, a, b)), 1e-10);
      c.le(tag + "trace_a", max_abs(partial_trace_a(z, sh) - ref_trace_a(z, a, b)), 1e-10);
      // Realignment on the (a, b) composite.
      const ComplexMatrix xa = rand_matrix(a, a, g), yb = rand_matrix(b, b, g);
      c.le(tag + "realign rule", max_abs(realign(z, sh) - ref_realign(z, a, b)), 1e-10);
      c.le(tag + "realign inverse", max_abs(unrealign(realign(z, sh), sh) - z), 1e-10);
      c.le(tag + "realign product", max_abs(realign(tensor(xa, yb), sh) - ref_vec(xa) * ref_vec(yb.conjugate()).adjoint()), 1e-10);
      c.le(tag + "realign vec", (vectorize(realign(tensor(xa, yb), sh)) - tensor(ref_vec(xa), ref_vec(yb))).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "realign isometry", std::abs(realign(z, sh).norm() - z.norm()), 1e-10);
      // vec of a tensor product is a permuted tensor of vecs.
      c.le(tag + "vec tensor",
           (vectorize(tensor(xa, yb)) - vec_tensor_permutation(a, b) * tensor(vectorize(xa), vectorize(yb))).cwiseAbs().maxCoeff(),
           1e-10);
    }
  }
  // Transformations that need square subsystems.
  for (Index n : {2, 3}) {
    const BipartiteShape sh{std::size_t(n), std::size_t(n)};
    const std::string tag = "(" + std::to_string(n) + "," + std::to_string(n) + ") ";
    const ComplexMatrix big_swap = ref_kron(ref_kron(identity(std::size_t(n)), ref_swap(n)), identity(std::size_t(n)));
    const auto R = [&](const ComplexMatrix& m) { return realign(m, sh); };
    const auto F = [&](const ComplexMatrix& m) { return flip(m, sh); };
    for (int k = 0; k < 100; ++k) {
      const ComplexMatrix z = rand_matrix(n * n, n * n, g);
      const ComplexMatrix x = rand_matrix(n, n, g), y = rand_matrix(n, n, g);
      c.le(tag + "vec tensor identity", tensor_vec_identity_deviation(x, y), 1e-10);
      c.le(tag + "vec realign", (vectorize(R(z)) - big_swap * vectorize(z)).cwiseAbs().maxCoeff(), 1e-10);
      c.le(tag + "sandwich", max_abs(realign_sandwich(z) - R(z)), 1e-10);
      c.le(tag + "sandwich dyad", max_abs(realign_sandwich(ref_vec(x) * ref_vec(y).adjoint()) - ref_kron(x, y.conjugate())), 1e-10);
      c.le(tag + "flip rule", max_abs(F(z) - ref_flip(z, n)), 1e-10);
      c.le(tag + "swap conjugation", max_abs(F(z) - ref_swap(n) * z * ref_swap(n)), 1e-10);
      c.le(tag + "partial transpose a",
           max_abs(partial_transpose(z, sh, TransposeTarget::kA) - ref_partial_transpose_a(z, n)), 1e-10);
      c.le(tag + "partial transpose b",
           max_abs(partial_transpose(z, sh, TransposeTarget::kB) - ref_partial_transpose_b(z, n)), 1e-10);
      c.le(tag + "FT = TF", max_abs(F(tr(z)) - tr(F(z))), 1e-10);
      c.le(tag + "TR = RF", max_abs(tr(R(z)) - R(F(z))), 1e-10);
      c.le(tag + "RT = FR", max_abs(R(tr(z)) - F(R(z))), 1e-10);
      c.le(tag + "R' = FRF", max_abs(realign_prime(z, sh) - F(R(F(z)))), 1e-10);
      c.le(tag + "F_r = R T_A R", max_abs(flip_row(z, sh) - R(ref_partial_transpose_a(R(z), n))), 1e-10);
      c.le(tag + "F_c = R T_B R", max_abs(flip_col(z, sh) - R(ref_partial_transpose_b(R(z), n))), 1e-10);
    }
  }
}

// ---- criterion 2 ----

std::size_t ref_rank(const ComplexMatrix& m, double rel) {
  const Eigen::MatrixXcd d = m;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d);
  const auto& s = svd.singularValues();
  std::size_t r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel * s(0)) ++r;
  return r;
}

void product_factorization(Check& c) {
  std::mt19937_64 g(202);
  for (int k = 0; k < 100; ++k) {
    const Index a = 2, b = (k % 2) ? 3 : 2;
    const BipartiteShape sh{std::size_t(a), std::size_t(b)};
    const ComplexMatrix z = ref_kron(rand_matrix(a, a, g), rand_matrix(b, b, g));
    const auto f = product_factorize(z, sh);
    if (!c.truth("product operator rejected", f.has_value())) continue;
    c.le("product recovery", (z - tensor(f->first, f->second)).norm() / z.norm(), 1e-8);
  }
  for (int k = 0; k < 100; ++k) {
    const Index a = 2, b = (k % 2) ? 3 : 2;
    const BipartiteShape sh{std::size_t(a), std::size_t(b)};
    ComplexMatrix z = ref_kron(rand_matrix(a, a, g), rand_matrix(b, b, g));
    z += (k % 4 < 2) ? ComplexMatrix(ref_kron(rand_matrix(a, a, g), rand_matrix(b, b, g))) : rand_matrix(a * b, a * b, g);
    c.truth("oracle rank >= 2", ref_rank(ref_realign(z, a, b), 1e-10) >= 2);
    c.truth("non-product accepted", !product_factorize(z, sh).has_value());
  }
  const ComplexMatrix s = swap_operator(2);
  c.truth("swap accepted", !product_factorize(s, {2, 2}).has_value());
  c.truth("swap realignment rank", svd_rank(realign(s, {2, 2})) == 4 && ref_rank(ref_realign(s, 2, 2), 1e-10) == 4);
}

// ---- criteria 3-5 ----

Channel channel_of(const std::vector<ComplexMatrix>& ks) { return Channel::from_kraus(KrausSet::make(ks)); }

void choi_constraints(Check& c) {
  std::mt19937_64 g(303);
  for (const auto& [n, count] : std::vector<std::pair<Index, int>>{{2, 100}, {3, 20}}) {
    for (int k = 0; k < count; ++k) {
      const auto ks = testutil::rand_cptp_kraus(n, 1 + k % 4, g);
      const Channel phi = channel_of(ks);
      const ComplexMatrix& d = phi.choi().matrix;
      // Choi matrix from its definition, sum Phi(|mu><nu|) (x) |mu><nu|.
      ComplexMatrix ref = ComplexMatrix::Zero(n * n, n * n);
      for (Index mu = 0; mu < n; ++mu)
        for (Index nu = 0; nu < n; ++nu) ref += ref_kron(kraus_apply(ks, elem(n, mu, nu)), elem(n, mu, nu));
      c.le("choi definition", max_abs(d - ref), 1e-10);
      c.le("hermitian", max_abs(d - d.adjoint()), 1e-10);
      c.ge("min eigenvalue", min_eig(d), -1e-9);
      c.le("trace_a = I", max_abs(ref_trace_a(d, n, n) - identity(std::size_t(n))), 1e-9);
      c.le("trace = N", std::abs(d.trace().real() - double(n)), 1e-9);
      const Channel psi = channel_of(testutil::rand_cptp_kraus(n, 2, g));
      c.le("<L,L> = <D,D>",
           std::abs(hs_inner(phi.liouville().matrix, psi.liouville().matrix) - hs_inner(d, psi.choi().matrix)), 1e-9);
      const ComplexMatrix x = rand_matrix(n, n, g), y = rand_matrix(n, n, g);
      const Complex lhs = (kraus_apply(ks, x).adjoint() * y).trace();
      const Complex rhs = (d.adjoint() * ref_kron(y, x.conjugate())).trace();
      c.le("<Phi(X),Y> = <D, Y (x) X*>", std::abs(lhs - rhs), 1e-9);
    }
  }
}

void representation_round_trip(Check& c) {
  std::mt19937_64 g(404);
  for (int k = 0; k < 100; ++k) {
    const Index n = (k % 5 == 4) ? 3 : 2;
    const auto ks = testutil::rand_cptp_kraus(n, 1 + k % 3, g);
    const auto l = kraus_to_liouville(KrausSet::make(ks));
    const auto back = choi_to_kraus(liouville_to_choi(l));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        c.le("basis action", max_abs(kraus_apply(back.operators, elem(n, i, j)) - kraus_apply(ks, elem(n, i, j))), 1e-8);
  }
  const ChoiMatrix dt = liouville_to_choi(LiouvilleMatrix::make(ref_swap(2), 2, 2));
  try {
    choi_to_kraus(dt);
    c.fail("transpose map accepted by choi_to_kraus");
  } catch (const NotCompletelyPositiveError& e) {
    c.le("reported eigenvalue", std::abs(e.min_eigenvalue() + 1.0), 1e-10);
  }
}

void channel_algebra(Check& c) {
  std::mt19937_64 g(505);
  const ComplexMatrix s = ref_swap(2);
  for (int k = 0; k < 20; ++k) {
    const auto k1 = testutil::rand_cptp_kraus(2, 2, g), k2 = testutil::rand_cptp_kraus(2, 3, g);
    const Channel phi = channel_of(k1), psi = channel_of(k2);
    const ComplexMatrix rho = rand_matrix(2, 2, g);

    const Channel comp = compose(phi, psi);
    c.le("compose action", max_abs(choiscope::apply(comp, rho) - kraus_apply(k1, kraus_apply(k2, rho))), 1e-9);
    const ComplexMatrix rr = ref_realign(
        ComplexMatrix(ref_realign(phi.choi().matrix, 2, 2) * ref_realign(psi.choi().matrix, 2, 2)), 2, 2);
    c.le("compose Choi reshuffle", max_abs(comp.choi().matrix - rr), 1e-9);
    c.le("compose_choi", max_abs(compose_choi(phi.choi(), psi.choi()).matrix - rr), 1e-9);

    const Channel m = mix({0.25, 0.75}, {phi, psi});
    c.le("mix Choi", max_abs(m.choi().matrix - (0.25 * phi.choi().matrix + 0.75 * psi.choi().matrix)), 1e-9);
    c.le("mix action",
         max_abs(choiscope::apply(m, rho) - (0.25 * kraus_apply(k1, rho) + 0.75 * kraus_apply(k2, rho))), 1e-9);

    std::vector<ComplexMatrix> kk;
    for (const auto& a : k1)
      for (const auto& b : k2) kk.push_back(ref_kron(a, b));
    const ComplexMatrix big_swap = ref_kron(ref_kron(identity(2), s), identity(2));
    const ComplexMatrix eq36 = big_swap * ref_kron(phi.liouville().matrix, psi.liouville().matrix) * big_swap;
    const Channel t = tensor_channels(phi, psi);
    c.le("tensor vs Kraus", max_abs(t.liouville().matrix - kraus_to_liouville(KrausSet::make(kk)).matrix), 1e-9);
    c.le("tensor vs permuted product", max_abs(t.liouville().matrix - eq36), 1e-9);

    const Channel du = dual(phi);
    const ComplexMatrix sigma = rand_matrix(2, 2, g);
    c.le("dual adjoint identity",
         std::abs(hs_inner(kraus_apply(k1, rho), sigma) - hs_inner(rho, choiscope::apply(du, sigma))), 1e-9);
    c.le("dual Choi", max_abs(du.choi().matrix - ref_flip(tr(phi.choi().matrix), 2)), 1e-9);

    const Channel left = transpose_conjugations(phi, TransposeSide::kLeft);
    const Channel right = transpose_conjugations(phi, TransposeSide::kRight);
    const Channel both = transpose_conjugations(phi, TransposeSide::kBoth);
    c.le("T after Phi", max_abs(choiscope::apply(left, rho) - tr(kraus_apply(k1, rho))), 1e-9);
    c.le("Phi after T", max_abs(choiscope::apply(right, rho) - kraus_apply(k1, tr(rho))), 1e-9);
    c.le("T Phi T", max_abs(choiscope::apply(both, rho) - tr(kraus_apply(k1, tr(rho)))), 1e-9);
    c.le("L_left = S L", max_abs(left.liouville().matrix - s * phi.liouville().matrix), 1e-9);
    c.le("L_right = L S", max_abs(right.liouville().matrix - phi.liouville().matrix * s), 1e-9);
    c.le("L_both = conj L", max_abs(both.liouville().matrix - phi.liouville().matrix.conjugate()), 1e-9);
    c.le("D_left = T_A D", max_abs(left.choi().matrix - ref_partial_transpose_a(phi.choi().matrix, 2)), 1e-9);
    c.le("D_right = T_B D", max_abs(right.choi().matrix - ref_partial_transpose_b(phi.choi().matrix, 2)), 1e-9);

    const ComplexMatrix r4 = rand_state(4, g);
    const ComplexMatrix image = kraus_apply(kk, r4);
    c.le("realigned image",
         max_abs(ref_realign(image, 2, 2) - phi.liouville().matrix * ref_realign(r4, 2, 2) * tr(psi.liouville().matrix)),
         1e-9);
    c.le("realigned image check", realign_image_identity_deviation(phi, psi, r4), 1e-9);
  }
  for (int k = 0; k < 50; ++k) {
    const ComplexMatrix a = testutil::rand_psd(4, g), b = testutil::rand_psd(4, g);
    const ComplexMatrix ab = ref_realign(ComplexMatrix(ref_realign(a, 2, 2) * ref_realign(b, 2, 2)), 2, 2);
    const ChoiMatrix lib = compose_choi(ChoiMatrix::make(a, 2, 2), ChoiMatrix::make(b, 2, 2));
    c.le("composed PSD pair", max_abs(lib.matrix - ab), 1e-9);
    c.ge("composed PSD min eig", min_eig(ab), -1e-9);
  }
}

// ---- criterion 6 ----

OperatorBasis rotated_basis(Index n, std::mt19937_64& g) {
  const ComplexMatrix u = testutil::rand_unitary(n * n, g);
  std::vector<ComplexMatrix> es;
  for (Index a = 0; a < n * n; ++a) {
    ComplexMatrix e(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) e(i, j) = u(j * n + i, a);
    es.push_back(e);
  }
  return OperatorBasis::make(es);
}

void superop_space(Check& c) {
  std::mt19937_64 g(606);
  const auto random_map = [&](Index n) {
    return Channel::from_liouville(LiouvilleMatrix::make(rand_matrix(n * n, n * n, g), std::size_t(n), std::size_t(n)));
  };
  for (int k = 0; k < 10; ++k) {
    const Channel phi = random_map(2), psi = random_map(2);
    Complex ref = 0.0;  // sum over the elementary basis, term by term
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j)
        ref += (choiscope::apply(phi, elem(2, i, j)).adjoint() * choiscope::apply(psi, elem(2, i, j))).trace();
    double spread = std::abs(superop_inner(phi, psi, elementary_basis(2)) - ref);
    for (int b = 0; b < 3; ++b) spread = std::max(spread, std::abs(superop_inner(phi, psi, rotated_basis(2, g)) - ref));
    c.le("inner product basis spread", spread, 1e-8);
  }
  {
    const auto b = elementary_basis(2);
    std::vector<ComplexVector> dv, tv;
    for (const auto& e : b.elements)
      for (const auto& f : b.elements) {
        dv.push_back(ref_vec(delta_liouville(e, f)));
        tv.push_back(ref_vec(theta_liouville(e, f)));
      }
    double gd = 0.0, gt = 0.0;
    for (std::size_t i = 0; i < dv.size(); ++i)
      for (std::size_t j = 0; j < dv.size(); ++j) {
        const double id = i == j ? 1.0 : 0.0;
        gd = std::max(gd, std::abs(dv[i].dot(dv[j]) - id));
        gt = std::max(gt, std::abs(tv[i].dot(tv[j]) - id));
      }
    c.le("Delta Gram", gd, 1e-9);
    c.le("Theta Gram", gt, 1e-9);
  }
  for (int k = 0; k < 10; ++k) {
    const Index n = (k % 2) ? 3 : 2;
    const Channel phi = random_map(n);
    const OperatorBasis e = rotated_basis(n, g), f = rotated_basis(n, g);
    const auto co = coefficients(phi, e, f);
    ComplexMatrix lp = ComplexMatrix::Zero(n * n, n * n), lq = lp;
    for (Index a = 0; a < n * n; ++a)
      for (Index b = 0; b < n * n; ++b) {
        lp += co.p(a, b) * ref_vec(e.elements[std::size_t(a)]) * ref_vec(f.elements[std::size_t(b)]).adjoint();
        lq += co.q(a, b) * ref_kron(e.elements[std::size_t(a)], f.elements[std::size_t(b)].conjugate());
      }
    c.le("P reconstruction", max_abs(lp - phi.liouville().matrix), 1e-8);
    c.le("Q reconstruction", max_abs(lq - phi.liouville().matrix), 1e-8);
    const ComplexMatrix p = convert_coeffs(co.q, e, f, CoeffDirection::kQToP);
    c.le("Q to P", max_abs(p - co.p), 1e-8);
    c.le("Q to P to Q", max_abs(convert_coeffs(p, e, f, CoeffDirection::kPToQ) - co.q), 1e-8);
  }
  for (Index n : {2, 3}) {
    for (const OperatorBasis& b : {elementary_basis(std::size_t(n)), rotated_basis(n, g)}) {
      ComplexMatrix s1 = ComplexMatrix::Zero(n * n, n * n), s2 = s1;
      for (const auto& e : b.elements) {
        s1 += ref_kron(e, e.conjugate());
        s2 += ref_kron(e, e.adjoint());
      }
      const ComplexVector vi = ref_vec(identity(std::size_t(n)));
      c.le("sum E (x) E*", max_abs(s1 - vi * vi.adjoint()), 1e-9);
      c.le("sum E (x) E^dagger", max_abs(s2 - ref_swap(n)), 1e-9);
      c.truth("basis_resolution_checks", basis_resolution_checks(b));
    }
  }
}

// ---- criterion 7 ----

void maximal_lambda(Check& c) {
  std::mt19937_64 g(707);
  for (Index n : {4, 9}) {
    for (int k = 0; k < 200; ++k) {
      const Index rank = (k % 2 == 0) ? n : n - 1 - k % 3;
      const ComplexMatrix rho = rand_state(n, g, rank);
      const ComplexVector psi = (k % 2 == 0) ? rand_unit(n, g) : ComplexVector(rho * testutil::rand_vector(n, g));
      c.le("closed form vs bisection", std::abs(max_lambda(rho, psi) - testutil::bisect_max_lambda(rho, psi)), 1e-8);
    }
  }
  const ComplexVector psi = rand_unit(4, g);
  c.le("rho = P", std::abs(max_lambda(proj(psi), psi) - 1.0), 1e-12);
  c.le("I/4", std::abs(max_lambda(identity(4) / 4.0, rand_unit(4, g)) - 0.25), 1e-12);
  ComplexMatrix low = ComplexMatrix::Zero(4, 4);
  low(0, 0) = low(1, 1) = 0.5;
  ComplexVector out = ComplexVector::Zero(4);
  out(2) = 0.6;
  out(3) = 0.8;
  c.le("out of range", std::abs(max_lambda(low, out)), 1e-12);
}

// ---- criterion 8 ----

ComplexVector bloch(double th, double ph) {
  ComplexVector v(2);
  v << std::cos(th / 2), std::polar(std::sin(th / 2), ph);
  return v;
}

void check_decomposition(Check& c, const ComplexMatrix& rho, const BsaDecomposition& d) {
  c.ge("residual min eigenvalue", d.residual_min_eigenvalue, -1e-8);
  c.ge("independent residual min eigenvalue", min_eig(d.residual), -1e-8);
  ComplexMatrix sum = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& t : d.terms) sum += t.weight * proj(ref_kron(t.vector.e, t.vector.f));
  c.le("terms + residual = rho", max_abs(sum + d.residual - rho), 1e-9);
  for (std::size_t i = 1; i < d.sweep_history.size(); ++i)
    c.ge("sweep monotone", d.sweep_history[i] - d.sweep_history[i - 1], -1e-12);
}

void bsa_states(Check& c) {
  std::mt19937_64 g(808);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int k = 0; k < 3; ++k) {
    ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
    double total = 0.0;
    for (int t = 0; t < 6; ++t) {
      const double w = u(g);
      rho += w * proj(ref_kron(rand_unit(2, g), rand_unit(2, g)));
      total += w;
    }
    rho /= total;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto d = bsa_state(rho, {2, 2}, 500, seed);
      c.ge("separable mixture lambda", d.lambda_total, 0.99);
      check_decomposition(c, rho, d);
    }
  }
  ComplexVector singlet = ComplexVector::Zero(4);
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  for (const ComplexVector& psi : {singlet, ComplexVector(rand_unit(4, g)), ComplexVector(rand_unit(4, g))}) {
    const auto d = bsa_state(proj(psi), {2, 2}, 500, 1);
    c.truth("pure entangled lambda exactly 0", d.lambda_total == 0.0);
  }

  const ComplexMatrix werner = 0.5 * proj(singlet) + 0.5 * identity(4) / 4.0;
  std::vector<ProductVector> grid;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k)
        for (int l = 0; l < 10; ++l)
          grid.push_back(ProductVector::make(bloch(M_PI * (i + 0.5) / 10, 2 * M_PI * j / 10),
                                             bloch(M_PI * (k + 0.5) / 10, 2 * M_PI * l / 10)));
  const double oracle = osa_fixed_set(werner, grid).lambda_total;
  const auto dw = bsa_state(werner, {2, 2}, 500, 5);
  c.le("Werner vs grid oracle", std::abs(dw.lambda_total - oracle), 2e-2);
  check_decomposition(c, werner, dw);

  for (int k = 0; k < 3; ++k) {
    const ComplexMatrix rho = 0.5 * proj(rand_unit(4, g)) + 0.5 * rand_state(4, g);
    const auto a = bsa_state(rho, {2, 2}, 500, 10 + k);
    const auto b = bsa_state(rho, {2, 2}, 500, 20 + k);
    c.le("two-seed lambda", std::abs(a.lambda_total - b.lambda_total), 1e-3);
    c.le("two-seed separable part", (a.lambda_total * a.separable_part - b.lambda_total * b.separable_part).norm(), 5e-3);
    check_decomposition(c, rho, a);
    check_decomposition(c, rho, b);
  }
}

// ---- criterion 9 ----

ComplexVector regrouped(const ComplexMatrix& m, Index d) {
  ComplexVector w(d * d * d * d);
  for (Index a = 0; a < d; ++a)
    for (Index n = 0; n < d; ++n)
      for (Index mu = 0; mu < d; ++mu)
        for (Index nu = 0; nu < d; ++nu) w(a + d * n + d * d * mu + d * d * d * nu) = m(mu * d + a, nu * d + n);
  return w;
}

void bsa_operations(Check& c) {
  std::mt19937_64 g(909);
  for (int k = 0; k < 3; ++k) {
    std::vector<ComplexMatrix> ks;
    for (int t = 0; t < 2 + k; ++t) ks.push_back(0.4 * ref_kron(rand_matrix(2, 2, g), rand_matrix(2, 2, g)));
    const Channel phi = channel_of(ks);
    const auto op = bsa_operation(phi, 2, 500, 7 + k);
    c.le("product Kraus channel ENT norm", op.ent_part.choi().matrix.norm() / phi.choi().matrix.norm(), 1e-2);
    c.le("BSA + ENT = D", max_abs(op.bsa_part.choi().matrix + op.ent_part.choi().matrix - phi.choi().matrix), 1e-8);
    for (const auto& m : op.product_kraus) c.truth("BSA Kraus factorizes", product_factorize(m, {2, 2}).has_value());
  }
  const Channel id = channel_of({identity(4)});
  const auto op = bsa_operation(id, 2, 500, 1);
  c.le("identity ENT", max_abs(op.ent_part.choi().matrix), 1e-10);
  c.le("identity BSA", max_abs(op.bsa_part.choi().matrix - id.choi().matrix), 1e-10);

  const double r = 1.0 / std::sqrt(2.0);
  const auto split = kraus_factor_split(KrausSet::make({identity(4) * r, ref_swap(2) * r}), {2, 2});
  c.truth("split sizes", split.product.size() == 1 && split.rest.size() == 1);
  if (split.product.size() == 1 && split.rest.size() == 1) {
    c.le("split product part", max_abs(split.product[0] - identity(4) * r), 0.0);
    c.le("split rest", max_abs(split.rest[0] - ref_swap(2) * r), 0.0);
  }

  const ComplexMatrix p = regroup_permutation(2);
  for (int k = 0; k < 50; ++k) {
    const auto ks = testutil::rand_cptp_kraus(4, 1 + k % 3, g);
    ComplexMatrix expect = ComplexMatrix::Zero(16, 16);
    for (const auto& m : ks) expect += regrouped(m, 2) * regrouped(m, 2).adjoint();
    const ComplexMatrix e = bipartite_choi(KrausSet::make(ks), 2, false);
    c.le("bipartite Choi vs regrouped vectors", max_abs(e - expect), 1e-10);
    c.le("bipartite Choi = P D P", max_abs(e - p * channel_of(ks).choi().matrix * p), 1e-10);
  }
}

// ---- criterion 10 ----

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::vector<std::string>& args, std::string* out_text) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

void cli_contract(Check& c) {
  namespace fs = std::filesystem;
  const fs::path fix = CHOISCOPE_FIXTURE_DIR, gold = CHOISCOPE_GOLDEN_DIR;
  const auto f = [&](const std::string& n) { return (fix / (n + ".json")).string(); };
  struct Case {
    std::string golden;
    std::vector<std::string> args;
    int code;
  };
  const std::vector<Case> cases{
      {"inspect_identity", {"inspect", f("identity_qubit")}, kExitOk},
      {"inspect_transpose", {"inspect", f("transpose_qubit")}, kExitValidation},
      {"inspect_depolarizing", {"inspect", f("depolarizing_half")}, kExitOk},
      {"inspect_random_cp", {"inspect", f("random_cp_qubit")}, kExitOk},
      {"inspect_singlet", {"inspect", f("singlet")}, kExitOk},
      {"inspect_maximally_mixed", {"inspect", f("maximally_mixed")}, kExitOk},
      {"convert_identity_choi", {"convert", f("identity_qubit"), "choi"}, kExitOk},
      {"convert_identity_liouville", {"convert", f("identity_qubit"), "liouville"}, kExitOk},
      {"convert_depolarizing_kraus", {"convert", f("depolarizing_half"), "kraus"}, kExitOk},
      {"convert_random_cp_choi", {"convert", f("random_cp_qubit"), "choi"}, kExitOk},
      {"convert_transpose_kraus", {"convert", f("transpose_qubit"), "kraus"}, kExitValidation},
      {"bsa_singlet", {"--seed", "1", "bsa", f("singlet")}, kExitOk},
      {"bsa_maximally_mixed", {"--seed", "1", "bsa", f("maximally_mixed"), "--budget", "500"}, kExitOk},
      {"bsa_local_unitary_operation", {"--seed", "1", "bsa", f("local_unitary"), "--operation"}, kExitOk},
      {"gen_identity", {"gen", "identity", "2"}, kExitOk},
      {"gen_depolarizing_one", {"gen", "depolarizing(1)", "2"}, kExitOk},
      {"gen_random_cp", {"--seed", "7", "gen", "random-cp", "2"}, kExitOk},
      {"gen_werner", {"gen", "werner(0.5)", "2"}, kExitOk},
  };
  for (const auto& k : cases) {
    std::string first, second;
    const int code = run(k.args, &first);
    c.truth(k.golden + " exit code", code == k.code);
    c.truth(k.golden + " golden", first == read_file(gold / (k.golden + ".out")));
    run(k.args, &second);
    c.truth(k.golden + " deterministic", first == second);
  }
  c.truth("malformed file exit 1", run({"inspect", f("malformed")}, nullptr) == kExitInput);
  c.truth("missing file exit 1", run({"inspect", (fix / "missing.json").string()}, nullptr) == kExitInput);
  c.truth("missing seed exit 1", run({"gen", "random-cp", "2"}, nullptr) == kExitInput);
  c.truth("unknown verb exit 1", run({"frobnicate"}, nullptr) == kExitInput);
  for (const char* name : {"identity_qubit", "transpose_qubit", "depolarizing_half", "random_cp_qubit", "singlet",
                           "maximally_mixed", "local_unitary"}) {
    const std::string text = read_file(f(name));
    c.truth(std::string(name) + " canonical round trip", serialize_channel_file(parse_channel_file(text)) == text);
  }
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "reshape identities", reshape_identities},
      {2, "product factorization", product_factorization},
      {3, "dynamical matrix constraints", choi_constraints},
      {4, "representation round trip", representation_round_trip},
      {5, "channel algebra", channel_algebra},
      {6, "superoperator space", superop_space},
      {7, "maximal lambda", maximal_lambda},
      {8, "separable approximation of states", bsa_states},
      {9, "separable approximation of operations", bsa_operations},
      {10, "command line contract", cli_contract},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.fail(std::string("exception: ") + e.what());
    }
    std::printf("criterion %d %s: %s (max error %s)\n", cr.id, cr.title, c.passed() ? "PASS" : "FAIL",
                Check::fmt(c.worst()).c_str());
    for (const auto& m : c.failures()) std::printf("    %s\n", m.c_str());
    if (c.failure_count() > c.failures().size())
      std::printf("    ... %zu more\n", c.failure_count() - c.failures().size());
    if (!c.passed()) ++failed;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
