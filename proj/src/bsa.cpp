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


#include "choiscope/bsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "choiscope/error.hpp"
#include "choiscope/random.hpp"

namespace choiscope {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

// Eigenvalues at or below this fraction of the largest one span the null space.
constexpr double kRangeFloor = 1e-12;
// Candidates are the same ray when their fidelity exceeds 1 - this.
constexpr double kDuplicateTol = 1e-8;
// Weights below this fraction of tr(rho) are returned to the residual.
constexpr double kPruneTol = 1e-12;
// Interior point subproblems are kept to at most about this many candidates; the
// rest are priced against the dual and enter only when they violate it.
constexpr Index kDirectLimit = 64;
// Terms lighter than this are not carried into the next candidate round.
constexpr double kActiveTol = 1e-9;
constexpr std::uint64_t kPolishSeed = 0x9e3779b97f4a7c15ULL;

struct Spectrum {
  RealVector w;
  ComplexMatrix v;
  double floor = 0.0;
  Index rank = 0;  // eigenvalues are ascending, so the range is the last `rank` columns
};

Spectrum spectrum(const ComplexMatrix& h) {
  const ComplexMatrix sym = (h + h.adjoint()) * 0.5;
  HermitianEigen eig = eig_hermitian(sym, {std::numeric_limits<double>::infinity(), 0.0});
  Spectrum s;
  s.w = std::move(eig.eigenvalues);
  s.v = std::move(eig.eigenvectors);
  const double top = s.w.size() ? s.w(s.w.size() - 1) : 0.0;
  s.floor = kRangeFloor * std::max(top, 0.0);
  for (Index k = 0; k < s.w.size(); ++k) {
    if (s.w(k) > s.floor) ++s.rank;
  }
  return s;
}

ComplexMatrix range_basis(const Spectrum& s) {
  return s.v.rightCols(s.rank);
}

// Squared norm of the component of unit psi outside the range.
double leak(const Spectrum& s, const ComplexVector& psi) {
  const Index n0 = s.w.size() - s.rank;
  if (n0 == 0) return 0.0;
  return (s.v.leftCols(n0).adjoint() * psi).squaredNorm();
}

double max_lambda_from(const Spectrum& s, const ComplexVector& unit_psi) {
  if (s.rank == 0 || leak(s, unit_psi) > kRangeLeakTol) return 0.0;
  const ComplexVector coords = range_basis(s).adjoint() * unit_psi;
  const RealVector w = s.w.tail(s.rank);
  double inv = 0.0;
  for (Index k = 0; k < s.rank; ++k) inv += std::norm(coords(k)) / w(k);
  return inv > 0.0 ? 1.0 / inv : 0.0;
}

double max_lambda_raw(const ComplexMatrix& h, const ComplexVector& unit_psi) {
  return max_lambda_from(spectrum(h), unit_psi);
}

ComplexVector normalized(const ComplexVector& psi) {
  const double n = psi.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::kInvalidArgument, "vector must be nonzero and finite");
  }
  return psi / n;
}

void require_state(const ComplexMatrix& rho, Tolerance tol) {
  DensityMatrix::make(rho, tol);
}

double lambda_max_2x2(double g11, double g22, Complex g12, double t) {
  const double a = t * g11, d = (1.0 - t) * g22;
  const double b2 = t * (1.0 - t) * std::norm(g12);
  const double half = 0.5 * (a - d);
  return 0.5 * (a + d) + std::sqrt(half * half + b2);
}

std::pair<double, double> max_pair_raw(const ComplexMatrix& rho, const ComplexVector& p1,
                                       const ComplexVector& p2) {
  const Spectrum s = spectrum(rho);
  const bool in1 = s.rank > 0 && leak(s, p1) <= kRangeLeakTol;
  const bool in2 = s.rank > 0 && leak(s, p2) <= kRangeLeakTol;
  if (!in1 && !in2) return {0.0, 0.0};
  if (!in1) return {0.0, max_lambda_from(s, p2)};
  if (!in2) return {max_lambda_from(s, p1), 0.0};

  // Along the ray w = s (t, 1 - t) the largest feasible s is
  // 1 / lambda_max(D G D) with G the Gram matrix of the two vectors under the
  // pseudo-inverse.  The sum equals s, and the feasible region is convex, so
  // s(t) is unimodal.
  const ComplexMatrix basis = range_basis(s);
  const RealVector inv_w = s.w.tail(s.rank).cwiseInverse();
  const ComplexVector c1 = basis.adjoint() * p1;
  const ComplexVector c2 = basis.adjoint() * p2;
  const double g11 = (c1.cwiseAbs2().cwiseProduct(inv_w)).sum();
  const double g22 = (c2.cwiseAbs2().cwiseProduct(inv_w)).sum();
  const Complex g12 = (c1.conjugate().cwiseProduct(inv_w.cast<Complex>()).cwiseProduct(c2)).sum();
  auto cost = [&](double t) { return lambda_max_2x2(g11, g22, g12, t); };

  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 1.0;
  double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - golden * (hi - lo); f1 = cost(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + golden * (hi - lo); f2 = cost(x2);
    }
  }
  double best_t = 0.5 * (lo + hi);
  double best = cost(best_t);
  for (double t : {0.0, 1.0}) {
    if (cost(t) < best) { best = cost(t); best_t = t; }
  }
  double w1 = 0.0, w2 = 0.0;
  if (best > 0.0) {
    const double scale = (1.0 - 1e-12) / best;
    w1 = scale * best_t;
    w2 = scale * (1.0 - best_t);
  }

  // Alternate single maximizations from the ray optimum so each weight is
  // maximal given the other.
  const ComplexMatrix proj1 = outer(p1, p1), proj2 = outer(p2, p2);
  for (int round = 0; round < 4; ++round) {
    const double n1 = max_lambda_raw(rho - w2 * proj2, p1);
    const double n2 = max_lambda_raw(rho - n1 * proj1, p2);
    const bool moved = std::abs(n1 - w1) + std::abs(n2 - w2) > 1e-15;
    if (n1 + n2 >= w1 + w2) { w1 = n1; w2 = n2; }
    if (!moved) break;
  }
  return {w1, w2};
}

double fidelity(const ComplexVector& a, const ComplexVector& b) {
  return std::norm(a.dot(b));
}

bool is_duplicate(const std::vector<ProductVector>& kept, const ComplexVector& psi) {
  for (const auto& pv : kept) {
    if (fidelity(pv.composite(), psi) > 1.0 - kDuplicateTol) return true;
  }
  return false;
}

// Contracts z over one factor of a product vector.  With side A the result
// acts on the A factor: m[i, j] = sum conj(f_mu) f_nu z[mu dA + i, nu dA + j].
ComplexMatrix contract(const ComplexMatrix& z, BipartiteShape shape, const ComplexVector& other,
                       bool keep_a) {
  const Index da = idx(shape.d_a), db = idx(shape.d_b);
  if (keep_a) {
    ComplexMatrix m = ComplexMatrix::Zero(da, da);
    for (Index mu = 0; mu < db; ++mu)
      for (Index nu = 0; nu < db; ++nu)
        m += std::conj(other(mu)) * other(nu) * z.block(mu * da, nu * da, da, da);
    return m;
  }
  ComplexMatrix m(db, db);
  for (Index mu = 0; mu < db; ++mu)
    for (Index nu = 0; nu < db; ++nu)
      m(mu, nu) = other.dot(z.block(mu * da, nu * da, da, da) * other);
  return m;
}

ComplexVector extreme_eigenvector(const ComplexMatrix& m, bool largest) {
  const Spectrum s = spectrum(m);
  return s.v.col(largest ? s.w.size() - 1 : 0);
}

// Alternating optimization of <e f| z |e f> over unit product vectors.
ProductVector extremal_product(const ComplexMatrix& z, BipartiteShape shape, ComplexVector e,
                               ComplexVector f, bool maximize, int max_iter = 300) {
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < max_iter; ++it) {
    e = extreme_eigenvector(contract(z, shape, f, true), maximize);
    f = extreme_eigenvector(contract(z, shape, e, false), maximize);
    const ComplexVector psi = tensor(e, f);
    const double val = psi.dot(z * psi).real();
    if (std::abs(val - prev) <= 1e-15 * std::max(1.0, std::abs(val))) break;
    prev = val;
  }
  return ProductVector::make(std::move(e), std::move(f));
}

struct WeightSolution {
  RealVector c;
  ComplexMatrix dual;  // optimal Y of the dual program, whitened coordinates
};

// Real coordinates of v v^dagger in an orthonormal basis of Hermitian matrices,
// so that dot products reproduce |<v_k, v_l>|^2.
void hermitian_coords(const ComplexVector& v, Eigen::Ref<Eigen::VectorXd> out) {
  const Index r = v.size();
  Index pos = 0;
  for (Index i = 0; i < r; ++i) out(pos++) = std::norm(v(i));
  const double root2 = std::sqrt(2.0);
  for (Index i = 0; i < r; ++i) {
    for (Index j = i + 1; j < r; ++j) {
      const Complex h = v(i) * std::conj(v(j));
      out(pos++) = root2 * h.real();
      out(pos++) = root2 * h.imag();
    }
  }
}

// Largest step t in (0, 1] along dir keeping the positive definite x + t dir
// positive definite, damped by 0.95.
double psd_step(const ComplexMatrix& x, const ComplexMatrix& dir) {
  Eigen::LLT<Eigen::MatrixXcd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXcd t = llt.matrixL().solve(Eigen::MatrixXcd(dir));
  t = llt.matrixL().solve(Eigen::MatrixXcd(t.adjoint())).adjoint().eval();
  t = (t + t.adjoint()).eval() * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo < 0.0 ? std::min(1.0, -0.95 / lo) : 1.0;
}

double vec_step(const RealVector& x, const RealVector& dir) {
  double t = 1.0;
  for (Index k = 0; k < x.size(); ++k) {
    if (dir(k) < 0.0) t = std::min(t, -0.95 * x(k) / dir(k));
  }
  return t;
}

ComplexMatrix herm(const ComplexMatrix& m) { return (m + m.adjoint()) * 0.5; }

// Maximizes sum c subject to sum c_k u_k u_k^dagger <= I, c >= 0 (columns of u
// are whitened candidates) together with its dual, min tr Y subject to
// u_k^dagger Y u_k >= 1, Y >= 0, by an infeasible primal-dual interior point
// method (HKM direction, Mehrotra-style centering). Slacks: S = I - sum c P,
// s_k = u_k^dagger Y u_k - 1.
WeightSolution maximize_weights(const ComplexMatrix& u) {
  const Index r = u.rows(), n = u.cols();
  const ComplexMatrix id = ComplexMatrix::Identity(r, r);
  ComplexMatrix y = id, sl = id;
  RealVector s = RealVector::Ones(n), c = RealVector::Ones(n);
  const double scale = std::sqrt(static_cast<double>(n + r));

  auto apply_weights = [&](const RealVector& w) -> ComplexMatrix {
    return herm(u * w.cast<Complex>().asDiagonal() * u.adjoint());
  };
  auto costs = [&](const ComplexMatrix& m) -> RealVector {
    return (m * u).cwiseProduct(u.conjugate()).colwise().sum().real().transpose();
  };

  double best_mu = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < 200; ++it) {
    const double mu = ((y * sl).trace().real() + s.dot(c)) / static_cast<double>(n + r);
    const RealVector rp = RealVector::Ones(n) - costs(y) + s;
    const ComplexMatrix rd = id - sl - apply_weights(c);
    const RealVector rd_s = c - c;  // the dual slack of c >= 0 is c itself
    const double gap = std::abs(y.trace().real() - c.sum());
    const double infeas = std::max(rp.norm(), rd.norm()) / scale;
    if (mu < 1e-14 && infeas < 1e-12) break;
    if (!std::isfinite(mu) || (gap < 1e-13 * (1.0 + c.sum()) && infeas < 1e-12 && mu < 1e-12)) break;
    // Near the optimum round-off keeps the residuals from shrinking further.
    if (mu < 0.5 * best_mu) {
      best_mu = mu;
      stalled = 0;
    } else if (++stalled >= 5 && mu < 1e-12 && infeas < 1e-10) {
      break;
    }

    Eigen::LLT<Eigen::MatrixXcd> sl_llt(sl);
    if (sl_llt.info() != Eigen::Success) break;
    const ComplexMatrix sl_inv = herm(sl_llt.solve(id));
    const ComplexMatrix uy = u.adjoint() * y * u;
    const ComplexMatrix us = u.adjoint() * sl_inv * u;
    Eigen::MatrixXd schur = (uy.array() * us.array().conjugate()).real().matrix();
    schur.diagonal() += (s.array() / c.array()).matrix();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
    if (ldlt.info() != Eigen::Success) break;

    ComplexMatrix dy;
    RealVector dc, ds;
    ComplexMatrix dsl;
    auto direction = [&](double sigma_mu) {
      const ComplexMatrix t = y * rd * sl_inv;
      const RealVector rhs = RealVector::Ones(n) - sigma_mu * costs(sl_inv) +
                             sigma_mu * c.cwiseInverse() + costs(t) -
                             s.cwiseProduct(rd_s).cwiseQuotient(c);
      dc = ldlt.solve(rhs);
      dsl = rd - apply_weights(dc);
      const RealVector dz = rd_s + dc;
      dy = herm(sigma_mu * sl_inv - y - y * dsl * sl_inv);
      ds = (sigma_mu * c.cwiseInverse() - s - s.cwiseProduct(dz).cwiseQuotient(c)).eval();
    };
    auto steps = [&]() {
      const double ap = std::min(psd_step(y, dy), vec_step(s, ds));
      const double ad = std::min(psd_step(sl, dsl), vec_step(c, dc));
      return std::make_pair(ap, ad);
    };

    direction(0.0);
    auto [ap, ad] = steps();
    const double mu_aff = (((y + ap * dy) * (sl + ad * dsl)).trace().real() +
                           (s + ap * ds).dot(c + ad * dc)) /
                          static_cast<double>(n + r);
    const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
    direction(std::max(ratio * ratio * ratio, 1e-3) * mu);
    std::tie(ap, ad) = steps();
    if (ap <= 1e-14 && ad <= 1e-14) break;
    y = herm(y + ap * dy);
    s += ap * ds;
    sl = herm(sl + ad * dsl);
    c += ad * dc;
  }

  WeightSolution res;
  res.c = c.cwiseMax(0.0);
  // Project onto exact feasibility: scale weights into the constraint and
  // the dual onto u^dagger Y u >= 1.
  const Spectrum top = spectrum(apply_weights(res.c));
  const double lmax = top.w.size() ? top.w(top.w.size() - 1) : 0.0;
  if (lmax > 1.0) res.c /= lmax;
  res.dual = herm(y);
  if (n > 0) {
    const double low = costs(res.dual).minCoeff();
    if (low > 0.0) res.dual /= low;
  }
  return res;
}

// Weight solve over all columns of u through a working set: solve on the
// set, price every column against the dual (a column with u^dagger Y u < 1
// would raise the sum), admit the most violated ones and retire inactive
// ones until no column violates.
WeightSolution solve_whitened(const ComplexMatrix& u) {
  const Index n = u.cols();
  if (n <= kDirectLimit) return maximize_weights(u);
  const Index batch = std::max<Index>(8, u.rows() * u.rows());
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const RealVector norms = u.colwise().squaredNorm().transpose();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return norms(a) < norms(b); });
  std::vector<Index> working(order.begin(), order.begin() + std::min(n, kDirectLimit));
  WeightSolution sub;
  for (int round = 0; round < 500; ++round) {
    ComplexMatrix uw(u.rows(), static_cast<Index>(working.size()));
    for (std::size_t j = 0; j < working.size(); ++j) uw.col(static_cast<Index>(j)) = u.col(working[j]);
    sub = maximize_weights(uw);
    std::vector<char> in_set(static_cast<std::size_t>(n), 0);
    for (Index k : working) in_set[static_cast<std::size_t>(k)] = 1;
    std::vector<std::pair<double, Index>> violators;
    for (Index k = 0; k < n; ++k) {
      if (in_set[static_cast<std::size_t>(k)]) continue;
      const double cost = u.col(k).dot(sub.dual * u.col(k)).real();
      if (cost < 1.0 - 1e-9) violators.emplace_back(cost, k);
    }
    if (violators.empty()) break;
    std::sort(violators.begin(), violators.end());
    std::vector<Index> next;
    for (std::size_t j = 0; j < working.size(); ++j) {
      if (sub.c(static_cast<Index>(j)) > 1e-9) next.push_back(working[j]);
    }
    for (std::size_t j = 0; j < violators.size() && static_cast<Index>(j) < batch; ++j) {
      next.push_back(violators[j].second);
    }
    working = std::move(next);
  }
  WeightSolution full;
  full.c = RealVector::Zero(n);
  for (std::size_t j = 0; j < working.size(); ++j) full.c(working[j]) = sub.c(static_cast<Index>(j));
  full.dual = sub.dual;
  return full;
}

// Carathéodory reduction: rewrites sum c_k P_k with at most d^2 nonzero
// weights without changing the sum, by moving along null combinations of the
// projectors' real coordinates until a weight hits zero.
void reduce_support(const std::vector<ComplexVector>& psi, RealVector& c) {
  if (psi.empty()) return;
  const Index d = psi.front().size();
  const Index dim = d * d;
  std::vector<Index> active;
  for (Index k = 0; k < c.size(); ++k) {
    if (c(k) > 0.0) active.push_back(k);
  }
  Eigen::MatrixXd x(dim, dim + 1);
  while (static_cast<Index>(active.size()) > dim) {
    for (Index j = 0; j <= dim; ++j) hermitian_coords(psi[active[j]], x.col(j));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(x);
    const Eigen::MatrixXd kernel = lu.kernel();
    Eigen::VectorXd z = kernel.col(0);
    if (z.maxCoeff() <= 0.0) z = -z;
    double t = std::numeric_limits<double>::infinity();
    Index hit = 0;
    for (Index j = 0; j <= dim; ++j) {
      if (z(j) > 0.0 && c(active[j]) / z(j) < t) {
        t = c(active[j]) / z(j);
        hit = j;
      }
    }
    for (Index j = 0; j <= dim; ++j) c(active[j]) = std::max(0.0, c(active[j]) - t * z(j));
    c(active[hit]) = 0.0;
    std::vector<Index> kept;
    for (Index k : active) {
      if (c(k) > 0.0) kept.push_back(k);
    }
    active = std::move(kept);
  }
}

struct FixedSetSolution {
  BsaDecomposition dec;
  ComplexMatrix dual;  // full-space dual operator W Y W^dagger
};

FixedSetSolution solve_fixed_set(const ComplexMatrix& rho, const std::vector<ProductVector>& v,
                                 Tolerance tol, std::size_t max_sweeps) {
  require_state(rho, tol);
  const double trace = rho.trace().real();
  if (!(trace > 0.0)) throw Error(ErrorKind::kNotAState, "state has zero trace");
  const ComplexMatrix rho_n = ((rho + rho.adjoint()) * 0.5) / trace;
  const Index dim = rho.rows();
  const Spectrum s = spectrum(rho_n);

  std::vector<ComplexVector> psi;
  psi.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    ComplexVector p = v[k].composite();
    if (p.size() != dim) {
      throw Error(ErrorKind::kShapeMismatch, "candidate dimension differs from the state");
    }
    p = normalized(p);
    const double l = leak(s, p);
    if (l > kRangeLeakTol) {
      throw Error(ErrorKind::kCandidateOutsideRange,
                  "candidate " + std::to_string(k) + " has out-of-range weight " + std::to_string(l));
    }
    psi.push_back(std::move(p));
  }

  FixedSetSolution out;
  BsaDecomposition& dec = out.dec;
  dec.candidate_set_size = v.size();
  const std::size_t n = psi.size();
  RealVector c = RealVector::Zero(idx(n));

  // Whitened coordinates u_k = diag(w)^{-1/2} V_r^dagger psi_k.
  const ComplexMatrix basis = range_basis(s);
  const RealVector inv_sqrt = s.w.tail(s.rank).cwiseSqrt().cwiseInverse();
  ComplexMatrix whiten = inv_sqrt.cast<Complex>().asDiagonal() * basis.adjoint();
  out.dual = ComplexMatrix::Zero(dim, dim);
  if (n > 0 && s.rank > 0) {
    ComplexMatrix u(s.rank, idx(n));
    for (std::size_t k = 0; k < n; ++k) u.col(idx(k)) = whiten * psi[k];
    WeightSolution br = solve_whitened(u);
    c = br.c;
    out.dual = whiten.adjoint() * br.dual * whiten;
  }

  ComplexMatrix residual = rho_n;
  for (std::size_t k = 0; k < n; ++k) residual -= c(idx(k)) * outer(psi[k], psi[k]);
  dec.sweep_history.push_back(c.sum());

  // Coordinate-ascent polish: pair updates over random pairs involving an
  // active weight, then a full sweep of single updates.  Every update is
  // nondecreasing in the sum, and a finished single sweep leaves each weight
  // maximal given the others.
  Rng rng(kPolishSeed ^ n);
  dec.converged = false;
  for (std::size_t sweep = 0; sweep < max_sweeps && n > 0; ++sweep) {
    const double before = c.sum();
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < n; ++k) {
      if (c(idx(k)) > 0.0) active.push_back(k);
    }
    if (!active.empty() && n > 1) {
      std::uniform_int_distribution<std::size_t> pick_a(0, active.size() - 1), pick_b(0, n - 1);
      for (std::size_t p = 0; p < n; ++p) {
        const std::size_t a = active[pick_a(rng)];
        std::size_t b = pick_b(rng);
        if (b == a || fidelity(psi[a], psi[b]) > 1.0 - kDuplicateTol) continue;
        const ComplexMatrix pa = outer(psi[a], psi[a]), pb = outer(psi[b], psi[b]);
        const ComplexMatrix local = residual + c(idx(a)) * pa + c(idx(b)) * pb;
        const auto [wa, wb] = max_pair_raw(local, psi[a], psi[b]);
        if (wa + wb > c(idx(a)) + c(idx(b))) {
          residual = local - wa * pa - wb * pb;
          c(idx(a)) = wa;
          c(idx(b)) = wb;
        }
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double gain = max_lambda_raw(residual, psi[k]);
      if (gain > 0.0) {
        c(idx(k)) += gain;
        residual -= gain * outer(psi[k], psi[k]);
      }
    }
    dec.sweep_history.push_back(c.sum());
    if (c.sum() - before < 1e-9) {
      dec.converged = true;
      break;
    }
  }
  if (n == 0) dec.converged = true;
  reduce_support(psi, c);

  // Return negligible weights to the residual and rescale to the input trace.
  ComplexMatrix separable = ComplexMatrix::Zero(dim, dim);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = c(idx(k));
    if (w <= kPruneTol) continue;
    BsaTerm term;
    term.weight = w * trace;
    term.vector = v[k];
    term.candidate_index = k;
    dec.terms.push_back(std::move(term));
    separable += w * outer(psi[k], psi[k]);
    total += w;
  }
  std::sort(dec.terms.begin(), dec.terms.end(),
            [](const BsaTerm& x, const BsaTerm& y) { return x.weight > y.weight; });
  dec.lambda_total = total * trace;
  dec.separable_part = total > 0.0 ? ComplexMatrix(separable / total) : ComplexMatrix::Zero(dim, dim);
  dec.residual = rho - separable * trace;
  dec.residual_min_eigenvalue = spectrum(dec.residual).w(0);
  for (double& h : dec.sweep_history) h *= trace;
  return out;
}

ComplexVector random_unit(std::size_t n, Rng& rng) { return random_unit_vector(n, rng); }

// Moves a product vector toward range(rho) by alternating top-eigenvector
// steps on the range projector; returns the overlap reached.
double pull_into_range(const ComplexMatrix& proj, BipartiteShape shape, ProductVector& pv) {
  pv = extremal_product(proj, shape, pv.e, pv.f, true);
  const ComplexVector psi = pv.composite();
  return psi.dot(proj * psi).real();
}

std::vector<ProductVector> generate_candidates(const Spectrum& s, BipartiteShape shape,
                                               std::size_t count, Rng& rng,
                                               const std::vector<ProductVector>& existing) {
  std::vector<ProductVector> kept;
  if (s.rank == 0 || count == 0) return kept;
  const ComplexMatrix basis = range_basis(s);
  const ComplexMatrix proj = basis * basis.adjoint();
  const bool full = s.rank == s.w.size();
  const std::size_t max_attempts = 4 * count + 64;
  std::size_t since_new = 0;
  for (std::size_t attempt = 0; attempt < max_attempts && kept.size() < count; ++attempt) {
    ProductVector pv = ProductVector::make(random_unit(shape.d_a, rng), random_unit(shape.d_b, rng));
    ComplexVector psi = pv.composite();
    double overlap = full ? 1.0 : psi.dot(proj * psi).real();
    if (overlap < 1.0 - kRangeLeakTol) overlap = pull_into_range(proj, shape, pv);
    psi = pv.composite();
    if (overlap >= 1.0 - kRangeLeakTol && leak(s, psi) <= kRangeLeakTol &&
        !is_duplicate(kept, psi) && !is_duplicate(existing, psi)) {
      kept.push_back(std::move(pv));
      since_new = 0;
    } else if (++since_new > 256) {
      break;
    }
  }
  return kept;
}

BsaDecomposition trivial_decomposition(const ComplexMatrix& rho) {
  BsaDecomposition dec;
  const Index d = rho.rows();
  dec.separable_part = ComplexMatrix::Zero(d, d);
  dec.residual = rho;
  dec.residual_min_eigenvalue = spectrum(rho).w(0);
  dec.sweep_history = {0.0};
  return dec;
}

}  // namespace

ProductVector ProductVector::make(ComplexVector e, ComplexVector f) {
  const double ne = e.norm(), nf = f.norm();
  if (!(ne > 0.0) || !(nf > 0.0)) throw Error(ErrorKind::kZeroMatrix, "zero product factor");
  return {e / ne, f / nf};
}

double max_lambda(const ComplexMatrix& rho, const ComplexVector& psi, Tolerance tol) {
  require_state(rho, tol);
  if (psi.size() != rho.rows()) throw Error(ErrorKind::kShapeMismatch, "max_lambda: vector size");
  return max_lambda_raw(rho, normalized(psi));
}

std::pair<double, double> max_pair(const ComplexMatrix& rho, const ComplexVector& psi1,
                                   const ComplexVector& psi2, Tolerance tol) {
  require_state(rho, tol);
  if (psi1.size() != rho.rows() || psi2.size() != rho.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "max_pair: vector size");
  }
  const ComplexVector p1 = normalized(psi1), p2 = normalized(psi2);
  if (fidelity(p1, p2) > 1.0 - 1e-12) {
    throw Error(ErrorKind::kInvalidArgument, "max_pair needs two distinct projectors");
  }
  return max_pair_raw(rho, p1, p2);
}

std::vector<ProductVector> candidate_products(const ComplexMatrix& rho, BipartiteShape shape,
                                              std::size_t count, std::uint64_t seed) {
  require_state(rho, {});
  if (rho.rows() != idx(shape.dim())) {
    throw Error(ErrorKind::kShapeMismatch, "candidate_products: state size and shape differ");
  }
  Rng rng(seed);
  return generate_candidates(spectrum(rho), shape, count, rng, {});
}

BsaDecomposition osa_fixed_set(const ComplexMatrix& rho, const std::vector<ProductVector>& v,
                               Tolerance tol, std::size_t max_sweeps) {
  return solve_fixed_set(rho, v, tol, max_sweeps).dec;
}

BsaDecomposition bsa_state(const ComplexMatrix& rho, BipartiteShape shape, std::size_t budget,
                           std::uint64_t seed, const BsaOptions& options) {
  require_state(rho, {});
  if (rho.rows() != idx(shape.dim())) {
    throw Error(ErrorKind::kShapeMismatch, "bsa_state: state size and shape differ");
  }
  const double trace = rho.trace().real();
  if (std::abs(trace - 1.0) > 1e-8) {
    throw Error(ErrorKind::kNotAState, "bsa_state needs a unit-trace state, got trace " +
                                           std::to_string(trace));
  }
  const Spectrum s = spectrum(rho);

  // Pure states are decided by their Schmidt rank.
  if (s.rank == 1) {
    const ComplexVector top = s.v.col(s.w.size() - 1);
    const ComplexMatrix g = devectorize(top, shape.d_a, shape.d_b);
    const Eigen::MatrixXcd dense = g;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sigma = svd.singularValues();
    const bool product = sigma.size() < 2 || sigma(1) <= 1e-8 * sigma(0);
    if (!product) return trivial_decomposition(rho);
    ProductVector pv = ProductVector::make(svd.matrixU().col(0), svd.matrixV().col(0).conjugate());
    return osa_fixed_set(rho, {pv});
  }

  Rng rng(seed);
  std::vector<ProductVector> cands = generate_candidates(s, shape, budget, rng, {});
  FixedSetSolution best = solve_fixed_set(rho, cands, {}, options.max_sweeps);
  std::vector<double> history{best.dec.lambda_total};
  FixedSetSolution current = best;
  std::vector<ProductVector> current_set = cands;
  std::size_t rounds = 1;

  const ComplexMatrix null_proj = s.rank < s.w.size()
                                      ? ComplexMatrix(s.v.leftCols(s.w.size() - s.rank) *
                                                      s.v.leftCols(s.w.size() - s.rank).adjoint())
                                      : ComplexMatrix::Zero(rho.rows(), rho.cols());
  const ComplexMatrix range_proj = identity(shape.dim()) - null_proj;

  while (rounds < options.max_rounds) {
    // Column generation: a product vector with <psi|Z|psi> < 1 violates the
    // dual of the current fixed-set problem, so adding it can raise the sum.
    std::vector<ProductVector> used;
    for (const auto& t : current.dec.terms) {
      if (t.weight > kActiveTol) used.push_back(t.vector);
    }
    ComplexMatrix z = (current.dual + current.dual.adjoint()) * 0.5;
    const double penalty = 1e3 * std::max(1.0, max_abs(z));
    z += penalty * null_proj;

    std::vector<ProductVector> fresh;
    for (std::size_t start = 0; start < options.generation_starts; ++start) {
      ComplexVector e, f;
      if (!used.empty() && start % 2 == 1) {
        const ProductVector& base = used[(start / 2) % used.size()];
        e = base.e + 0.3 * random_unit(shape.d_a, rng);
        f = base.f + 0.3 * random_unit(shape.d_b, rng);
      } else {
        e = random_unit(shape.d_a, rng);
        f = random_unit(shape.d_b, rng);
      }
      ProductVector pv = extremal_product(z, shape, e, f, false);
      if (!null_proj.isZero(0.0)) {
        ComplexVector psi = pv.composite();
        if (psi.dot(range_proj * psi).real() < 1.0 - kRangeLeakTol) {
          pull_into_range(range_proj, shape, pv);
        }
      }
      const ComplexVector psi = pv.composite();
      if (leak(s, psi) > kRangeLeakTol) continue;
      if (psi.dot(z * psi).real() >= 1.0 - 1e-9) continue;
      if (is_duplicate(used, psi) || is_duplicate(fresh, psi)) continue;
      fresh.push_back(std::move(pv));
    }

    // Local re-seeding: perturb the heaviest terms at a few scales.
    std::vector<ProductVector> nearby;
    const std::size_t seeds = std::min<std::size_t>(used.size(), options.generation_starts);
    for (std::size_t k = 0; k < seeds; ++k) {
      for (double scale : {0.02, 0.1, 0.3}) {
        ProductVector pv = ProductVector::make(used[k].e + scale * random_unit(shape.d_a, rng),
                                               used[k].f + scale * random_unit(shape.d_b, rng));
        if (!null_proj.isZero(0.0)) pull_into_range(range_proj, shape, pv);
        const ComplexVector psi = pv.composite();
        if (leak(s, psi) > kRangeLeakTol) continue;
        nearby.push_back(std::move(pv));
      }
    }

    std::vector<ProductVector> next = used;
    next.insert(next.end(), fresh.begin(), fresh.end());
    for (auto& pv : nearby) {
      if (!is_duplicate(next, pv.composite())) next.push_back(std::move(pv));
    }
    std::vector<ProductVector> extra = generate_candidates(s, shape, budget / 5, rng, next);
    next.insert(next.end(), extra.begin(), extra.end());

    current = solve_fixed_set(rho, next, {}, options.max_sweeps);
    current_set = std::move(next);
    ++rounds;
    if (current.dec.lambda_total > best.dec.lambda_total) best = current;
    history.push_back(best.dec.lambda_total);

    if (fresh.empty()) break;
    const std::size_t k = options.stall_rounds;
    if (history.size() > k &&
        history.back() - history[history.size() - 1 - k] < options.stall_tol) {
      break;
    }
  }
  best.dec.rounds = rounds;
  return best.dec;
}

double single_maximality_gap(const ComplexMatrix& rho, const BsaDecomposition& dec,
                             const std::vector<ProductVector>& v) {
  std::vector<double> w(v.size(), 0.0);
  for (const auto& t : dec.terms) w.at(t.candidate_index) = t.weight;
  double worst = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const ComplexVector psi = normalized(v[k].composite());
    const ComplexMatrix rho_k = dec.residual + w[k] * outer(psi, psi);
    worst = std::max(worst, std::abs(max_lambda_raw(rho_k, psi) - w[k]));
  }
  (void)rho;
  return worst;
}

double pair_maximality_gap(const ComplexMatrix& rho, const BsaDecomposition& dec,
                           const std::vector<ProductVector>& v, std::size_t max_pairs,
                           std::uint64_t seed) {
  (void)rho;
  if (dec.terms.empty() || v.size() < 2) return 0.0;
  std::vector<double> w(v.size(), 0.0);
  for (const auto& t : dec.terms) w.at(t.candidate_index) = t.weight;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_t(0, dec.terms.size() - 1), pick_v(0, v.size() - 1);
  double worst = 0.0;
  for (std::size_t p = 0; p < max_pairs; ++p) {
    const std::size_t a = dec.terms[pick_t(rng)].candidate_index;
    const std::size_t b = pick_v(rng);
    const ComplexVector pa = normalized(v[a].composite()), pb = normalized(v[b].composite());
    if (a == b || fidelity(pa, pb) > 1.0 - kDuplicateTol) continue;
    const ComplexMatrix local = dec.residual + w[a] * outer(pa, pa) + w[b] * outer(pb, pb);
    const auto [wa, wb] = max_pair_raw(local, pa, pb);
    worst = std::max(worst, wa + wb - w[a] - w[b]);
  }
  return worst;
}

ComplexMatrix regroup_permutation(std::size_t n) {
  const ComplexMatrix eye = identity(n);
  return tensor(tensor(eye, swap_operator(n)), eye);
}

ComplexMatrix bipartite_choi(const KrausSet& kraus, std::size_t n, bool normalized_flag) {
  if (n == 0 || kraus.d_in != n * n || kraus.d_out != n * n) {
    throw Error(ErrorKind::kDimensionMismatch,
                "bipartite_choi needs Kraus operators on an n x n bipartite system");
  }
  const Index d = idx(n), d4 = idx(n * n * n * n);
  ComplexMatrix e = ComplexMatrix::Zero(d4, d4);
  ComplexVector w(d4);
  for (const auto& m : kraus.operators) {
    // w[(a_out + n a_in) + n^2 (b_out + n b_in)] = M[b_out n + a_out, b_in n + a_in]
    for (Index ao = 0; ao < d; ++ao)
      for (Index ai = 0; ai < d; ++ai)
        for (Index bo = 0; bo < d; ++bo)
          for (Index bi = 0; bi < d; ++bi)
            w((ao + d * ai) + d * d * (bo + d * bi)) = m(bo * d + ao, bi * d + ai);
    e += outer(w, w);
  }
  if (normalized_flag) e /= static_cast<double>(n * n);
  return e;
}

OperationBsa bsa_operation(const Channel& phi, std::size_t n, std::size_t budget,
                           std::uint64_t seed, const BsaOptions& options) {
  if (n == 0 || phi.d_in() != n * n || phi.d_out() != n * n) {
    throw Error(ErrorKind::kDimensionMismatch,
                "bsa_operation needs a map on a bipartite system of two n-dimensional parts");
  }
  const ValidationReport report = validate(phi);
  if (!report.completely_positive) {
    throw NotCompletelyPositiveError(report.min_choi_eigenvalue,
                                     "bsa_operation needs a completely positive map");
  }
  const ComplexMatrix& d = phi.choi().matrix;
  const double trace = d.trace().real();
  if (!(trace > 0.0)) throw Error(ErrorKind::kNotCompletelyPositive, "zero map");
  const ComplexMatrix perm = regroup_permutation(n);
  ComplexMatrix state = perm * d * perm / trace;
  state = (state + state.adjoint()) * 0.5;
  BsaDecomposition dec = bsa_state(state, {n * n, n * n}, budget, seed, options);

  std::vector<ComplexMatrix> product_kraus;
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> factors;
  ComplexMatrix d_bsa = ComplexMatrix::Zero(d.rows(), d.cols());
  for (const auto& t : dec.terms) {
    const double scale = std::sqrt(trace * t.weight);
    ComplexMatrix a = devectorize(t.vector.e * scale, n, n);
    ComplexMatrix b = devectorize(t.vector.f, n, n);
    ComplexMatrix k = tensor(a, b);
    const ComplexVector vk = vectorize(k);
    d_bsa += outer(vk, vk);
    product_kraus.push_back(std::move(k));
    factors.emplace_back(std::move(a), std::move(b));
  }
  std::vector<ComplexMatrix> kraus_ops = product_kraus;
  if (kraus_ops.empty()) kraus_ops.push_back(ComplexMatrix::Zero(idx(n * n), idx(n * n)));
  Channel bsa_part = Channel::from_kraus(KrausSet::make(std::move(kraus_ops)));
  Channel ent_part = Channel::from_choi({d - d_bsa, n * n, n * n});
  return OperationBsa{std::move(bsa_part), std::move(ent_part), dec.lambda_total, trace,
                      std::move(product_kraus), std::move(factors), std::move(dec)};
}

KrausSplit kraus_factor_split(const KrausSet& kraus, BipartiteShape shape, Tolerance tol) {
  KrausSplit split;
  for (const auto& m : kraus.operators) {
    if (max_abs(m) == 0.0) continue;
    const auto f = product_factorize(m, shape, tol);
    if (f) {
      split.product.push_back(m);
      split.factors.push_back(*f);
    } else {
      split.rest.push_back(m);
    }
  }
  return split;
}

bool kraus_split_consistent(const KrausSet& kraus, const KrausSplit& split, Tolerance tol) {
  const ChoiMatrix whole = liouville_to_choi(kraus_to_liouville(kraus));
  ComplexMatrix part = ComplexMatrix::Zero(whole.matrix.rows(), whole.matrix.cols());
  for (const auto& m : split.product) {
    const ComplexVector v = vectorize(m);
    part += outer(v, v);
  }
  const ComplexMatrix gap = whole.matrix - part;
  return spectrum(gap).w(0) >= -tol.atol * std::max(1.0, max_abs(whole.matrix));
}

SeparabilityResult is_separable_operation(const Channel& phi, std::size_t n, std::size_t budget,
                                          std::uint64_t seed, const BsaOptions& options) {
  OperationBsa op = bsa_operation(phi, n, budget, seed, options);
  const double whole = frobenius_norm(phi.choi().matrix);
  const double ent = frobenius_norm(op.ent_part.choi().matrix);
  SeparabilityVerdict verdict = SeparabilityVerdict::kInconclusive;
  if (ent <= 1e-6 * whole) {
    verdict = SeparabilityVerdict::kSeparable;
  } else {
    // A residual whose range is a single non-product ray has no product
    // vector in its range, so no separable part can be extracted from it.
    const Spectrum rs = spectrum(op.state.residual);
    if (rs.rank == 1) {
      const ComplexVector top = rs.v.col(rs.w.size() - 1);
      const ComplexMatrix g = devectorize(top, n * n, n * n);
      if (svd_rank(g, {1e-8, 1e-8}) > 1) verdict = SeparabilityVerdict::kEntangled;
    }
  }
  std::vector<ComplexMatrix> witness;
  if (verdict == SeparabilityVerdict::kSeparable) witness = op.product_kraus;
  return SeparabilityResult{verdict, std::move(witness), 1.0 - op.lambda,
                            whole > 0.0 ? ent / whole : 0.0, std::move(op)};
}

}  // namespace choiscope
