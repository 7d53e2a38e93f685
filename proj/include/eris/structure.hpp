// Copyright 2026 The eris-lab developers
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

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eris/eris.hpp"

namespace eris {

/// Real basis of the self-adjoint fixed points of L, orthonormal in the
/// averaged Hilbert-Schmidt inner product.
struct FixedSpaceBasis {
  std::vector<RandomField> basis;
  int dim_complex = 0;
};

struct DecompositionBlock {
  RandomField projection;        // minimal reducing projection Q_i
  RandomField stationary_state;  // rho_eq with range Q_i, trace 1 per omega
  int corner_dim = 1;
};

/// Recurrent/transient split plus the orthogonal family of minimal
/// reducing projections with their stationary states.
struct Decomposition {
  RandomField recurrent;
  RandomField transient;
  std::vector<DecompositionBlock> blocks;
  bool dynamically_ergodic = false;
  bool reliable = true;  // i.i.d. pathway per-term check (always true otherwise)
};

/// True iff L(P) stays in the corner P M_d P at every omega: the corner and
/// both cross blocks of L(P) against I-P vanish to tol.
inline bool is_reducing(const Eris& e, const RandomField& p, double tol = 1e-8) {
  require_field_over(e, p);
  RandomField y = step_L(e, p);
  for (int w = 0; w < p.size(); ++w) {
    Matrix q = Matrix::Identity(p.dim(), p.dim()) - p[w];
    if (op_norm(q * y[w] * q) > tol) return false;
    if (op_norm(q * y[w] * p[w]) > tol) return false;
    if (op_norm(p[w] * y[w] * q) > tol) return false;
  }
  return true;
}

/// Same corner test applied to the adjoint step L'.
inline bool is_reducing_dual(const Eris& e, const RandomField& p,
                             double tol = 1e-8) {
  require_field_over(e, p);
  RandomField y = step_L_dagger(e, p);
  for (int w = 0; w < p.size(); ++w) {
    Matrix q = Matrix::Identity(p.dim(), p.dim()) - p[w];
    if (op_norm(q * y[w] * q) > tol) return false;
    if (op_norm(q * y[w] * p[w]) > tol) return false;
    if (op_norm(p[w] * y[w] * q) > tol) return false;
  }
  return true;
}

namespace detail {

// Gram-Schmidt over the reals in the averaged HS inner product; keeps at
// most want vectors, drops candidates whose residual falls below drop_tol.
inline std::vector<RandomField> real_orthonormalize(
    std::vector<RandomField> candidates, int want, double drop_tol = 1e-7) {
  std::vector<RandomField> basis;
  for (RandomField& c : candidates) {
    if (static_cast<int>(basis.size()) == want) break;
    for (const RandomField& b : basis) {
      const double coef = mean_hs_inner(b, c).real();
      c = c - Complex(coef, 0.0) * b;
    }
    const double nrm = std::sqrt(std::abs(mean_hs_inner(c, c).real()));
    if (nrm > drop_tol) basis.push_back(Complex(1.0 / nrm, 0.0) * c);
  }
  return basis;
}

inline std::vector<RandomField> self_adjoint_basis_from_complex(
    const std::vector<RandomField>& complex_basis, int dim_complex) {
  std::vector<RandomField> candidates;
  for (const RandomField& x : complex_basis) {
    RandomField h = x, s = x;
    for (int w = 0; w < x.size(); ++w) {
      h[w] = 0.5 * (x[w] + x[w].adjoint());
      s[w] = Complex(0.0, -0.5) * (x[w] - x[w].adjoint()).eval();
    }
    candidates.push_back(std::move(h));
    candidates.push_back(std::move(s));
  }
  return real_orthonormalize(std::move(candidates), dim_complex);
}

// Null space of (T - I) by SVD: right singular vectors with singular value
// below fixpoint_tol * scale.
inline std::vector<Vector> fixed_null_space(const Matrix& t, double fixpoint_tol) {
  const Eigen::Index m = t.rows();
  Eigen::JacobiSVD<Matrix> svd(t - Matrix::Identity(m, m), Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 1.0);
  std::vector<Vector> out;
  for (Eigen::Index k = s.size() - 1; k >= 0; --k) {
    if (s(k) <= fixpoint_tol * scale)
      out.push_back(svd.matrixV().col(k));
    else
      break;
  }
  return out;
}

// Block-diagonal isometry whose columns span vec'd corner P M_d P per omega:
// slot w carries conj(B_w) (x) B_w for B_w an orthonormal basis of ran P_w.
struct CornerFrame {
  Matrix isometry;                 // (n d^2) x (sum r_w^2)
  std::vector<Eigen::Index> offsets;  // per-omega column offsets
};

inline CornerFrame corner_frame(const RandomField& p, const ToleranceProfile& tol) {
  const int n = p.size();
  const Eigen::Index d = p.dim();
  std::vector<Matrix> local(n);
  Eigen::Index cols = 0;
  std::vector<Eigen::Index> offsets(n + 1, 0);
  for (int w = 0; w < n; ++w) {
    Matrix b = projection_basis(p[w], tol);
    local[w] = Eigen::kroneckerProduct(b.conjugate(), b).eval();
    offsets[w] = cols;
    cols += local[w].cols();
  }
  offsets[n] = cols;
  CornerFrame frame;
  frame.isometry = Matrix::Zero(n * d * d, cols);
  for (int w = 0; w < n; ++w)
    frame.isometry.block(w * d * d, offsets[w], d * d, local[w].cols()) = local[w];
  frame.offsets = std::move(offsets);
  return frame;
}

}  // namespace detail

/// Fixed-point space of L: null(T_L - I) split into a self-adjoint real
/// basis (the fixed space is *-closed, so its real dimension equals the
/// complex one).
inline FixedSpaceBasis fixed_space(const Eris& e, const ToleranceProfile& tol = {}) {
  const int n = e.cycle_length();
  const Eigen::Index d = e.dim();
  std::vector<Vector> null_vecs =
      detail::fixed_null_space(block_transfer(e), tol.fixpoint_tol);
  FixedSpaceBasis out;
  out.dim_complex = static_cast<int>(null_vecs.size());
  std::vector<RandomField> complex_basis;
  for (const Vector& v : null_vecs)
    complex_basis.push_back(unvec_field(v, n, d));
  out.basis = detail::self_adjoint_basis_from_complex(complex_basis, out.dim_complex);
  return out;
}

/// Fixed points of L supported in the corner of a reducing projection field.
inline FixedSpaceBasis corner_fixed_space(const Eris& e, const RandomField& p,
                                          const ToleranceProfile& tol = {}) {
  const int n = e.cycle_length();
  const Eigen::Index d = e.dim();
  detail::CornerFrame frame = detail::corner_frame(p, tol);
  FixedSpaceBasis out;
  if (frame.isometry.cols() == 0) return out;
  Matrix compressed =
      frame.isometry.adjoint() * block_transfer(e) * frame.isometry;
  std::vector<Vector> null_vecs =
      detail::fixed_null_space(compressed, tol.fixpoint_tol);
  out.dim_complex = static_cast<int>(null_vecs.size());
  std::vector<RandomField> complex_basis;
  for (const Vector& v : null_vecs)
    complex_basis.push_back(unvec_field(frame.isometry * v, n, d));
  out.basis = detail::self_adjoint_basis_from_complex(complex_basis, out.dim_complex);
  return out;
}

/// P_r = proj[E(I)], the recurrent projection.
inline RandomField recurrent_projection(const Eris& e,
                                        const ToleranceProfile& tol = {}) {
  RandomField z = cesaro_exact(e, RandomField::identity(e.cycle_length(), e.dim()), tol);
  return range_projection_field(z, tol);
}

class PeelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double field_min_eigenvalue(const RandomField& x) {
  double m = std::numeric_limits<double>::infinity();
  for (const Matrix& v : x.values) m = std::min(m, min_eigenvalue(v));
  return m;
}

}  // namespace detail

/// Peeling: from a PSD fixed point Z and a non-parallel self-adjoint fixed
/// point X, produce the PSD fixed point Z + a* s X at the positivity
/// crossing a* = sup{a >= 0 : Z + a s X >= 0 fieldwise}. The result has
/// strictly smaller support than Z in at least one omega.
inline RandomField peel(const Eris& e, const RandomField& z, const RandomField& x_in,
                        const ToleranceProfile& tol = {}) {
  require_field_over(e, z);
  require_compatible(z, x_in);

  const double xnorm = std::sqrt(std::abs(mean_hs_inner(x_in, x_in).real()));
  if (xnorm < 1e-14) throw PeelError("peel: X is zero");
  RandomField x = Complex(1.0 / xnorm, 0.0) * x_in;

  // Reject X parallel to Z.
  const double znorm = std::sqrt(std::abs(mean_hs_inner(z, z).real()));
  const Complex overlap = mean_hs_inner(z, x);
  RandomField perp = x - Complex(overlap.real() / (znorm * znorm), 0.0) * z;
  if (std::sqrt(std::abs(mean_hs_inner(perp, perp).real())) < 1e-9)
    throw PeelError("peel: X is parallel to Z");

  // If X is itself signed with strictly smaller support, it already is the
  // peeled fixed point.
  const ToleranceProfile loose_rank = [&] {
    ToleranceProfile t = tol;
    t.rank_tol = 1e-7;
    return t;
  }();
  RandomField supp_z = range_projection_field(z, tol);
  for (double sign : {1.0, -1.0}) {
    RandomField sx = Complex(sign, 0.0) * x;
    if (detail::field_min_eigenvalue(sx) >= -tol.psd_tol) {
      RandomField supp_x = range_projection_field(sx, tol);
      if (field_rank(supp_x) < field_rank(supp_z)) {
        const double mt = mean_hs_inner(RandomField::identity(z.size(), z.dim()), sx).real();
        return Complex(1.0 / mt, 0.0) * sx;
      }
    }
  }

  const double feas_tol = tol.psd_tol;
  auto feasible = [&](double a, double sign) {
    RandomField cand = z + Complex(a * sign, 0.0) * x;
    return detail::field_min_eigenvalue(cand) >= -feas_tol;
  };
  auto critical_value = [&](double sign) -> std::optional<double> {
    double hi = 1.0;
    int doublings = 0;
    while (feasible(hi, sign)) {
      hi *= 2.0;
      if (++doublings > 60) return std::nullopt;  // effectively infinite
    }
    double lo = 0.0;
    while (hi - lo > 1e-12 * std::max(1.0, hi))
      (feasible(0.5 * (lo + hi), sign) ? lo : hi) = 0.5 * (lo + hi);
    return lo;
  };

  std::optional<double> a_plus = critical_value(+1.0);
  std::optional<double> a_minus = critical_value(-1.0);
  double sign;
  double a_star;
  if (a_plus) {
    sign = +1.0;
    a_star = *a_plus;
  } else if (a_minus) {
    sign = -1.0;
    a_star = *a_minus;
  } else {
    throw PeelError("peel: no finite positivity crossing in either direction");
  }
  if (a_star <= 0.0)
    throw PeelError("peel: Z is already at a positivity boundary");

  RandomField peeled = z + Complex(a_star * sign, 0.0) * x;
  // Eigenvalue crossings are only Lipschitz (Weyl bound), so the support at
  // the kink is extracted by the caller with loosened rank tolerance.
  if (field_rank(range_projection_field(peeled, loose_rank)) >=
      field_rank(supp_z)) {
    throw PeelError("peel: support did not shrink at the crossing");
  }
  return peeled;
}

/// Minimality test: the corner fixed space of P is one-dimensional and its
/// generator, after sign normalization, is PSD with range exactly P.
inline bool is_minimal(const Eris& e, const RandomField& p,
                       const ToleranceProfile& tol = {}) {
  if (!is_reducing(e, p, 1e-7))
    throw std::invalid_argument("is_minimal: P is not a reducing projection");
  FixedSpaceBasis corner = corner_fixed_space(e, p, tol);
  if (corner.dim_complex != 1 || corner.basis.size() != 1) return false;
  RandomField g = corner.basis.front();
  double mt = 0.0;
  for (const Matrix& m : g.values) mt += m.trace().real();
  if (mt < 0.0) g = Complex(-1.0, 0.0) * g;
  const double scale = std::max(max_op_norm(g), 1e-30);
  g = Complex(1.0 / scale, 0.0) * g;
  if (detail::field_min_eigenvalue(g) < -1e-8) return false;
  RandomField supp = range_projection_field(g, [&] {
    ToleranceProfile t = tol;
    t.rank_tol = 1e-7;
    return t;
  }());
  for (int w = 0; w < p.size(); ++w)
    if (op_norm(supp[w] - p[w]) > 1e-6) return false;
  return true;
}

/// rho_eq = E(Q) normalized to trace 1 per omega (the trace of a fixed
/// point is omega-constant).
inline RandomField stationary_state(const Eris& e, const RandomField& q,
                                    const ToleranceProfile& tol = {}) {
  RandomField rho = cesaro_exact(e, q, tol);
  for (Matrix& m : rho.values) {
    const double tr = m.trace().real();
    if (tr < 100 * tol.fixpoint_tol)
      throw std::runtime_error(
          "stationary_state: E(Q) nearly vanishes (tolerance failure)");
    m /= tr;
  }
  return rho;
}

namespace detail {

inline RandomField cesaro_apply(const Matrix& projector, const Eris& e,
                                const RandomField& x) {
  return unvec_field(projector * vec_field(x), x.size(), x.dim());
}

// One minimal reducing projection inside `start`, by support shrinking and
// peeling. Total rank strictly decreases at every pass.
inline RandomField find_minimal(const Eris& e, const Matrix& projector,
                                RandomField current, const ToleranceProfile& tol,
                                int* peel_budget) {
  const ToleranceProfile loose_rank = [&] {
    ToleranceProfile t = tol;
    t.rank_tol = 1e-7;
    return t;
  }();
  for (;;) {
    if (*peel_budget <= 0)
      throw std::runtime_error(
          "minimal_decomposition: iteration bound exceeded (tolerance failure)");
    RandomField z = cesaro_apply(projector, e, current);
    const double mt = mean_hs_inner(RandomField::identity(z.size(), z.dim()), z).real();
    if (mt < 100 * tol.fixpoint_tol)
      throw std::runtime_error("minimal_decomposition: E(Q) nearly vanishes");
    z = Complex(1.0 / mt, 0.0) * z;
    RandomField supp = range_projection_field(z, tol);
    if (field_rank(supp) < field_rank(current)) {
      --*peel_budget;
      current = std::move(supp);
      continue;
    }
    FixedSpaceBasis corner = corner_fixed_space(e, current, tol);
    if (corner.dim_complex <= 1) return current;
    // Peel along the basis element with the largest angle to Z.
    const RandomField* best = nullptr;
    double best_angle = -1.0;
    for (const RandomField& cand : corner.basis) {
      const double zn = std::sqrt(std::abs(mean_hs_inner(z, z).real()));
      const double ov = std::abs(mean_hs_inner(z, cand).real()) / zn;
      const double angle = 1.0 - std::min(1.0, ov);  // larger is better
      if (angle > best_angle) {
        best_angle = angle;
        best = &cand;
      }
    }
    RandomField peeled = peel(e, z, *best, tol);
    --*peel_budget;
    current = range_projection_field(peeled, loose_rank);
  }
}

inline bool block_order(const DecompositionBlock& a, const DecompositionBlock& b) {
  const Eigen::Index ra = projection_rank(a.projection[0]);
  const Eigen::Index rb = projection_rank(b.projection[0]);
  if (ra != rb) return ra < rb;
  for (int w = 0; w < a.projection.size(); ++w) {
    const Matrix& ma = a.projection[w];
    const Matrix& mb = b.projection[w];
    for (Eigen::Index i = 0; i < ma.rows(); ++i)
      for (Eigen::Index j = 0; j < ma.cols(); ++j) {
        if (ma(i, j).real() != mb(i, j).real())
          return ma(i, j).real() < mb(i, j).real();
        if (ma(i, j).imag() != mb(i, j).imag())
          return ma(i, j).imag() < mb(i, j).imag();
      }
  }
  return false;
}

}  // namespace detail

/// Decompose the recurrent projection into an orthogonal family of minimal
/// reducing projections, each carrying its unique stationary state.
inline Decomposition minimal_decomposition(const Eris& e,
                                           const ToleranceProfile& tol = {}) {
  const int n = e.cycle_length();
  const Eigen::Index d = e.dim();
  Matrix projector = cesaro_projector(e, tol);

  Decomposition out;
  RandomField identity = RandomField::identity(n, d);
  RandomField p_rec = range_projection_field(
      detail::cesaro_apply(projector, e, identity), tol);
  out.recurrent = p_rec;
  out.transient = identity - p_rec;

  int peel_budget = n * static_cast<int>(d) + 8;
  RandomField remainder = p_rec;
  while (field_rank(remainder) > 0) {
    RandomField q = detail::find_minimal(e, projector, remainder, tol, &peel_budget);
    DecompositionBlock block;
    block.projection = q;
    RandomField rho = detail::cesaro_apply(projector, e, q);
    for (Matrix& m : rho.values) {
      const double tr = m.trace().real();
      if (tr < 100 * tol.fixpoint_tol)
        throw std::runtime_error("minimal_decomposition: degenerate block state");
      m /= tr;
    }
    block.stationary_state = std::move(rho);
    block.corner_dim = 1;
    out.blocks.push_back(std::move(block));
    remainder = remainder - q;
    // Q <= remainder, so the difference is again a projection field.
    for (Matrix& m : remainder.values) m = 0.5 * (m + m.adjoint()).eval();
  }
  std::sort(out.blocks.begin(), out.blocks.end(), detail::block_order);
  out.dynamically_ergodic = out.blocks.size() == 1;
  return out;
}

/// Schaefer resolvent-style irreducibility test on the corner of P:
/// Z = sum_{k>=1} 2^{-k} L^k(X) must have range exactly P at every omega.
inline bool schaefer_test(const Eris& e, const RandomField& p, const RandomField& x,
                          const ToleranceProfile& tol = {}) {
  require_field_over(e, p);
  require_compatible(p, x);
  const double norm = std::max(max_trace_norm(x), 1e-30);
  const int terms =
      std::max(4, static_cast<int>(std::ceil(std::log2(norm / tol.fixpoint_tol))));
  RandomField z = RandomField::zero(x.size(), x.dim());
  RandomField iter = x;
  double weight = 1.0;
  for (int k = 1; k <= terms; ++k) {
    iter = step_L(e, iter);
    weight *= 0.5;
    z = z + Complex(weight, 0.0) * iter;
  }
  ToleranceProfile loose = tol;
  loose.rank_tol = 1e-6;
  RandomField supp = range_projection_field(z, loose);
  for (int w = 0; w < p.size(); ++w)
    if (op_norm(supp[w] - p[w]) > 1e-6) return false;
  return true;
}

/// Exact-backend time average of <Phi_N(theta), X o theta^N>, evaluated over
/// all start points. Partial Cesaro sums at M and M/2 are combined to cancel
/// the leading O(1/M) term of the summed transient.
inline double ergodic_average_observable(const Eris& e, const RandomField& theta_0,
                                         const RandomField& x, int steps,
                                         const ToleranceProfile& tol = {}) {
  require_field_over(e, theta_0);
  require_compatible(theta_0, x);
  (void)tol;
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  // mean_w <Phi_N(theta)_w, X_{theta^N w}> = mean_w <L^N(theta)_w, X_w>.
  RandomField iter = theta_0;
  double partial_half = 0.0;
  double partial_full = 0.0;
  const int half = steps / 2;
  double acc = 0.0;
  for (int n = 1; n <= steps; ++n) {
    iter = step_L(e, iter);
    acc += mean_hs_inner(iter, x).real();
    if (n == half) partial_half = acc / half;
  }
  partial_full = acc / steps;
  if (half < 1) return partial_full;
  return (steps * partial_full - half * partial_half) /
         static_cast<double>(steps - half);
}

/// Sampled-driver variant: plain trajectory Cesaro average of
/// <Phi_N(theta), X> for deterministic theta and X, averaged over replicas.
inline double ergodic_average_observable(const Eris& e, const Matrix& theta_0,
                                         const Matrix& x, int steps, int replicas,
                                         std::uint64_t seed) {
  MonteCarloResult mc = cesaro_monte_carlo(e, theta_0, steps, replicas, seed);
  return hs_inner(mc.mean, x).real();
}

/// Mean-channel pathway for i.i.d. processes with deterministic recurrent
/// projection: decompose the average channel as a deterministic (n = 1)
/// process and check the per-term reducibility identity on every block.
inline Decomposition iid_deterministic_decomposition(
    const std::vector<std::pair<KrausChannel, double>>& channels,
    const ToleranceProfile& tol = {}) {
  if (channels.empty()) throw std::invalid_argument("empty channel mixture");
  double wsum = 0.0;
  for (const auto& [ch, w] : channels) {
    if (w < 0.0) throw std::invalid_argument("negative mixture weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("mixture weights must sum to 1");

  const Eigen::Index d = channels.front().first.dim();
  std::vector<Matrix> mean_kraus;
  for (const auto& [ch, w] : channels) {
    if (ch.dim() != d) throw DimensionMismatch("mixture dimension mismatch");
    if (w == 0.0) continue;
    for (const Matrix& v : ch.kraus()) mean_kraus.push_back(std::sqrt(w) * v);
  }
  Eris mean_process(FiniteCycleDriver(1), {KrausChannel(std::move(mean_kraus))});
  Decomposition out = minimal_decomposition(mean_process, tol);

  // Positivity makes the weighted-sum reducibility test equivalent to the
  // per-term one; assert the per-term identity on every returned block.
  for (const DecompositionBlock& block : out.blocks) {
    const Matrix& q = block.projection[0];
    const Matrix comp = Matrix::Identity(d, d) - q;
    for (const auto& [ch, w] : channels) {
      if (w == 0.0) continue;
      Matrix y = ch.apply(q);
      if (op_norm(comp * y * comp) > 1e-8 || op_norm(comp * y * q) > 1e-8 ||
          op_norm(q * y * comp) > 1e-8) {
        out.reliable = false;
      }
    }
  }
  return out;
}

}  // namespace eris
