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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace eris {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Numerical thresholds used by the spectral primitives. All decisions that
/// turn floating point data into discrete structure (ranks, positivity,
/// fixed spaces) go through one of these.
struct ToleranceProfile {
  double eig_tol = 1e-9;       // eigenvalue-cluster threshold
  double rank_tol = 1e-9;      // relative singular-value cutoff
  double psd_tol = 1e-10;      // allowed negative-eigenvalue magnitude
  double fixpoint_tol = 1e-9;  // |lambda - 1| threshold for the fixed space

  // rank_tol is relative to sigma_max with this absolute floor, so the
  // range projection of the zero matrix is deterministically zero.
  static constexpr double kRankFloor = 1e-12;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_square(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("matrix must be square with dim >= 1");
}

inline void require_same_dim(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("matrix dimensions do not match");
}

/// Hilbert-Schmidt inner product tr(A* B); conjugate-linear in A.
inline Complex hs_inner(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b);
  return (a.adjoint() * b).trace();
}

inline Eigen::VectorXd singular_values(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues();
}

/// Operator norm (largest singular value).
inline double op_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::VectorXd s = singular_values(a);
  return s.size() ? s(0) : 0.0;
}

/// Schatten p-norm of the singular values; p = infinity() gives the
/// operator norm, p = 1 the trace norm, p = 2 the Frobenius norm.
inline double schatten_norm(const Matrix& a, double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument("schatten_norm requires p >= 1");
  Eigen::VectorXd s = singular_values(a);
  if (std::isinf(p)) return s.size() ? s(0) : 0.0;
  if (p == 1.0) return s.sum();
  if (p == 2.0) return s.norm();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) acc += std::pow(s(k), p);
  return std::pow(acc, 1.0 / p);
}

inline double trace_norm(const Matrix& a) { return schatten_norm(a, 1.0); }

inline Matrix hermitian_part(const Matrix& a) {
  return 0.5 * (a + a.adjoint());
}

/// Eigenvalues of a self-adjoint matrix, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& a) {
  return hermitian_eigenvalues(hermitian_part(a)).minCoeff();
}

/// True iff A is self-adjoint to psd_tol and its Hermitian part has no
/// eigenvalue below -psd_tol.
inline bool is_psd(const Matrix& a, const ToleranceProfile& tol = {}) {
  require_square(a);
  if (op_norm(a - a.adjoint()) > tol.psd_tol) return false;
  return min_eigenvalue(a) >= -tol.psd_tol;
}

/// Orthogonal projection onto ran(A): span of the left singular vectors
/// whose singular value exceeds max(rank_tol * sigma_max, 1e-12).
inline Matrix range_projection(const Matrix& a,
                               const ToleranceProfile& tol = {}) {
  require_square(a);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cut =
      std::max(tol.rank_tol * (s.size() ? s(0) : 0.0), ToleranceProfile::kRankFloor);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  if (r == 0) return Matrix::Zero(a.rows(), a.cols());
  Matrix u = svd.matrixU().leftCols(r);
  return u * u.adjoint();
}

inline Eigen::Index projection_rank(const Matrix& p) {
  return static_cast<Eigen::Index>(std::llround(p.trace().real()));
}

inline bool is_projection(const Matrix& p, double tol = 1e-10) {
  return op_norm(p - p.adjoint()) <= tol && op_norm(p * p - p) <= tol;
}

/// Orthonormal basis of ran(P) for an orthogonal projection P of rank l,
/// returned as the d x l matrix of basis columns.
inline Matrix projection_basis(const Matrix& p, const ToleranceProfile& tol = {}) {
  require_square(p);
  if (!is_projection(p, 100 * tol.eig_tol))
    throw std::invalid_argument("not an orthogonal projection");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(p));
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  Eigen::Index l = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev(k) > 0.5) ++l;
  return es.eigenvectors().rightCols(l);
}

/// Spectrum of the compression PAP viewed inside the corner P M_d P,
/// descending. Exactly rank(P) values.
inline std::vector<double> corner_spectrum(const Matrix& a, const Matrix& p,
                                           const ToleranceProfile& tol = {}) {
  require_same_dim(a, p);
  if (op_norm(a - a.adjoint()) > 100 * tol.eig_tol)
    throw std::invalid_argument("corner_spectrum: matrix not self-adjoint");
  Matrix basis = projection_basis(p, tol);
  if (basis.cols() == 0)
    throw std::invalid_argument("corner_spectrum: projection has rank 0");
  Matrix compressed = basis.adjoint() * a * basis;
  Eigen::VectorXd ev = hermitian_eigenvalues(hermitian_part(compressed));
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::reverse(out.begin(), out.end());
  return out;
}

inline double corner_min_eigenvalue(const Matrix& a, const Matrix& p,
                                    const ToleranceProfile& tol = {}) {
  return corner_spectrum(a, p, tol).back();
}

inline double corner_max_eigenvalue(const Matrix& a, const Matrix& p,
                                    const ToleranceProfile& tol = {}) {
  return corner_spectrum(a, p, tol).front();
}

}  // namespace eris
