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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "eris/matcore.hpp"
#include "eris/rng.hpp"

namespace eris {

// Column-stacking vectorization. This convention is fixed globally:
// vec(X)_{i + d*j} = X_{ij}, and the transfer matrix of X -> V X W is
// W^T (x) V. All superoperator matrices in this library use it.
inline Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index d) {
  if (v.size() != d * d) throw DimensionMismatch("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

/// A CPTP map in Kraus form, X -> sum_a V_a X V_a*.
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<Matrix> kraus_ops)
      : kraus_(std::move(kraus_ops)) {
    if (kraus_.empty()) throw std::invalid_argument("empty Kraus family");
    dim_ = kraus_.front().rows();
    for (const Matrix& v : kraus_) {
      require_square(v);
      if (v.rows() != dim_)
        throw DimensionMismatch("Kraus operators of unequal dimension");
    }
  }

  static KrausChannel identity(Eigen::Index d) {
    return KrausChannel({Matrix::Identity(d, d)});
  }

  Eigen::Index dim() const { return dim_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  Matrix apply(const Matrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_)
      throw DimensionMismatch("apply: state dimension mismatch");
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const Matrix& v : kraus_) out += v * x * v.adjoint();
    return out;
  }

  // Heisenberg-picture dual, X -> sum_a V_a* X V_a. Unital.
  Matrix dual_apply(const Matrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_)
      throw DimensionMismatch("dual_apply: dimension mismatch");
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const Matrix& v : kraus_) out += v.adjoint() * x * v;
    return out;
  }

  KrausChannel dual() const {
    std::vector<Matrix> ops;
    ops.reserve(kraus_.size());
    for (const Matrix& v : kraus_) ops.push_back(v.adjoint());
    return KrausChannel(std::move(ops));
  }

  /// Matrix T with T vec(X) = vec(apply(X)): sum_a conj(V_a) (x) V_a.
  Matrix transfer_matrix() const {
    Matrix t = Matrix::Zero(dim_ * dim_, dim_ * dim_);
    for (const Matrix& v : kraus_)
      t += Eigen::kroneckerProduct(v.conjugate(), v).eval();
    return t;
  }

  Matrix dual_transfer_matrix() const { return dual().transfer_matrix(); }

  /// Choi matrix sum_a vec(V_a) vec(V_a)*; PSD iff the map is CP.
  Matrix choi_matrix() const {
    Matrix c = Matrix::Zero(dim_ * dim_, dim_ * dim_);
    for (const Matrix& v : kraus_) {
      Vector w = vec(v);
      c += w * w.adjoint();
    }
    return c;
  }

 private:
  Eigen::Index dim_;
  std::vector<Matrix> kraus_;
};

/// A structurally well-formed input whose channel data fails CPTP
/// validation; mapped to its own exit code by the CLI.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ValidationReport {
  double trace_preservation_residual = 0.0;  // ||sum V*V - I||_inf
  double choi_min_eigenvalue = 0.0;
  bool trace_preserving = false;
  bool completely_positive = false;
  bool passed() const { return trace_preserving && completely_positive; }
};

inline ValidationReport validate(const KrausChannel& ch,
                                 const ToleranceProfile& tol = {}) {
  ValidationReport rep;
  const Eigen::Index d = ch.dim();
  Matrix s = Matrix::Zero(d, d);
  for (const Matrix& v : ch.kraus()) s += v.adjoint() * v;
  rep.trace_preservation_residual = op_norm(s - Matrix::Identity(d, d));
  rep.trace_preserving = rep.trace_preservation_residual <= 1e-9;
  rep.choi_min_eigenvalue = min_eigenvalue(ch.choi_matrix());
  // Choi entries aggregate d^2 products, so the PSD tolerance scales with d.
  rep.completely_positive =
      rep.choi_min_eigenvalue >= -tol.psd_tol * static_cast<double>(d);
  return rep;
}

/// Kraus family {W_b V_a} of later . earlier, with near-zero operators
/// dropped (||.||_inf < 1e-12) and no other compression.
inline KrausChannel compose(const KrausChannel& later,
                            const KrausChannel& earlier) {
  if (later.dim() != earlier.dim())
    throw DimensionMismatch("compose: dimension mismatch");
  std::vector<Matrix> ops;
  ops.reserve(later.kraus().size() * earlier.kraus().size());
  for (const Matrix& w : later.kraus())
    for (const Matrix& v : earlier.kraus()) {
      Matrix u = w * v;
      if (op_norm(u) >= 1e-12) ops.push_back(std::move(u));
    }
  if (ops.empty()) ops.push_back(Matrix::Zero(later.dim(), later.dim()));
  return KrausChannel(std::move(ops));
}

/// Choi matrix of the map with transfer matrix T (index reshuffle).
inline Matrix choi_from_transfer(const Matrix& t, Eigen::Index d) {
  Matrix c(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l)
          c(i + d * j, k + d * l) = t(i + d * k, j + d * l);
  return c;
}

/// Recover a Kraus family (at most d^2 operators) from a transfer matrix by
/// eigendecomposing the Choi matrix. Keeps eigenvalues above cut.
inline KrausChannel kraus_from_transfer(const Matrix& t, Eigen::Index d,
                                        double cut = 1e-12) {
  Matrix c = choi_from_transfer(t, d);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(c));
  std::vector<Matrix> ops;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lam = es.eigenvalues()(k);
    if (lam > cut)
      ops.push_back(unvec(std::sqrt(lam) * es.eigenvectors().col(k), d));
  }
  if (ops.empty()) ops.push_back(Matrix::Zero(d, d));
  return KrausChannel(std::move(ops));
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phase correction.
inline Matrix haar_unitary(Eigen::Index d, RngStream& rng) {
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      g(i, j) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    Complex rjj = r(j, j);
    double mag = std::abs(rjj);
    q.col(j) *= (mag > 0) ? rjj / mag : Complex(1, 0);
  }
  return q;
}

/// Random CPTP channel: orthonormalize a (k d) x d Gaussian block column
/// into an isometry and slice it into k Kraus operators.
inline KrausChannel random_kraus_channel(Eigen::Index d, int kraus_count,
                                         RngStream& rng) {
  if (kraus_count < 1) throw std::invalid_argument("kraus_count must be >= 1");
  Matrix g(static_cast<Eigen::Index>(kraus_count) * d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      g(i, j) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix iso = Matrix(qr.householderQ()).leftCols(d);
  std::vector<Matrix> ops;
  ops.reserve(kraus_count);
  for (int a = 0; a < kraus_count; ++a)
    ops.push_back(iso.middleRows(static_cast<Eigen::Index>(a) * d, d));
  return KrausChannel(std::move(ops));
}

enum class ChannelKind {
  unitary,
  depolarizing,
  amplitude_flip,
  amplitude_damping,
  explicit_kraus,
  haar_random_unitary,
  random_kraus,
};

/// Declarative channel description; see build().
struct ChannelSpec {
  ChannelKind kind = ChannelKind::unitary;
  Eigen::Index dim = 2;
  double p = 0.0;                       // depolarizing / damping strength
  std::optional<Matrix> unitary;        // kind == unitary
  std::vector<Matrix> kraus;            // kind == explicit_kraus
  int kraus_count = 2;                  // kind == random_kraus
  std::uint64_t seed = 0;               // sampled kinds

  static ChannelSpec depolarizing_spec(Eigen::Index d, double p) {
    ChannelSpec s;
    s.kind = ChannelKind::depolarizing;
    s.dim = d;
    s.p = p;
    return s;
  }
  static ChannelSpec unitary_spec(Matrix u) {
    ChannelSpec s;
    s.kind = ChannelKind::unitary;
    s.dim = u.rows();
    s.unitary = std::move(u);
    return s;
  }
};

namespace detail {

// Heisenberg-Weyl shift/clock unitaries; the uniform average of
// W X W* over all d^2 of them is tr(X) I / d.
inline std::vector<Matrix> weyl_unitaries(Eigen::Index d) {
  Matrix shift = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) shift((i + 1) % d, i) = 1.0;
  Matrix clock = Matrix::Zero(d, d);
  const double w = 6.283185307179586476925286766559 / static_cast<double>(d);
  for (Eigen::Index i = 0; i < d; ++i)
    clock(i, i) = std::polar(1.0, w * static_cast<double>(i));
  std::vector<Matrix> out;
  out.reserve(d * d);
  Matrix xj = Matrix::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Matrix m = xj;
    for (Eigen::Index k = 0; k < d; ++k) {
      out.push_back(m);
      m = m * clock;
    }
    xj = shift * xj;
  }
  return out;
}

}  // namespace detail

/// rho -> (1-p) rho + p tr(rho) I/d, in Weyl-twirl Kraus form.
inline KrausChannel depolarizing_channel(Eigen::Index d, double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("depolarizing: p must lie in [0,1]");
  std::vector<Matrix> ops;
  if (p < 1.0)
    ops.push_back(std::sqrt(1.0 - p) * Matrix::Identity(d, d));
  if (p > 0.0) {
    const double c = std::sqrt(p) / static_cast<double>(d);
    for (Matrix& w : detail::weyl_unitaries(d)) ops.push_back(c * w);
  }
  return KrausChannel(std::move(ops));
}

/// Kraus {|0><1|, |1><0|}: swaps the two basis states and kills coherences.
inline KrausChannel amplitude_flip_channel() {
  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  a(0, 1) = 1.0;
  b(1, 0) = 1.0;
  return KrausChannel({a, b});
}

inline KrausChannel amplitude_damping_channel(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("amplitude_damping: p must lie in [0,1]");
  Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - p);
  k1(0, 1) = std::sqrt(p);
  return KrausChannel({k0, k1});
}

inline KrausChannel unitary_channel(const Matrix& u) {
  require_square(u);
  const Eigen::Index d = u.rows();
  if (op_norm(u * u.adjoint() - Matrix::Identity(d, d)) > 1e-9)
    throw std::invalid_argument("unitary_channel: matrix is not unitary");
  return KrausChannel({u});
}

inline KrausChannel build(const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelKind::unitary:
      if (!spec.unitary) throw std::invalid_argument("unitary matrix missing");
      return unitary_channel(*spec.unitary);
    case ChannelKind::depolarizing:
      return depolarizing_channel(spec.dim, spec.p);
    case ChannelKind::amplitude_flip:
      return amplitude_flip_channel();
    case ChannelKind::amplitude_damping:
      return amplitude_damping_channel(spec.p);
    case ChannelKind::explicit_kraus:
      return KrausChannel(spec.kraus);
    case ChannelKind::haar_random_unitary: {
      RngStream rng(spec.seed, 0);
      return unitary_channel(haar_unitary(spec.dim, rng));
    }
    case ChannelKind::random_kraus: {
      RngStream rng(spec.seed, 0);
      return random_kraus_channel(spec.dim, spec.kraus_count, rng);
    }
  }
  throw std::invalid_argument("unknown channel kind");
}

}  // namespace eris
