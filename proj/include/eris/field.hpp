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

#include <stdexcept>
#include <vector>

#include "eris/matcore.hpp"

namespace eris {

/// An assignment w -> X_w of d x d matrices over a finite cycle of length n.
struct RandomField {
  std::vector<Matrix> values;  // values[w] = X_w

  RandomField() = default;
  explicit RandomField(std::vector<Matrix> v) : values(std::move(v)) {
    if (values.empty()) throw std::invalid_argument("empty field");
    const Eigen::Index d = values.front().rows();
    for (const Matrix& m : values) {
      require_square(m);
      if (m.rows() != d) throw DimensionMismatch("field entries of unequal dim");
    }
  }

  static RandomField constant(int n, const Matrix& m) {
    return RandomField(std::vector<Matrix>(n, m));
  }
  static RandomField identity(int n, Eigen::Index d) {
    return constant(n, Matrix::Identity(d, d));
  }
  static RandomField zero(int n, Eigen::Index d) {
    return constant(n, Matrix::Zero(d, d));
  }

  int size() const { return static_cast<int>(values.size()); }
  Eigen::Index dim() const { return values.front().rows(); }

  Matrix& operator[](int w) { return values[w]; }
  const Matrix& operator[](int w) const { return values[w]; }
};

inline void require_compatible(const RandomField& a, const RandomField& b) {
  if (a.size() != b.size() || a.dim() != b.dim())
    throw DimensionMismatch("fields over different spaces");
}

inline RandomField operator+(const RandomField& a, const RandomField& b) {
  require_compatible(a, b);
  RandomField out = a;
  for (int w = 0; w < a.size(); ++w) out[w] += b[w];
  return out;
}

inline RandomField operator-(const RandomField& a, const RandomField& b) {
  require_compatible(a, b);
  RandomField out = a;
  for (int w = 0; w < a.size(); ++w) out[w] -= b[w];
  return out;
}

inline RandomField operator*(Complex c, const RandomField& a) {
  RandomField out = a;
  for (Matrix& m : out.values) m *= c;
  return out;
}

/// (shift_field X)_w = X_{(w+k) mod n}: Koopman composition with theta^k.
inline RandomField shift_field(const RandomField& x, int k) {
  const int n = x.size();
  RandomField out = x;
  for (int w = 0; w < n; ++w)
    out[w] = x[(((w + k) % n) + n) % n];
  return out;
}

/// Uniform average of the Hilbert-Schmidt inner products over omega.
inline Complex mean_hs_inner(const RandomField& a, const RandomField& b) {
  require_compatible(a, b);
  Complex acc = 0.0;
  for (int w = 0; w < a.size(); ++w) acc += hs_inner(a[w], b[w]);
  return acc / static_cast<double>(a.size());
}

inline double max_op_norm(const RandomField& a) {
  double m = 0.0;
  for (const Matrix& x : a.values) m = std::max(m, op_norm(x));
  return m;
}

inline double max_trace_norm(const RandomField& a) {
  double m = 0.0;
  for (const Matrix& x : a.values) m = std::max(m, trace_norm(x));
  return m;
}

inline RandomField adjoint(const RandomField& a) {
  RandomField out = a;
  for (Matrix& m : out.values) m = m.adjoint().eval();
  return out;
}

inline bool is_psd_field(const RandomField& a, const ToleranceProfile& tol = {}) {
  for (const Matrix& m : a.values)
    if (!is_psd(m, tol)) return false;
  return true;
}

inline bool is_projection_field(const RandomField& p, double tol = 1e-10) {
  for (const Matrix& m : p.values)
    if (!is_projection(m, tol)) return false;
  return true;
}

/// Total rank sum_w rank(P_w) of a projection field.
inline Eigen::Index field_rank(const RandomField& p) {
  Eigen::Index r = 0;
  for (const Matrix& m : p.values) r += projection_rank(m);
  return r;
}

/// P <= Q entrywise, i.e. Q P = P to tolerance.
inline bool field_leq(const RandomField& p, const RandomField& q, double tol = 1e-8) {
  require_compatible(p, q);
  for (int w = 0; w < p.size(); ++w)
    if (op_norm(q[w] * p[w] - p[w]) > tol) return false;
  return true;
}

inline RandomField range_projection_field(const RandomField& a,
                                          const ToleranceProfile& tol = {}) {
  RandomField out = a;
  for (Matrix& m : out.values) m = range_projection(m, tol);
  return out;
}

}  // namespace eris
