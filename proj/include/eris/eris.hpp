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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eris/channel.hpp"
#include "eris/driver.hpp"
#include "eris/field.hpp"

namespace eris {

/// Channel family that is resampled independently at every time step of a
/// Monte-Carlo trajectory (continuous-alphabet i.i.d. processes such as the
/// Haar unitary process). Only sampled kinds are allowed.
struct FreshChannelFamily {
  ChannelKind kind = ChannelKind::haar_random_unitary;
  Eigen::Index dim = 2;
  int kraus_count = 2;  // kind == random_kraus
};

/// A driver plus a channel assignment w -> phi_w: the process object.
class Eris {
 public:
  Eris(Driver driver, std::vector<KrausChannel> table)
      : driver_(std::move(driver)), table_(std::move(table)) {
    if (table_.empty()) throw std::invalid_argument("empty channel table");
    if (static_cast<int>(table_.size()) != alphabet_size(driver_))
      throw std::invalid_argument("channel table does not match driver alphabet");
    dim_ = table_.front().dim();
    for (const KrausChannel& ch : table_) {
      if (ch.dim() != dim_)
        throw DimensionMismatch("channels of unequal dimension");
      if (!validate(ch).passed())
        throw ValidationError("channel assignment is not CPTP");
    }
  }

  /// Continuous-alphabet i.i.d. process; exact-backend operations reject it.
  Eris(IIDDriver driver, FreshChannelFamily family)
      : driver_(std::move(driver)), fresh_(family), dim_(family.dim) {
    if (family.kind != ChannelKind::haar_random_unitary &&
        family.kind != ChannelKind::random_kraus)
      throw std::invalid_argument("fresh family must be a sampled channel kind");
  }

  const Driver& driver() const { return driver_; }
  Eigen::Index dim() const { return dim_; }
  int cycle_length() const {
    const auto* cyc = std::get_if<FiniteCycleDriver>(&driver_);
    if (!cyc)
      throw std::invalid_argument("operation requires the exact cycle backend");
    return cyc->n;
  }
  bool exact() const { return is_exact(driver_) && !fresh_; }
  bool has_fresh_family() const { return fresh_.has_value(); }
  const FreshChannelFamily& fresh_family() const { return *fresh_; }

  const KrausChannel& channel(int symbol) const {
    if (fresh_) throw std::invalid_argument("process has no finite channel table");
    if (symbol < 0 || symbol >= static_cast<int>(table_.size()))
      throw std::out_of_range("unknown driver symbol");
    return table_[symbol];
  }
  const std::vector<KrausChannel>& table() const { return table_; }

  std::uint64_t base_seed() const {
    if (const auto* iid = std::get_if<IIDDriver>(&driver_)) return iid->seed;
    if (const auto* mkv = std::get_if<MarkovDriver>(&driver_)) return mkv->seed;
    return 0;
  }

 private:
  Driver driver_;
  std::vector<KrausChannel> table_;
  std::optional<FreshChannelFamily> fresh_;
  Eigen::Index dim_ = 0;
};

/// Composition phi_{w_N} o ... o phi_{w_1} along a trajectory, recovered in
/// Kraus form (at most d^2 operators) from the transfer-matrix product.
inline KrausChannel forward_compose(const Eris& e, const Trajectory& traj) {
  if (traj.symbols.empty()) throw std::invalid_argument("empty trajectory");
  const Eigen::Index d = e.dim();
  if (traj.symbols.size() == 1) return e.channel(traj.symbols[0]);
  Matrix t = Matrix::Identity(d * d, d * d);
  for (int sym : traj.symbols) t = e.channel(sym).transfer_matrix() * t;
  return kraus_from_transfer(t, d);
}

inline void require_field_over(const Eris& e, const RandomField& x) {
  if (x.size() != e.cycle_length() || x.dim() != e.dim())
    throw DimensionMismatch("field does not match the process");
}

/// One-step transfer (L X)_w = phi_w(X_{w-1}).
inline RandomField step_L(const Eris& e, const RandomField& x) {
  require_field_over(e, x);
  const int n = x.size();
  RandomField out = x;
  for (int w = 0; w < n; ++w)
    out[w] = e.channel(w).apply(x[(w - 1 + n) % n]);
  return out;
}

/// Adjoint step (L' X)_w = phi*_{w+1}(X_{w+1}). Unital.
inline RandomField step_L_dagger(const Eris& e, const RandomField& x) {
  require_field_over(e, x);
  const int n = x.size();
  RandomField out = x;
  for (int w = 0; w < n; ++w)
    out[w] = e.channel((w + 1) % n).dual_apply(x[(w + 1) % n]);
  return out;
}

/// Recurrent-corner adjoint step: the adjoint step compressed by P_r.
inline RandomField step_L_rec_dagger(const Eris& e, const RandomField& p_rec,
                                     const RandomField& x) {
  require_field_over(e, p_rec);
  if (!is_projection_field(p_rec))
    throw std::invalid_argument("P_rec must be a projection field");
  RandomField out = step_L_dagger(e, x);
  for (int w = 0; w < out.size(); ++w)
    out[w] = p_rec[w] * out[w] * p_rec[w];
  return out;
}

/// Matrix form of L on the direct sum over omega of M_d, with blocks
/// (T_L)_{w, w-1} = transfer_matrix(phi_w) under column stacking.
inline Matrix block_transfer(const Eris& e) {
  const int n = e.cycle_length();
  const Eigen::Index b = e.dim() * e.dim();
  Matrix t = Matrix::Zero(n * b, n * b);
  for (int w = 0; w < n; ++w)
    t.block(w * b, ((w - 1 + n) % n) * b, b, b) =
        e.channel(w).transfer_matrix();
  return t;
}

/// Matrix form of the adjoint step L'.
inline Matrix block_dual_transfer(const Eris& e) {
  const int n = e.cycle_length();
  const Eigen::Index b = e.dim() * e.dim();
  Matrix t = Matrix::Zero(n * b, n * b);
  for (int w = 0; w < n; ++w)
    t.block(w * b, ((w + 1) % n) * b, b, b) =
        e.channel((w + 1) % n).dual_transfer_matrix();
  return t;
}

inline Vector vec_field(const RandomField& x) {
  const Eigen::Index b = x.dim() * x.dim();
  Vector v(x.size() * b);
  for (int w = 0; w < x.size(); ++w) v.segment(w * b, b) = vec(x[w]);
  return v;
}

inline RandomField unvec_field(const Vector& v, int n, Eigen::Index d) {
  const Eigen::Index b = d * d;
  if (v.size() != n * b) throw DimensionMismatch("unvec_field: size mismatch");
  std::vector<Matrix> vals(n);
  for (int w = 0; w < n; ++w) vals[w] = unvec(v.segment(w * b, b), d);
  return RandomField(std::move(vals));
}

/// Cap on Cesaro terms, expressed as the number of average-doublings
/// (N = 2^doublings). Settable from the CLI via --max-iters.
inline int& cesaro_max_doublings() {
  static int v = 80;
  return v;
}

/// Running Cesaro average A_N = (1/N) sum_{k<N} T^k by doubling,
/// A_{2N} = (A_N + T^N A_N)/2. Repeated squaring amplifies the rounding
/// drift of the eigenvalue 1 ((1 + eps)^(2^k) blows up), so the achievable
/// accuracy floors out near sqrt(machine epsilon); this routine serves as a
/// moderate-accuracy averaging crosscheck, not as the exact-backend limit.
inline Matrix cesaro_projector_of(const Matrix& t, double fixpoint_tol,
                                  int max_doublings = cesaro_max_doublings()) {
  Matrix avg = Matrix::Identity(t.rows(), t.cols());
  Matrix pw = t;
  double best_delta = std::numeric_limits<double>::infinity();
  Matrix best = avg;
  for (int k = 0; k < max_doublings; ++k) {
    Matrix next = 0.5 * (avg + pw * avg);
    const double delta = (next - avg).cwiseAbs().maxCoeff();
    avg = std::move(next);
    if (delta < fixpoint_tol) return avg;
    if (delta < best_delta) {
      best_delta = delta;
      best = avg;
    } else if (delta > 100 * best_delta) {
      break;  // squaring noise has taken over; the best iterate is final
    }
    pw = pw * pw;
  }
  if (best_delta < std::sqrt(fixpoint_tol)) return best;
  throw std::runtime_error("cesaro projector: iteration cap exceeded");
}

/// Cesaro projector of the block transfer operator: for a power-bounded T
/// with semisimple peripheral spectrum the Cesaro limit of the averages
/// equals the spectral projector onto ker(T - I) along ran(T - I),
/// K (W* K)^{-1} W*, with K and W the right/left singular null spaces of
/// T - I. One SVD gives both to machine precision.
inline Matrix cesaro_projector_of_spectral(const Matrix& t, double fixpoint_tol) {
  const Eigen::Index m = t.rows();
  Eigen::JacobiSVD<Matrix> svd(t - Matrix::Identity(m, m),
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 1.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > fixpoint_tol * scale) ++rank;
  if (rank == m) throw std::runtime_error("cesaro projector: no fixed point");
  Matrix k = svd.matrixV().rightCols(m - rank);
  Matrix w = svd.matrixU().rightCols(m - rank);
  return k * (w.adjoint() * k).inverse() * w.adjoint();
}

inline Matrix cesaro_projector(const Eris& e, const ToleranceProfile& tol = {}) {
  return cesaro_projector_of_spectral(block_transfer(e), tol.fixpoint_tol);
}

inline Matrix dual_cesaro_projector(const Eris& e,
                                    const ToleranceProfile& tol = {}) {
  return cesaro_projector_of_spectral(block_dual_transfer(e), tol.fixpoint_tol);
}

/// E(X): the Cesaro mean of L-iterates of X on the exact backend.
inline RandomField cesaro_exact(const Eris& e, const RandomField& x,
                                const ToleranceProfile& tol = {}) {
  require_field_over(e, x);
  Matrix proj = cesaro_projector(e, tol);
  return unvec_field(proj * vec_field(x), x.size(), x.dim());
}

/// max_w || phi_{w+1}(rho_w) - rho_{w+1} ||_1: residual of the cocycle
/// (stationarity) equation.
inline double check_cocycle(const Eris& e, const RandomField& rho) {
  require_field_over(e, rho);
  const int n = rho.size();
  double res = 0.0;
  for (int w = 0; w < n; ++w) {
    Matrix next = e.channel((w + 1) % n).apply(rho[w]);
    res = std::max(res, trace_norm(next - rho[(w + 1) % n]));
  }
  return res;
}

struct MonteCarloResult {
  Matrix mean;                 // replica-averaged Cesaro mean
  double std_err = 0.0;        // max entrywise standard error across replicas
  double max_state_violation = 0.0;  // worst |tr - 1| / negativity seen
  int replicas = 0;
  int steps = 0;
};

namespace detail {

inline Matrix transfer_at(const Eris& e, const Trajectory& traj, int step,
                          RngStream& fresh_rng) {
  if (!e.has_fresh_family()) {
    return e.channel(traj.symbols[step]).transfer_matrix();
  }
  const FreshChannelFamily& fam = e.fresh_family();
  if (fam.kind == ChannelKind::haar_random_unitary) {
    Matrix u = haar_unitary(fam.dim, fresh_rng);
    return Eigen::kroneckerProduct(u.conjugate(), u).eval();
  }
  return random_kraus_channel(fam.dim, fam.kraus_count, fresh_rng)
      .transfer_matrix();
}

}  // namespace detail

/// Quenched Monte-Carlo Cesaro mean: per replica, sample one trajectory and
/// average the forward orbit A_r = (1/M) sum_{N=1..M} Phi_N(theta_0);
/// replicas use disjoint RNG streams and merge associatively.
inline MonteCarloResult cesaro_monte_carlo(const Eris& e,
                                           const Matrix& initial_state, int steps,
                                           int replicas, std::uint64_t seed) {
  if (steps < 1 || replicas < 1)
    throw std::invalid_argument("steps and replicas must be >= 1");
  const Eigen::Index d = e.dim();
  if (initial_state.rows() != d || initial_state.cols() != d)
    throw DimensionMismatch("initial state dimension mismatch");

  MonteCarloResult result;
  result.replicas = replicas;
  result.steps = steps;
  std::vector<Matrix> replica_means;
  replica_means.reserve(replicas);
  double violation = 0.0;

  for (int r = 0; r < replicas; ++r) {
    const std::uint64_t stream = seed * 0x10001ULL + static_cast<std::uint64_t>(r);
    Trajectory traj;
    if (!e.has_fresh_family()) traj = sample_trajectory(e.driver(), steps, stream);
    RngStream fresh_rng(seed, stream + 0x9e3779b9ULL);
    Vector v = vec(initial_state);
    Vector acc = Vector::Zero(d * d);
    for (int k = 0; k < steps; ++k) {
      v = detail::transfer_at(e, traj, k, fresh_rng) * v;
      acc += v;
      const Matrix state = unvec(v, d);
      violation = std::max(violation, std::abs(state.trace().real() - 1.0));
      violation = std::max(violation, std::abs(state.trace().imag()));
    }
    replica_means.push_back(unvec(acc / static_cast<double>(steps), d));
  }

  Matrix mean = Matrix::Zero(d, d);
  for (const Matrix& m : replica_means) mean += m;
  mean /= static_cast<double>(replicas);

  double max_se = 0.0;
  if (replicas > 1) {
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(d, d);
    for (const Matrix& m : replica_means)
      var += (m - mean).cwiseAbs2().real();
    var /= static_cast<double>(replicas - 1);
    max_se = std::sqrt(var.maxCoeff() / static_cast<double>(replicas));
  }

  result.mean = std::move(mean);
  result.std_err = max_se;
  result.max_state_violation = violation;
  return result;
}

/// Field-initial variant for cycle drivers: replica r starts from its
/// trajectory's start point w and evolves theta_w.
inline MonteCarloResult cesaro_monte_carlo(const Eris& e,
                                           const RandomField& initial, int steps,
                                           int replicas, std::uint64_t seed) {
  require_field_over(e, initial);
  if (steps < 1 || replicas < 1)
    throw std::invalid_argument("steps and replicas must be >= 1");
  const Eigen::Index d = e.dim();
  MonteCarloResult result;
  result.replicas = replicas;
  result.steps = steps;
  std::vector<Matrix> replica_means;
  double violation = 0.0;
  for (int r = 0; r < replicas; ++r) {
    const std::uint64_t stream = seed * 0x10001ULL + static_cast<std::uint64_t>(r);
    Trajectory traj = sample_trajectory(e.driver(), steps + 1, stream);
    Vector v = vec(initial[traj.symbols[0]]);
    Vector acc = Vector::Zero(d * d);
    for (int k = 1; k <= steps; ++k) {
      v = e.channel(traj.symbols[k % traj.symbols.size()]).transfer_matrix() * v;
      acc += v;
      const Matrix state = unvec(v, d);
      violation = std::max(violation, std::abs(state.trace().real() - 1.0));
    }
    replica_means.push_back(unvec(acc / static_cast<double>(steps), d));
  }
  Matrix mean = Matrix::Zero(d, d);
  for (const Matrix& m : replica_means) mean += m;
  mean /= static_cast<double>(replicas);
  double max_se = 0.0;
  if (replicas > 1) {
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(d, d);
    for (const Matrix& m : replica_means) var += (m - mean).cwiseAbs2().real();
    var /= static_cast<double>(replicas - 1);
    max_se = std::sqrt(var.maxCoeff() / static_cast<double>(replicas));
  }
  result.mean = std::move(mean);
  result.std_err = max_se;
  result.max_state_violation = violation;
  return result;
}

}  // namespace eris
