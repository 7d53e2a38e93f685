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
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "eris/rng.hpp"

namespace eris {

/// Omega = Z/nZ with uniform measure and theta(w) = w+1 mod n. This is the
/// complete exact backend: an invertible ergodic m.p.t. of a finite uniform
/// space is a single cycle.
struct FiniteCycleDriver {
  int n = 1;

  explicit FiniteCycleDriver(int cycle_length = 1) : n(cycle_length) {
    if (n < 1) throw std::invalid_argument("cycle length must be >= 1");
  }
};

/// Product shift over a finite alphabet: Omega = Xi^Z with i.i.d. symbol law.
struct IIDDriver {
  int alphabet_size = 1;
  std::vector<double> weights;  // strictly positive, sums to 1
  std::uint64_t seed = 0;

  IIDDriver(std::vector<double> w, std::uint64_t s)
      : alphabet_size(static_cast<int>(w.size())), weights(std::move(w)), seed(s) {
    if (weights.empty()) throw std::invalid_argument("empty alphabet");
    double sum = 0.0;
    for (double p : weights) {
      if (p <= 0.0) throw std::invalid_argument("weights must be strictly positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("weights must sum to 1");
  }
};

/// Stationary Markov shift on a finite alphabet.
struct MarkovDriver {
  int alphabet_size = 1;
  Eigen::MatrixXd transition;      // row-stochastic
  std::vector<double> initial;     // stationary vector pi, pi T = pi
  std::uint64_t seed = 0;

  MarkovDriver(Eigen::MatrixXd t, std::vector<double> pi, std::uint64_t s)
      : alphabet_size(static_cast<int>(t.rows())),
        transition(std::move(t)),
        initial(std::move(pi)),
        seed(s) {
    if (transition.rows() != transition.cols() || transition.rows() < 1)
      throw std::invalid_argument("transition matrix must be square");
    if (static_cast<int>(initial.size()) != alphabet_size)
      throw std::invalid_argument("initial vector size mismatch");
    for (int i = 0; i < alphabet_size; ++i) {
      if (std::abs(transition.row(i).sum() - 1.0) > 1e-12)
        throw std::invalid_argument("transition rows must sum to 1");
    }
    Eigen::RowVectorXd p(alphabet_size);
    for (int i = 0; i < alphabet_size; ++i) p(i) = initial[i];
    if ((p * transition - p).lpNorm<Eigen::Infinity>() > 1e-10)
      throw std::invalid_argument("initial vector is not stationary");
  }
};

using Driver = std::variant<FiniteCycleDriver, IIDDriver, MarkovDriver>;

inline int alphabet_size(const Driver& d) {
  return std::visit(
      [](const auto& drv) -> int {
        using T = std::decay_t<decltype(drv)>;
        if constexpr (std::is_same_v<T, FiniteCycleDriver>)
          return drv.n;
        else
          return drv.alphabet_size;
      },
      d);
}

inline bool is_exact(const Driver& d) {
  return std::holds_alternative<FiniteCycleDriver>(d);
}

/// A finite window of a sample path of theta.
struct Trajectory {
  std::vector<int> symbols;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {

inline int draw_index(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

inline int draw_row(const Eigen::MatrixXd& t, int row, double u) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j + 1 < t.cols(); ++j) {
    acc += t(row, j);
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(t.cols()) - 1;
}

}  // namespace detail

/// Deterministic given (driver seed, stream_id, length). For the cycle
/// driver the start point is drawn uniformly and the rest is the orbit.
inline Trajectory sample_trajectory(const Driver& driver, int length,
                                    std::uint64_t stream_id) {
  if (length < 1) throw std::invalid_argument("trajectory length must be >= 1");
  Trajectory traj;
  traj.stream_id = stream_id;
  traj.symbols.resize(length);
  if (const auto* cyc = std::get_if<FiniteCycleDriver>(&driver)) {
    RngStream rng(0, stream_id);
    const int start = static_cast<int>(rng.uniform() * cyc->n) % cyc->n;
    for (int k = 0; k < length; ++k) traj.symbols[k] = (start + k) % cyc->n;
    return traj;
  }
  if (const auto* iid = std::get_if<IIDDriver>(&driver)) {
    traj.seed = iid->seed;
    RngStream rng(iid->seed, stream_id);
    for (int k = 0; k < length; ++k)
      traj.symbols[k] = detail::draw_index(iid->weights, rng.uniform());
    return traj;
  }
  const auto& mkv = std::get<MarkovDriver>(driver);
  traj.seed = mkv.seed;
  RngStream rng(mkv.seed, stream_id);
  int state = detail::draw_index(mkv.initial, rng.uniform());
  traj.symbols[0] = state;
  for (int k = 1; k < length; ++k) {
    state = detail::draw_row(mkv.transition, state, rng.uniform());
    traj.symbols[k] = state;
  }
  return traj;
}

}  // namespace eris
