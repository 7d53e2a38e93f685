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

#include "eris/channel.hpp"
#include "eris/matcore.hpp"
#include "eris/rng.hpp"

namespace eris::testing {

inline Matrix random_matrix(Eigen::Index d, RngStream& rng) {
  Matrix m(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      m(i, j) = Complex(rng.normal(), rng.normal());
  return m;
}

inline Matrix random_hermitian(Eigen::Index d, RngStream& rng) {
  return hermitian_part(random_matrix(d, rng));
}

inline Matrix random_state(Eigen::Index d, RngStream& rng) {
  Matrix g = random_matrix(d, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Matrix random_projection(Eigen::Index d, Eigen::Index rank, RngStream& rng) {
  Matrix u = haar_unitary(d, rng).leftCols(rank);
  return u * u.adjoint();
}

}  // namespace eris::testing
