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

#include <catch2/catch_amalgamated.hpp>

#include "eris/eris.hpp"
#include "test_helpers.hpp"

using namespace eris;
using eris::testing::random_hermitian;
using eris::testing::random_matrix;
using eris::testing::random_state;

namespace {

Eris random_process(int n, Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<KrausChannel> table;
  for (int w = 0; w < n; ++w)
    table.push_back(random_kraus_channel(d, 2, rng));
  return Eris(FiniteCycleDriver(n), std::move(table));
}

RandomField random_field(int n, Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed, 1);
  std::vector<Matrix> vals;
  for (int w = 0; w < n; ++w) vals.push_back(random_matrix(d, rng));
  return RandomField(std::move(vals));
}

Eris flip_process() {
  KrausChannel flip = amplitude_flip_channel();
  return Eris(FiniteCycleDriver(2), {flip, flip});
}

}  // namespace

TEST_CASE("process construction validates the table") {
  CHECK_THROWS_AS(Eris(FiniteCycleDriver(2), {amplitude_flip_channel()}),
                  std::invalid_argument);
  KrausChannel not_tp({0.5 * Matrix::Identity(2, 2)});
  CHECK_THROWS_AS(Eris(FiniteCycleDriver(1), {not_tp}), ValidationError);
  Eris e = flip_process();
  CHECK(e.exact());
  CHECK(e.cycle_length() == 2);
  CHECK(e.dim() == 2);
}

TEST_CASE("fresh family processes reject exact-backend calls") {
  FreshChannelFamily fam;
  fam.kind = ChannelKind::haar_random_unitary;
  fam.dim = 2;
  Eris e(IIDDriver({1.0}, 7), fam);
  CHECK(e.has_fresh_family());
  CHECK_FALSE(e.exact());
  CHECK_THROWS_AS(e.cycle_length(), std::invalid_argument);
  CHECK_THROWS_AS(e.channel(0), std::invalid_argument);

  FreshChannelFamily bad;
  bad.kind = ChannelKind::depolarizing;
  CHECK_THROWS_AS(Eris(IIDDriver({1.0}, 7), bad), std::invalid_argument);
}

TEST_CASE("step_L matches its definition and the block transfer matrix") {
  Eris e = random_process(3, 2, 61);
  RandomField x = random_field(3, 2, 61);
  RandomField y = step_L(e, x);
  for (int w = 0; w < 3; ++w)
    CHECK(op_norm(y[w] - e.channel(w).apply(x[(w + 2) % 3])) < 1e-12);
  RandomField via_matrix = unvec_field(block_transfer(e) * vec_field(x), 3, 2);
  for (int w = 0; w < 3; ++w)
    CHECK(op_norm(y[w] - via_matrix[w]) < 1e-12);
}

TEST_CASE("step_L_dagger matches its definition and block matrix") {
  Eris e = random_process(4, 2, 63);
  RandomField x = random_field(4, 2, 63);
  RandomField y = step_L_dagger(e, x);
  for (int w = 0; w < 4; ++w)
    CHECK(op_norm(y[w] - e.channel((w + 1) % 4).dual_apply(x[(w + 1) % 4])) <
          1e-12);
  RandomField via_matrix =
      unvec_field(block_dual_transfer(e) * vec_field(x), 4, 2);
  for (int w = 0; w < 4; ++w)
    CHECK(op_norm(y[w] - via_matrix[w]) < 1e-12);
}

TEST_CASE("adjoint identity in the averaged inner product") {
  Eris e = random_process(3, 3, 65);
  RandomField x = random_field(3, 3, 65);
  RandomField y = random_field(3, 3, 66);
  CHECK(std::abs(mean_hs_inner(y, step_L(e, x)) -
                 mean_hs_inner(step_L_dagger(e, y), x)) < 1e-12);
}

TEST_CASE("step_L shifts traces, step_L_dagger is unital") {
  Eris e = random_process(3, 2, 67);
  RandomField x = random_field(3, 2, 67);
  RandomField y = step_L(e, x);
  for (int w = 0; w < 3; ++w)
    CHECK(std::abs(y[w].trace() - x[(w + 2) % 3].trace()) < 1e-12);
  RandomField id = RandomField::identity(3, 2);
  RandomField lid = step_L_dagger(e, id);
  for (int w = 0; w < 3; ++w)
    CHECK(op_norm(lid[w] - Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("step_L preserves positivity") {
  Eris e = random_process(3, 2, 69);
  RngStream rng(69, 2);
  std::vector<Matrix> vals;
  for (int w = 0; w < 3; ++w) vals.push_back(random_state(2, rng));
  RandomField rho(vals);
  CHECK(is_psd_field(step_L(e, rho)));
}

TEST_CASE("step_L_rec_dagger compresses by the projection") {
  Eris e = random_process(2, 2, 71);
  Matrix p0 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  RandomField p = RandomField::constant(2, p0);
  RandomField x = random_field(2, 2, 71);
  RandomField y = step_L_rec_dagger(e, p, x);
  for (int w = 0; w < 2; ++w) {
    CHECK(op_norm(p[w] * y[w] * p[w] - y[w]) < 1e-12);
  }
  CHECK_THROWS_AS(step_L_rec_dagger(e, x, x), std::invalid_argument);
}

TEST_CASE("cesaro projector is an idempotent fixed by the transfer") {
  Eris e = random_process(3, 2, 73);
  Matrix t = block_transfer(e);
  Matrix proj = cesaro_projector(e);
  CHECK((proj * proj - proj).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((t * proj - proj).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((proj * t - proj).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cesaro_exact outputs fixed points and preserves the mean trace") {
  Eris e = random_process(3, 3, 75);
  RandomField x = random_field(3, 3, 75);
  RandomField ex = cesaro_exact(e, x);
  RandomField lex = step_L(e, ex);
  for (int w = 0; w < 3; ++w) CHECK(op_norm(lex[w] - ex[w]) < 1e-8);
  Complex tr_in = 0.0, tr_out = 0.0;
  for (int w = 0; w < 3; ++w) {
    tr_in += x[w].trace();
    tr_out += ex[w].trace();
  }
  CHECK(std::abs(tr_in - tr_out) < 1e-9);
  // Idempotence.
  RandomField eex = cesaro_exact(e, ex);
  for (int w = 0; w < 3; ++w) CHECK(op_norm(eex[w] - ex[w]) < 1e-8);
}

TEST_CASE("cesaro_exact on the depolarizing channel") {
  Eris e(FiniteCycleDriver(1), {depolarizing_channel(2, 0.5)});
  RngStream rng(77, 0);
  Matrix rho = random_state(2, rng);
  RandomField ex = cesaro_exact(e, RandomField::constant(1, rho));
  CHECK(op_norm(ex[0] - 0.5 * Matrix::Identity(2, 2)) < 1e-9);
}

TEST_CASE("cesaro_exact on full amplitude damping") {
  Eris e(FiniteCycleDriver(1), {amplitude_damping_channel(1.0)});
  RandomField ex = cesaro_exact(e, RandomField::identity(1, 2));
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 2.0;  // trace of the identity collapses onto |0><0|
  CHECK(op_norm(ex[0] - expected) < 1e-9);
}

TEST_CASE("cesaro_exact agrees with a direct linear-solve oracle") {
  // Independent oracle: E(X) is the unique fixed point F with
  // X - F in range(T - I). Split X = K c + (T - I) y by a least-squares
  // solve over the augmented system, with K an LU kernel basis of T - I.
  for (std::uint64_t seed : {81ULL, 82ULL, 83ULL}) {
    const int n = 1 + static_cast<int>(seed % 3);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(seed % 2);
    Eris e = random_process(n, d, seed);
    Matrix t = block_transfer(e);
    const Eigen::Index m = t.rows();
    Matrix shifted = t - Matrix::Identity(m, m);
    Eigen::FullPivLU<Matrix> lu(shifted);
    lu.setThreshold(1e-9);
    Matrix kernel = lu.kernel();
    Matrix augmented(m, kernel.cols() + m);
    augmented << kernel, shifted;

    RandomField x = random_field(n, d, seed);
    Vector sol = augmented.colPivHouseholderQr().solve(vec_field(x));
    RandomField theirs =
        unvec_field(kernel * sol.head(kernel.cols()), n, d);
    RandomField ours = cesaro_exact(e, x);
    for (int ww = 0; ww < n; ++ww)
      CHECK(op_norm(ours[ww] - theirs[ww]) < 1e-8);
  }
}

TEST_CASE("cesaro projector iteration cap raises") {
  Eris e = random_process(1, 2, 85);
  CHECK_THROWS_AS(cesaro_projector_of(block_transfer(e), 1e-16, 2),
                  std::runtime_error);
}

TEST_CASE("check_cocycle recognizes stationary fields") {
  Eris e = flip_process();
  RandomField uniform = RandomField::constant(2, 0.5 * Matrix::Identity(2, 2));
  CHECK(check_cocycle(e, uniform) < 1e-14);

  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  RandomField cyclic({p0, p1});  // flips onto itself one step ahead
  CHECK(check_cocycle(e, cyclic) < 1e-14);

  RandomField not_stationary({p0, p0});
  CHECK(check_cocycle(e, not_stationary) > 0.5);
}

TEST_CASE("forward_compose matches sequential composition") {
  Eris e = random_process(3, 2, 87);
  Trajectory traj;
  traj.symbols = {1, 2, 0, 1};
  KrausChannel fc = forward_compose(e, traj);
  KrausChannel ref = e.channel(1);
  for (std::size_t k = 1; k < traj.symbols.size(); ++k)
    ref = compose(e.channel(traj.symbols[k]), ref);
  CHECK(op_norm(fc.transfer_matrix() - ref.transfer_matrix()) < 1e-10);
  CHECK(validate(fc).passed());
}

TEST_CASE("monte carlo mean matches the exact limit for depolarizing") {
  Eris e(FiniteCycleDriver(1), {depolarizing_channel(2, 0.5)});
  RngStream rng(89, 0);
  Matrix theta = random_state(2, rng);
  MonteCarloResult mc = cesaro_monte_carlo(e, theta, 500, 4, 89);
  CHECK(0.5 * trace_norm(mc.mean - 0.5 * Matrix::Identity(2, 2)) < 1e-2);
  CHECK(mc.max_state_violation < 1e-10);
  // Deterministic reruns.
  MonteCarloResult mc2 = cesaro_monte_carlo(e, theta, 500, 4, 89);
  CHECK(op_norm(mc.mean - mc2.mean) == 0.0);
}

TEST_CASE("monte carlo with a fresh haar family approaches I/2") {
  FreshChannelFamily fam;
  fam.kind = ChannelKind::haar_random_unitary;
  fam.dim = 2;
  Eris e(IIDDriver({1.0}, 7), fam);
  Matrix theta(2, 2);
  theta << Complex(0.9, 0), Complex(0.1, 0.1), Complex(0.1, -0.1), Complex(0.1, 0);
  MonteCarloResult mc = cesaro_monte_carlo(e, theta, 800, 4, 5);
  CHECK(0.5 * trace_norm(mc.mean - 0.5 * Matrix::Identity(2, 2)) < 0.12);
  CHECK(mc.max_state_violation < 1e-9);
}

TEST_CASE("monte carlo field-initial variant on the flip cycle") {
  Eris e = flip_process();
  Matrix rho(2, 2);
  rho << Complex(0.8, 0), Complex(0, 0), Complex(0, 0), Complex(0.2, 0);
  RandomField init = RandomField::constant(2, rho);
  MonteCarloResult mc = cesaro_monte_carlo(e, init, 1000, 8, 3);
  // The flip alternates diag(0.8, 0.2) and diag(0.2, 0.8); the time average
  // tends to I/2 for every start point.
  CHECK(0.5 * trace_norm(mc.mean - 0.5 * Matrix::Identity(2, 2)) < 1e-2);
}

TEST_CASE("monte carlo input validation") {
  Eris e = random_process(1, 2, 91);
  Matrix theta = 0.5 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(cesaro_monte_carlo(e, theta, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(cesaro_monte_carlo(e, Matrix::Identity(3, 3), 10, 1, 0),
                  DimensionMismatch);
}
