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

#include <filesystem>
#include <fstream>

#include "eris/scenario.hpp"
#include "test_helpers.hpp"

using namespace eris;

TEST_CASE("matrix JSON round trip") {
  RngStream rng(111, 0);
  Matrix m = eris::testing::random_matrix(3, rng);
  Matrix back = matrix_from_json(to_json(m));
  CHECK(op_norm(m - back) < 1e-15);
  CHECK_THROWS(matrix_from_json(Json{{"dim", 0}, {"re", {}}, {"im", {}}}));
}

TEST_CASE("driver JSON round trip") {
  Driver cyc = FiniteCycleDriver(3);
  CHECK(to_json(driver_from_json(to_json(cyc))) == to_json(cyc));
  Driver iid = IIDDriver({0.25, 0.75}, 9);
  CHECK(to_json(driver_from_json(to_json(iid))) == to_json(iid));
  Eigen::MatrixXd t(2, 2);
  t << 0.9, 0.1, 0.2, 0.8;
  Driver mkv = MarkovDriver(t, {2.0 / 3.0, 1.0 / 3.0}, 4);
  CHECK(to_json(driver_from_json(to_json(mkv))) == to_json(mkv));
  CHECK_THROWS_AS(driver_from_json(Json{{"kind", "weird"}}),
                  std::invalid_argument);
}

TEST_CASE("channel spec JSON round trip") {
  ChannelSpec depol = ChannelSpec::depolarizing_spec(3, 0.4);
  CHECK(to_json(channel_spec_from_json(to_json(depol))) == to_json(depol));
  ChannelSpec uni = ChannelSpec::unitary_spec(Matrix::Identity(2, 2));
  ChannelSpec uni2 = channel_spec_from_json(to_json(uni));
  CHECK(op_norm(*uni2.unitary - *uni.unitary) < 1e-15);
  ChannelSpec rk;
  rk.kind = ChannelKind::random_kraus;
  rk.dim = 2;
  rk.kraus_count = 4;
  rk.seed = 21;
  CHECK(to_json(channel_spec_from_json(to_json(rk))) == to_json(rk));
}

TEST_CASE("scenario JSON round trip for every builtin") {
  for (const BuiltinEntry& entry : builtin_catalog()) {
    Scenario s = entry.make();
    Json j = to_json(s);
    Scenario back = scenario_from_json(j);
    CHECK(to_json(back) == j);
  }
}

TEST_CASE("builtin catalog lookup") {
  CHECK(builtin_catalog().size() == 6);
  CHECK(find_builtin("flip-cycle-2").has_value());
  CHECK_FALSE(find_builtin("nonexistent").has_value());
}

TEST_CASE("running the flip builtin") {
  RunResult r = run_scenario(builtin_flip_cycle_2());
  CHECK(r.exit_code == 0);
  const Json& a = r.report.at("analyses");
  CHECK(a.at("validate").at("passed").get<bool>());
  CHECK(a.at("decompose").at("blocks").size() == 2);
  CHECK_FALSE(a.at("decompose").at("dynamically_ergodic").get<bool>());
  CHECK(a.at("cocycle_check").at("max_residual").get<double>() < 1e-8);
  for (const Json& v : a.at("schaefer").at("blocks_irreducible"))
    CHECK(v.get<bool>());
}

TEST_CASE("running the depolarizing builtin") {
  RunResult r = run_scenario(builtin_depolarizing_05());
  CHECK(r.exit_code == 0);
  const Json& a = r.report.at("analyses");
  CHECK(a.at("decompose").at("dynamically_ergodic").get<bool>());
  CHECK(a.at("ergodic_average").at("deviation").get<double>() < 1e-6);
  CHECK(!r.trace_csv.empty());
}

TEST_CASE("running the damping builtin") {
  RunResult r = run_scenario(builtin_damping_transient());
  CHECK(r.exit_code == 0);
  const Json& a = r.report.at("analyses");
  // The observable is the transient projection; its time average vanishes.
  CHECK(std::abs(a.at("ergodic_average").at("value").get<double>()) < 1e-6);
  Matrix rec = matrix_from_json(
      a.at("decompose").at("recurrent").at(0));
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK(op_norm(rec - expected) < 1e-8);
}

TEST_CASE("running the iid block-diagonal builtin") {
  RunResult r = run_scenario(builtin_iid_blockdiag());
  CHECK(r.exit_code == 0);
  const Json& dec = r.report.at("analyses").at("iid_decompose");
  CHECK(dec.at("blocks").size() == 2);
  CHECK(dec.at("reliable").get<bool>());
}

TEST_CASE("sampled drivers reject exact-only analyses") {
  Scenario s;
  s.name = "bad";
  s.driver = IIDDriver({1.0}, 0);
  s.channel_specs = {ChannelSpec::depolarizing_spec(2, 0.5)};
  s.analyses = {AnalysisKind::decompose};
  CHECK_THROWS_AS(run_scenario(s), std::invalid_argument);
}

TEST_CASE("monte carlo scenario runs are deterministic") {
  Scenario s = builtin_haar_iid_d2();
  s.params.steps = 200;
  s.params.replicas = 2;
  RunResult a = run_scenario(s);
  RunResult b = run_scenario(s);
  CHECK(a.report.at("analyses") == b.report.at("analyses"));
  CHECK(a.trace_csv == b.trace_csv);
}

TEST_CASE("markov builtin produces a cesaro report") {
  Scenario s = builtin_markov_mixed();
  s.params.steps = 300;
  s.params.replicas = 2;
  RunResult r = run_scenario(s);
  CHECK(r.exit_code == 0);
  const Json& c = r.report.at("analyses").at("cesaro");
  CHECK(c.at("max_state_violation").get<double>() < 1e-8);
  Matrix mean = matrix_from_json(c.at("mean"));
  CHECK(std::abs(mean.trace().real() - 1.0) < 1e-10);
}

TEST_CASE("run_scenario_to_dir writes report and trace") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "eris_scenario_test";
  fs::remove_all(dir);
  Scenario s = builtin_damping_transient();
  const int code = run_scenario_to_dir(s, dir.string());
  CHECK(code == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "trace.csv"));
  std::ifstream f(dir / "report.json");
  Json report = Json::parse(f);
  CHECK(report.at("name") == "damping-transient");
  fs::remove_all(dir);
}

TEST_CASE("tolerance profile JSON defaults and overrides") {
  ToleranceProfile tol = tolerance_from_json(Json{{"rank_tol", 1e-7}});
  CHECK(tol.rank_tol == 1e-7);
  CHECK(tol.eig_tol == 1e-9);
  CHECK(tol.psd_tol == 1e-10);
  CHECK(to_json(tol).at("fixpoint_tol").get<double>() == 1e-9);
}

TEST_CASE("non-CPTP channel data raises a validation error") {
  Scenario s;
  s.name = "bad-channel";
  s.driver = FiniteCycleDriver(1);
  ChannelSpec spec;
  spec.kind = ChannelKind::explicit_kraus;
  spec.dim = 2;
  spec.kraus = {0.5 * Matrix::Identity(2, 2)};
  s.channel_specs = {spec};
  s.analyses = {AnalysisKind::validate};
  CHECK_THROWS_AS(build_process(s), ValidationError);
}

TEST_CASE("scenario parsing rejects malformed input") {
  CHECK_THROWS(scenario_from_json(Json{{"name", "x"}}));
  Json j = to_json(builtin_flip_cycle_2());
  j["analyses"].push_back("not_an_analysis");
  CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
}
