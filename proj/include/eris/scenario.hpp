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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "eris/serialization.hpp"

namespace eris {

enum class AnalysisKind {
  validate,
  decompose,
  cesaro,
  cocycle_check,
  ergodic_average,
  schaefer,
  iid_decompose,
};

inline std::string to_string(AnalysisKind a) {
  switch (a) {
    case AnalysisKind::validate: return "validate";
    case AnalysisKind::decompose: return "decompose";
    case AnalysisKind::cesaro: return "cesaro";
    case AnalysisKind::cocycle_check: return "cocycle_check";
    case AnalysisKind::ergodic_average: return "ergodic_average";
    case AnalysisKind::schaefer: return "schaefer";
    case AnalysisKind::iid_decompose: return "iid_decompose";
  }
  return "unknown";
}

inline AnalysisKind analysis_from_string(const std::string& s) {
  if (s == "validate") return AnalysisKind::validate;
  if (s == "decompose") return AnalysisKind::decompose;
  if (s == "cesaro") return AnalysisKind::cesaro;
  if (s == "cocycle_check") return AnalysisKind::cocycle_check;
  if (s == "ergodic_average") return AnalysisKind::ergodic_average;
  if (s == "schaefer") return AnalysisKind::schaefer;
  if (s == "iid_decompose") return AnalysisKind::iid_decompose;
  throw std::invalid_argument("unknown analysis: " + s);
}

struct AnalysisParams {
  int steps = 1000;    // M
  int replicas = 8;    // R
  std::optional<Matrix> initial_state;
  std::optional<Matrix> observable;
  std::vector<std::pair<ChannelSpec, double>> mixture;  // iid_decompose
};

struct Scenario {
  std::string name;
  Driver driver = FiniteCycleDriver(1);
  std::vector<ChannelSpec> channel_specs;  // per driver symbol
  std::optional<FreshChannelFamily> fresh; // continuous-alphabet i.i.d.
  std::vector<AnalysisKind> analyses;
  AnalysisParams params;
  std::uint64_t seed = 0;
};

inline Json to_json(const Scenario& s) {
  Json channels = Json::object();
  if (s.fresh) {
    Json fam{{"kind", to_string(s.fresh->kind)}, {"dim", s.fresh->dim}};
    if (s.fresh->kind == ChannelKind::random_kraus)
      fam["kraus_count"] = s.fresh->kraus_count;
    channels["*"] = std::move(fam);
  } else {
    for (std::size_t k = 0; k < s.channel_specs.size(); ++k)
      channels[std::to_string(k)] = to_json(s.channel_specs[k]);
  }
  Json analyses = Json::array();
  for (AnalysisKind a : s.analyses) analyses.push_back(to_string(a));
  Json params{{"M", s.params.steps}, {"R", s.params.replicas}};
  if (s.params.initial_state) params["initial_state"] = to_json(*s.params.initial_state);
  if (s.params.observable) params["observable"] = to_json(*s.params.observable);
  if (!s.params.mixture.empty()) {
    Json mix = Json::array();
    for (const auto& [spec, w] : s.params.mixture)
      mix.push_back(Json{{"channel", to_json(spec)}, {"weight", w}});
    params["mixture"] = std::move(mix);
  }
  return Json{{"name", s.name},
              {"driver", to_json(s.driver)},
              {"channels", std::move(channels)},
              {"analyses", std::move(analyses)},
              {"params", std::move(params)},
              {"seed", s.seed}};
}

inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.name = j.at("name").get<std::string>();
  s.driver = driver_from_json(j.at("driver"));
  const Json& channels = j.at("channels");
  if (channels.contains("*")) {
    const Json& fam = channels.at("*");
    FreshChannelFamily fresh;
    fresh.kind = channel_kind_from_string(fam.at("kind").get<std::string>());
    fresh.dim = fam.at("dim").get<Eigen::Index>();
    fresh.kraus_count = fam.value("kraus_count", 2);
    s.fresh = fresh;
  } else {
    const int m = alphabet_size(s.driver);
    s.channel_specs.resize(m);
    for (int k = 0; k < m; ++k)
      s.channel_specs[k] = channel_spec_from_json(channels.at(std::to_string(k)));
  }
  for (const Json& a : j.at("analyses"))
    s.analyses.push_back(analysis_from_string(a.get<std::string>()));
  if (j.contains("params")) {
    const Json& p = j.at("params");
    s.params.steps = p.value("M", 1000);
    s.params.replicas = p.value("R", 8);
    if (p.contains("initial_state"))
      s.params.initial_state = matrix_from_json(p.at("initial_state"));
    if (p.contains("observable"))
      s.params.observable = matrix_from_json(p.at("observable"));
    if (p.contains("mixture"))
      for (const Json& m : p.at("mixture"))
        s.params.mixture.emplace_back(channel_spec_from_json(m.at("channel")),
                                      m.at("weight").get<double>());
  }
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

namespace detail {

inline Matrix seeded_state(Eigen::Index d, std::uint64_t seed, std::uint64_t stream) {
  RngStream rng(seed, stream);
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Matrix seeded_observable(Eigen::Index d, std::uint64_t seed,
                                std::uint64_t stream) {
  RngStream rng(seed, stream);
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  return hermitian_part(g);
}

}  // namespace detail

inline Eris build_process(const Scenario& s) {
  if (s.fresh) {
    const auto* iid = std::get_if<IIDDriver>(&s.driver);
    if (!iid)
      throw std::invalid_argument("fresh channel family requires an iid driver");
    return Eris(*iid, *s.fresh);
  }
  std::vector<KrausChannel> table;
  table.reserve(s.channel_specs.size());
  for (const ChannelSpec& spec : s.channel_specs) table.push_back(build(spec));
  return Eris(s.driver, std::move(table));
}

struct RunResult {
  Json report;
  std::string trace_csv;  // "step,value,residual\n..."
  int exit_code = 0;      // 0 ok, 2 validation failure, 3 tolerance failure
};

/// Execute every requested analysis and assemble the machine-readable
/// report. Exact-only analyses are rejected for sampled drivers (except
/// iid_decompose, which runs on the mean channel).
inline RunResult run_scenario(const Scenario& s, const ToleranceProfile& tol = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.report["name"] = s.name;
  result.report["seed"] = s.seed;
  result.report["tolerances"] = to_json(tol);
  Json& analyses = result.report["analyses"];
  analyses = Json::object();
  std::ostringstream trace;
  trace << "step,value,residual\n";

  const bool exact = is_exact(s.driver) && !s.fresh;

  std::optional<Eris> process;
  if (!s.params.mixture.empty() &&
      s.analyses == std::vector<AnalysisKind>{AnalysisKind::iid_decompose}) {
    // Pure mean-channel runs need no per-symbol table.
  } else {
    process = build_process(s);
  }

  std::optional<Decomposition> cached_decomposition;
  auto decomposition = [&]() -> const Decomposition& {
    if (!cached_decomposition)
      cached_decomposition = minimal_decomposition(*process, tol);
    return *cached_decomposition;
  };

  for (AnalysisKind a : s.analyses) {
    const bool needs_exact = a == AnalysisKind::decompose ||
                             a == AnalysisKind::cocycle_check ||
                             a == AnalysisKind::schaefer ||
                             a == AnalysisKind::ergodic_average;
    if (needs_exact && !exact)
      throw std::invalid_argument("analysis '" + to_string(a) +
                                  "' requires the exact cycle backend");
    switch (a) {
      case AnalysisKind::validate: {
        Json reports = Json::array();
        bool all_pass = true;
        for (const KrausChannel& ch : process->table()) {
          ValidationReport rep = validate(ch, tol);
          all_pass = all_pass && rep.passed();
          reports.push_back(
              Json{{"trace_preservation_residual", rep.trace_preservation_residual},
                   {"choi_min_eigenvalue", rep.choi_min_eigenvalue},
                   {"passed", rep.passed()}});
        }
        analyses["validate"] = Json{{"channels", std::move(reports)},
                                    {"passed", all_pass}};
        if (!all_pass) result.exit_code = 2;
        break;
      }
      case AnalysisKind::decompose: {
        const Decomposition& dec = decomposition();
        Json out = to_json(dec);
        Json residuals = Json::object();
        Json cocycle = Json::array();
        for (const DecompositionBlock& b : dec.blocks)
          cocycle.push_back(check_cocycle(*process, b.stationary_state));
        residuals["cocycle"] = std::move(cocycle);
        out["residuals"] = std::move(residuals);
        analyses["decompose"] = std::move(out);
        break;
      }
      case AnalysisKind::cesaro: {
        const Eigen::Index d = process->dim();
        const Matrix theta = s.params.initial_state
                                 ? *s.params.initial_state
                                 : detail::seeded_state(d, s.seed, 1);
        MonteCarloResult final_mc =
            cesaro_monte_carlo(*process, theta, s.params.steps,
                               s.params.replicas, s.seed);
        // Convergence trace: re-run at checkpoints (deterministic streams
        // make the prefixes consistent).
        const int points = 20;
        for (int k = 1; k <= points; ++k) {
          const int m = std::max(1, s.params.steps * k / points);
          MonteCarloResult mc =
              cesaro_monte_carlo(*process, theta, m, s.params.replicas, s.seed);
          const double dist = 0.5 * trace_norm(mc.mean - final_mc.mean);
          trace << m << "," << dist << "," << mc.std_err << "\n";
        }
        analyses["cesaro"] =
            Json{{"mean", to_json(final_mc.mean)},
                 {"std_err", final_mc.std_err},
                 {"max_state_violation", final_mc.max_state_violation},
                 {"M", s.params.steps},
                 {"R", s.params.replicas}};
        if (final_mc.max_state_violation > 1e-8) result.exit_code = 3;
        break;
      }
      case AnalysisKind::cocycle_check: {
        const Decomposition& dec = decomposition();
        Json residuals = Json::array();
        double worst = 0.0;
        for (const DecompositionBlock& b : dec.blocks) {
          const double r = check_cocycle(*process, b.stationary_state);
          residuals.push_back(r);
          worst = std::max(worst, r);
        }
        analyses["cocycle_check"] = Json{{"residuals", std::move(residuals)},
                                         {"max_residual", worst}};
        if (worst > 10 * tol.fixpoint_tol) result.exit_code = 3;
        break;
      }
      case AnalysisKind::ergodic_average: {
        const int n = process->cycle_length();
        const Eigen::Index d = process->dim();
        const Matrix theta = s.params.initial_state
                                 ? *s.params.initial_state
                                 : detail::seeded_state(d, s.seed, 2);
        const Matrix obs = s.params.observable
                               ? *s.params.observable
                               : detail::seeded_observable(d, s.seed, 3);
        RandomField theta_f = RandomField::constant(n, theta);
        RandomField obs_f = RandomField::constant(n, obs);
        const double value = ergodic_average_observable(*process, theta_f, obs_f,
                                                        s.params.steps, tol);
        Json out{{"value", value}, {"M", s.params.steps}};
        const Decomposition& dec = decomposition();
        if (dec.dynamically_ergodic) {
          const double ref =
              mean_hs_inner(dec.blocks.front().stationary_state, obs_f).real();
          out["reference"] = ref;
          out["deviation"] = std::abs(value - ref);
        }
        for (int k = 1; k <= 10; ++k) {
          const int m = std::max(1, s.params.steps * k / 10);
          const double v =
              ergodic_average_observable(*process, theta_f, obs_f, m, tol);
          trace << m << "," << v << "," << 0.0 << "\n";
        }
        analyses["ergodic_average"] = std::move(out);
        break;
      }
      case AnalysisKind::schaefer: {
        const Decomposition& dec = decomposition();
        Json verdicts = Json::array();
        for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
          const RandomField& q = dec.blocks[i].projection;
          // Random PSD state supported in the corner.
          RandomField x = q;
          for (int w = 0; w < x.size(); ++w) {
            Matrix g = detail::seeded_state(x.dim(), s.seed,
                                            100 + 10 * i + static_cast<std::size_t>(w));
            x[w] = q[w] * g * q[w];
            const double tr = x[w].trace().real();
            if (tr > 1e-12) x[w] /= tr;
          }
          verdicts.push_back(schaefer_test(*process, q, x, tol));
        }
        analyses["schaefer"] = Json{{"blocks_irreducible", std::move(verdicts)}};
        break;
      }
      case AnalysisKind::iid_decompose: {
        std::vector<std::pair<KrausChannel, double>> mixture;
        if (!s.params.mixture.empty()) {
          for (const auto& [spec, w] : s.params.mixture)
            mixture.emplace_back(build(spec), w);
        } else if (const auto* iid = std::get_if<IIDDriver>(&s.driver)) {
          for (int k = 0; k < iid->alphabet_size; ++k)
            mixture.emplace_back(process->channel(k), iid->weights[k]);
        } else {
          throw std::invalid_argument("iid_decompose needs a mixture or iid driver");
        }
        Decomposition dec = iid_deterministic_decomposition(mixture, tol);
        analyses["iid_decompose"] = to_json(dec);
        if (!dec.reliable) result.exit_code = 3;
        break;
      }
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  result.report["wall_time_s"] =
      std::chrono::duration<double>(t1 - t0).count();
  result.trace_csv = trace.str();
  return result;
}

/// Write report.json and trace.csv under out_dir; returns the exit code.
inline int run_scenario_to_dir(const Scenario& s, const std::string& out_dir,
                               const ToleranceProfile& tol = {}) {
  RunResult r = run_scenario(s, tol);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/report.json");
    f << r.report.dump(2) << "\n";
  }
  {
    std::ofstream f(out_dir + "/trace.csv");
    f << r.trace_csv;
  }
  return r.exit_code;
}

// ---------------------------------------------------------------------------
// Builtin scenario catalog.

inline Scenario builtin_flip_cycle_2() {
  Scenario s;
  s.name = "flip-cycle-2";
  s.driver = FiniteCycleDriver(2);
  ChannelSpec flip;
  flip.kind = ChannelKind::amplitude_flip;
  flip.dim = 2;
  s.channel_specs = {flip, flip};
  s.analyses = {AnalysisKind::validate, AnalysisKind::decompose,
                AnalysisKind::cocycle_check, AnalysisKind::schaefer};
  return s;
}

inline Scenario builtin_haar_iid_d2() {
  Scenario s;
  s.name = "haar-iid-d2";
  s.driver = IIDDriver({1.0}, 7);
  FreshChannelFamily fam;
  fam.kind = ChannelKind::haar_random_unitary;
  fam.dim = 2;
  s.fresh = fam;
  s.analyses = {AnalysisKind::cesaro};
  s.params.steps = 5000;
  s.params.replicas = 8;
  Matrix theta(2, 2);
  theta << Complex(0.7, 0.0), Complex(0.2, 0.1), Complex(0.2, -0.1), Complex(0.3, 0.0);
  s.params.initial_state = theta;
  s.seed = 7;
  return s;
}

inline Scenario builtin_depolarizing_05() {
  Scenario s;
  s.name = "depolarizing-0.5";
  s.driver = FiniteCycleDriver(1);
  s.channel_specs = {ChannelSpec::depolarizing_spec(2, 0.5)};
  s.analyses = {AnalysisKind::validate, AnalysisKind::decompose,
                AnalysisKind::ergodic_average};
  s.params.steps = 1000;
  return s;
}

inline Scenario builtin_damping_transient() {
  Scenario s;
  s.name = "damping-transient";
  s.driver = FiniteCycleDriver(1);
  ChannelSpec damp;
  damp.kind = ChannelKind::amplitude_damping;
  damp.dim = 2;
  damp.p = 1.0;
  s.channel_specs = {damp};
  s.analyses = {AnalysisKind::decompose, AnalysisKind::ergodic_average};
  s.params.steps = 1000;
  Matrix transient = Matrix::Zero(2, 2);
  transient(1, 1) = 1.0;
  s.params.observable = transient;
  return s;
}

inline Scenario builtin_markov_mixed() {
  Scenario s;
  s.name = "markov-mixed";
  Eigen::MatrixXd t(2, 2);
  t << 0.9, 0.1, 0.2, 0.8;
  // Stationary vector of the chain above.
  s.driver = MarkovDriver(t, {2.0 / 3.0, 1.0 / 3.0}, 11);
  ChannelSpec depol = ChannelSpec::depolarizing_spec(2, 0.3);
  ChannelSpec flip;
  flip.kind = ChannelKind::amplitude_flip;
  flip.dim = 2;
  s.channel_specs = {depol, flip};
  s.analyses = {AnalysisKind::cesaro};
  s.params.steps = 5000;
  s.params.replicas = 8;
  s.seed = 11;
  return s;
}

inline Scenario builtin_iid_blockdiag() {
  Scenario s;
  s.name = "iid-blockdiag";
  s.driver = IIDDriver({0.5, 0.5}, 13);
  // Two unitaries sharing the C^2 (+) C^2 block structure.
  auto block_unitary = [](std::uint64_t seed) {
    RngStream rng(seed, 0);
    Matrix u = Matrix::Zero(4, 4);
    u.block(0, 0, 2, 2) = haar_unitary(2, rng);
    u.block(2, 2, 2, 2) = haar_unitary(2, rng);
    return u;
  };
  s.channel_specs = {ChannelSpec::unitary_spec(block_unitary(101)),
                     ChannelSpec::unitary_spec(block_unitary(202))};
  s.analyses = {AnalysisKind::iid_decompose};
  s.seed = 13;
  return s;
}

struct BuiltinEntry {
  std::string name;
  std::string description;
  Scenario (*make)();
};

inline const std::vector<BuiltinEntry>& builtin_catalog() {
  static const std::vector<BuiltinEntry> catalog = {
      {"flip-cycle-2",
       "period-2 amplitude flip over a 2-cycle: reducible process with two "
       "cyclic minimal blocks and explicit stationary states",
       &builtin_flip_cycle_2},
      {"haar-iid-d2",
       "i.i.d. Haar-random unitaries on a qubit: Monte-Carlo Cesaro mean "
       "converges to the maximally mixed state",
       &builtin_haar_iid_d2},
      {"depolarizing-0.5",
       "deterministic depolarizing channel: dynamically ergodic with unique "
       "stationary state I/2",
       &builtin_depolarizing_05},
      {"damping-transient",
       "amplitude damping at full strength: recurrent projection |0><0|, "
       "time-averaged transient observables decay to zero",
       &builtin_damping_transient},
      {"markov-mixed",
       "two-state Markov driver mixing a depolarizing and a flip channel: "
       "sampled-trajectory Cesaro statistics",
       &builtin_markov_mixed},
      {"iid-blockdiag",
       "i.i.d. mixture of two block-diagonal unitaries: mean-channel pathway "
       "returns the two deterministic invariant blocks",
       &builtin_iid_blockdiag},
  };
  return catalog;
}

inline std::optional<Scenario> find_builtin(const std::string& name) {
  for (const BuiltinEntry& e : builtin_catalog())
    if (e.name == name) return e.make();
  return std::nullopt;
}

}  // namespace eris
