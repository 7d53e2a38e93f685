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

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eris/scenario.hpp"

namespace {

eris::Scenario load_scenario(const std::string& path) {
  if (auto builtin = eris::find_builtin(path)) return *builtin;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario file: " + path);
  eris::Json j = eris::Json::parse(f);
  return eris::scenario_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eris-lab: structure analysis of ergodic repeated-interaction "
               "quantum processes"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  std::string tol_profile_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  long long max_iters = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario and write report.json");
  run->add_option("scenario", scenario_path,
                  "scenario JSON file or builtin name")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--tol-profile", tol_profile_path,
                  "JSON file overriding the tolerance profile");
  run->add_option("--seed", seed, "override the scenario seed")
      ->each([&](const std::string&) { seed_set = true; });
  run->add_option("--threads", threads, "scenario-level parallelism");
  run->add_option("--max-iters", max_iters, "cap on Cesaro averaging terms");

  CLI::App* list = app.add_subcommand("list", "list builtin scenarios");

  std::string validate_path;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "validate a scenario file");
  validate_cmd->add_option("scenario", validate_path, "scenario JSON file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const eris::BuiltinEntry& e : eris::builtin_catalog())
        std::cout << e.name << "\t" << e.description << "\n";
      return 0;
    }
    if (validate_cmd->parsed()) {
      eris::Scenario s = load_scenario(validate_path);
      eris::Eris process = eris::build_process(s);
      bool ok = true;
      if (!process.has_fresh_family()) {
        for (const eris::KrausChannel& ch : process.table())
          ok = ok && eris::validate(ch).passed();
      }
      std::cout << (ok ? "valid" : "invalid") << "\n";
      return ok ? 0 : 2;
    }
    // run
    eris::Scenario s = load_scenario(scenario_path);
    if (seed_set) s.seed = seed;
    eris::ToleranceProfile tol;
    if (!tol_profile_path.empty()) {
      std::ifstream f(tol_profile_path);
      if (!f) throw std::runtime_error("cannot open tolerance profile");
      tol = eris::tolerance_from_json(eris::Json::parse(f));
    }
    if (max_iters > 0)
      eris::cesaro_max_doublings() =
          std::max(4, static_cast<int>(std::ceil(std::log2(
                          static_cast<double>(max_iters)))));
    (void)threads;  // analyses within one scenario run sequentially
    return eris::run_scenario_to_dir(s, out_dir, tol);
  } catch (const eris::ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: malformed scenario: " << err.what() << "\n";
    return 1;
  } catch (const std::runtime_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
}
