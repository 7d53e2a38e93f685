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
#include <string>
#include <vector>

#include <json.hpp>

#include "eris/channel.hpp"
#include "eris/driver.hpp"
#include "eris/field.hpp"
#include "eris/structure.hpp"

namespace eris {

using Json = nlohmann::json;

// Matrices serialize as {"dim": d, "re": [[...]], "im": [[...]]}, row-major.
inline Json to_json(const Matrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rrow = Json::array(), irow = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline Matrix matrix_from_json(const Json& j) {
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  if (d < 1) throw std::invalid_argument("matrix dim must be >= 1");
  Matrix m(d, d);
  const Json& re = j.at("re");
  const Json& im = j.at("im");
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k)
      m(i, k) = Complex(re.at(i).at(k).get<double>(), im.at(i).at(k).get<double>());
  return m;
}

inline Json to_json(const RandomField& f) {
  Json arr = Json::array();
  for (const Matrix& m : f.values) arr.push_back(to_json(m));
  return arr;
}

inline RandomField field_from_json(const Json& j) {
  std::vector<Matrix> vals;
  for (const Json& m : j) vals.push_back(matrix_from_json(m));
  return RandomField(std::move(vals));
}

inline Json to_json(const KrausChannel& ch) {
  Json arr = Json::array();
  for (const Matrix& v : ch.kraus()) arr.push_back(to_json(v));
  return arr;
}

inline KrausChannel channel_from_json(const Json& j) {
  std::vector<Matrix> ops;
  for (const Json& m : j) ops.push_back(matrix_from_json(m));
  return KrausChannel(std::move(ops));
}

inline std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::unitary: return "unitary";
    case ChannelKind::depolarizing: return "depolarizing";
    case ChannelKind::amplitude_flip: return "amplitude_flip";
    case ChannelKind::amplitude_damping: return "amplitude_damping";
    case ChannelKind::explicit_kraus: return "explicit_kraus";
    case ChannelKind::haar_random_unitary: return "haar_random_unitary";
    case ChannelKind::random_kraus: return "random_kraus";
  }
  return "unknown";
}

inline ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "unitary") return ChannelKind::unitary;
  if (s == "depolarizing") return ChannelKind::depolarizing;
  if (s == "amplitude_flip") return ChannelKind::amplitude_flip;
  if (s == "amplitude_damping") return ChannelKind::amplitude_damping;
  if (s == "explicit_kraus") return ChannelKind::explicit_kraus;
  if (s == "haar_random_unitary") return ChannelKind::haar_random_unitary;
  if (s == "random_kraus") return ChannelKind::random_kraus;
  throw std::invalid_argument("unknown channel kind: " + s);
}

inline Json to_json(const ChannelSpec& spec) {
  Json j{{"kind", to_string(spec.kind)}, {"dim", spec.dim}};
  switch (spec.kind) {
    case ChannelKind::depolarizing:
    case ChannelKind::amplitude_damping:
      j["p"] = spec.p;
      break;
    case ChannelKind::unitary:
      j["unitary"] = to_json(*spec.unitary);
      break;
    case ChannelKind::explicit_kraus: {
      Json arr = Json::array();
      for (const Matrix& v : spec.kraus) arr.push_back(to_json(v));
      j["kraus"] = std::move(arr);
      break;
    }
    case ChannelKind::haar_random_unitary:
      j["seed"] = spec.seed;
      break;
    case ChannelKind::random_kraus:
      j["seed"] = spec.seed;
      j["kraus_count"] = spec.kraus_count;
      break;
    case ChannelKind::amplitude_flip:
      break;
  }
  return j;
}

inline ChannelSpec channel_spec_from_json(const Json& j) {
  ChannelSpec spec;
  spec.kind = channel_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("dim")) spec.dim = j.at("dim").get<Eigen::Index>();
  if (j.contains("p")) spec.p = j.at("p").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("kraus_count")) spec.kraus_count = j.at("kraus_count").get<int>();
  if (j.contains("unitary")) spec.unitary = matrix_from_json(j.at("unitary"));
  if (j.contains("kraus"))
    for (const Json& m : j.at("kraus")) spec.kraus.push_back(matrix_from_json(m));
  if (spec.kind == ChannelKind::amplitude_flip) spec.dim = 2;
  return spec;
}

inline Json to_json(const Driver& d) {
  if (const auto* cyc = std::get_if<FiniteCycleDriver>(&d))
    return Json{{"kind", "cycle"}, {"n", cyc->n}};
  if (const auto* iid = std::get_if<IIDDriver>(&d))
    return Json{{"kind", "iid"},
                {"alphabet_size", iid->alphabet_size},
                {"weights", iid->weights},
                {"seed", iid->seed}};
  const auto& mkv = std::get<MarkovDriver>(d);
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < mkv.transition.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < mkv.transition.cols(); ++j)
      row.push_back(mkv.transition(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"kind", "markov"},
              {"alphabet_size", mkv.alphabet_size},
              {"transition", std::move(rows)},
              {"initial", mkv.initial},
              {"seed", mkv.seed}};
}

inline Driver driver_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "cycle") return FiniteCycleDriver(j.at("n").get<int>());
  if (kind == "iid")
    return IIDDriver(j.at("weights").get<std::vector<double>>(),
                     j.value("seed", std::uint64_t{0}));
  if (kind == "markov") {
    const Json& rows = j.at("transition");
    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd t(m, m);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) t(i, k) = rows.at(i).at(k).get<double>();
    return MarkovDriver(std::move(t), j.at("initial").get<std::vector<double>>(),
                        j.value("seed", std::uint64_t{0}));
  }
  throw std::invalid_argument("unknown driver kind: " + kind);
}

inline Json to_json(const ToleranceProfile& tol) {
  return Json{{"eig_tol", tol.eig_tol},
              {"rank_tol", tol.rank_tol},
              {"psd_tol", tol.psd_tol},
              {"fixpoint_tol", tol.fixpoint_tol}};
}

inline ToleranceProfile tolerance_from_json(const Json& j) {
  ToleranceProfile tol;
  tol.eig_tol = j.value("eig_tol", tol.eig_tol);
  tol.rank_tol = j.value("rank_tol", tol.rank_tol);
  tol.psd_tol = j.value("psd_tol", tol.psd_tol);
  tol.fixpoint_tol = j.value("fixpoint_tol", tol.fixpoint_tol);
  return tol;
}

inline Json to_json(const Decomposition& dec) {
  Json blocks = Json::array();
  for (const DecompositionBlock& b : dec.blocks)
    blocks.push_back(Json{{"projection", to_json(b.projection)},
                          {"stationary_state", to_json(b.stationary_state)},
                          {"corner_dim", b.corner_dim}});
  return Json{{"recurrent", to_json(dec.recurrent)},
              {"transient", to_json(dec.transient)},
              {"blocks", std::move(blocks)},
              {"dynamically_ergodic", dec.dynamically_ergodic},
              {"reliable", dec.reliable}};
}

}  // namespace eris
