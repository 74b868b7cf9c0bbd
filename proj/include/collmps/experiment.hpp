// Copyright 2026 The collmps Authors
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

// Config-driven experiments: JSON schema, single runs, sweeps, figure
// reproduction and kernel-norm tables.

#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "collmps/embedding.hpp"
#include "collmps/error.hpp"
#include "collmps/io.hpp"
#include "collmps/linalg.hpp"
#include "collmps/master_equation.hpp"
#include "collmps/models.hpp"
#include "collmps/mps.hpp"
#include "collmps/oracle.hpp"

namespace collmps {

enum class Method { kEmbedding, kOracle, kNz, kGksl, kDecorrelated };

struct ModelSpec {
  std::string name;
  std::map<std::string, double> parameters;
  std::vector<double> amplitudes;  // single_photon only
};

struct ObservableSpec {
  std::string name;             // excited_population, coherence, depolarization, bloch_*, custom
  std::string label;            // CSV column
  std::optional<Matrix> matrix; // custom only
};

struct ConfigTolerances {
  double positivity = 1e-10;
  double cutoff = 1e-6;
};

struct SweepSpec {
  std::string parameter;  // "g_tau" or a model parameter
  std::vector<double> values;
};

struct ExperimentConfig {
  ModelSpec model;
  std::optional<std::string> interaction_name;
  std::optional<Matrix> interaction_matrix;
  double g_tau = 0.0;
  double tau = 1.0;
  std::size_t k_max = 1;
  std::optional<std::string> initial_state_name;
  std::optional<Matrix> initial_state_matrix;
  std::vector<ObservableSpec> observables;
  std::string output;
  Method method = Method::kEmbedding;
  ConfigTolerances tolerances;
  StroboscopicOptions stroboscopic;
  std::optional<SweepSpec> sweep;
};

namespace detail {

inline const std::map<std::string, Method>& method_names() {
  static const std::map<std::string, Method> m = {{"embedding", Method::kEmbedding},
                                                  {"oracle", Method::kOracle},
                                                  {"nz", Method::kNz},
                                                  {"gksl", Method::kGksl},
                                                  {"decorrelated", Method::kDecorrelated}};
  return m;
}

inline std::string method_name(Method m) {
  for (const auto& [k, v] : method_names()) {
    if (v == m) return k;
  }
  return "embedding";
}

inline const std::set<std::string>& model_names() {
  static const std::set<std::string> s = {"two_photon", "cluster", "aklt", "ghz",
                                          "single_photon"};
  return s;
}

inline const std::set<std::string>& interaction_names() {
  static const std::set<std::string> s = {"exchange", "cluster", "heisenberg", "controlled"};
  return s;
}

inline const std::set<std::string>& state_names() {
  static const std::set<std::string> s = {"ground", "excited", "plus", "minus", "mixed"};
  return s;
}

inline const std::set<std::string>& observable_names() {
  static const std::set<std::string> s = {"excited_population", "coherence", "depolarization",
                                          "bloch_x", "bloch_y", "bloch_z", "custom"};
  return s;
}

inline std::string default_interaction(const std::string& model) {
  if (model == "cluster") return "cluster";
  if (model == "aklt") return "heisenberg";
  return "exchange";
}

inline std::size_t default_mode_dim(const std::string& model) {
  if (model == "cluster") return models::kDefaultClusterCutoff;
  if (model == "two_photon" || model == "aklt") return 3;
  return 2;
}

inline void check_keys(const io::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) {
      throw ConfigError(where.empty() ? k : where + "." + k, "unknown field");
    }
  }
}

inline double get_number(const io::json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

inline std::size_t get_count(const io::json& j, const std::string& field) {
  if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>())) {
    throw ConfigError(field, "expected a non-negative integer");
  }
  const double v = j.get<double>();
  if (v < 0) throw ConfigError(field, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline bool has_param(const ModelSpec& m, const std::string& p) { return m.parameters.count(p) > 0; }

inline double param(const ModelSpec& m, const std::string& p, double fallback) {
  auto it = m.parameters.find(p);
  return it == m.parameters.end() ? fallback : it->second;
}

}  // namespace detail

// Chosen mode dimension: the fock_cutoff parameter when given, else the
// model default.
inline std::size_t config_mode_dim(const ExperimentConfig& c) {
  const double cut = detail::param(c.model, "fock_cutoff", 0.0);
  return cut > 0 ? static_cast<std::size_t>(cut) : detail::default_mode_dim(c.model.name);
}

inline std::size_t config_n_sites(const ExperimentConfig& c) {
  const double n = detail::param(c.model, "n_sites", 0.0);
  return n > 0 ? static_cast<std::size_t>(n) : c.k_max;
}

// Semantic checks that go beyond the JSON shape.
inline void validate(const ExperimentConfig& c) {
  using detail::has_param;
  const auto& m = c.model;
  if (!detail::model_names().count(m.name)) throw ConfigError("model.name", "unknown model '" + m.name + "'");
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"two_photon", {"tau_over_T1", "tau_over_T2", "g_T1", "g_T2", "fock_cutoff", "n_sites"}},
      {"cluster", {"fock_cutoff", "n_sites"}},
      {"aklt", {"n_sites"}},
      {"ghz", {"n_sites", "fock_cutoff"}},
      {"single_photon", {"n_sites", "fock_cutoff"}}};
  for (const auto& [k, v] : m.parameters) {
    if (!allowed.at(m.name).count(k)) {
      throw ConfigError("model.parameters." + k, "not a parameter of model '" + m.name + "'");
    }
    if (!std::isfinite(v)) throw ConfigError("model.parameters." + k, "must be finite");
  }
  if (!m.amplitudes.empty() && m.name != "single_photon") {
    throw ConfigError("model.parameters.amplitudes", "only the single_photon model takes amplitudes");
  }
  if (m.name == "two_photon") {
    const bool rates = has_param(m, "tau_over_T1") || has_param(m, "tau_over_T2");
    const bool times = has_param(m, "g_T1") || has_param(m, "g_T2");
    if (rates == times) {
      throw ConfigError("model.parameters", "give either tau_over_T1/tau_over_T2 or g_T1/g_T2");
    }
    for (const char* p : rates ? std::vector<const char*>{"tau_over_T1", "tau_over_T2"}
                               : std::vector<const char*>{"g_T1", "g_T2"}) {
      if (!has_param(m, p)) throw ConfigError(std::string("model.parameters.") + p, "missing");
      if (!(m.parameters.at(p) > 0)) throw ConfigError(std::string("model.parameters.") + p, "must be positive");
    }
  }
  if (has_param(m, "fock_cutoff")) {
    const double f = m.parameters.at("fock_cutoff");
    if (f < 2 || std::floor(f) != f) throw ConfigError("model.parameters.fock_cutoff", "must be an integer >= 2");
  }
  if (has_param(m, "n_sites")) {
    const double n = m.parameters.at("n_sites");
    if (n < 1 || std::floor(n) != n) throw ConfigError("model.parameters.n_sites", "must be a positive integer");
  }
  if (m.name == "ghz") {
    if (!has_param(m, "n_sites")) throw ConfigError("model.parameters.n_sites", "required for ghz");
    if (m.parameters.at("n_sites") < 2) throw ConfigError("model.parameters.n_sites", "ghz needs n_sites >= 2");
  }
  if (m.name == "single_photon") {
    if (m.amplitudes.empty() && !has_param(m, "n_sites")) {
      throw ConfigError("model.parameters", "single_photon needs amplitudes or n_sites");
    }
    if (!m.amplitudes.empty()) {
      double n2 = 0.0;
      for (double a : m.amplitudes) n2 += a * a;
      if (m.amplitudes.size() < 2) throw ConfigError("model.parameters.amplitudes", "need at least two amplitudes");
      if (std::abs(n2 - 1.0) > 1e-8) throw ConfigError("model.parameters.amplitudes", "must be normalized");
      if (has_param(m, "n_sites") && m.parameters.at("n_sites") != static_cast<double>(m.amplitudes.size())) {
        throw ConfigError("model.parameters.n_sites", "disagrees with the number of amplitudes");
      }
    }
  }
  const std::size_t dm = config_mode_dim(c);
  if (c.interaction_name) {
    if (!detail::interaction_names().count(*c.interaction_name)) {
      throw ConfigError("interaction", "unknown interaction '" + *c.interaction_name + "'");
    }
    const bool spin = *c.interaction_name == "heisenberg" || *c.interaction_name == "controlled";
    if (spin && dm != 3) throw ConfigError("interaction", "spin-1 interactions need mode dimension 3");
  } else if (c.interaction_matrix) {
    const auto n = static_cast<Eigen::Index>(2 * dm);
    if (c.interaction_matrix->rows() != n || c.interaction_matrix->cols() != n) {
      throw ConfigError("interaction", "explicit unitary must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if ((c.interaction_matrix->adjoint() * *c.interaction_matrix - identity(n)).norm() > 1e-12) {
      throw ConfigError("interaction", "explicit matrix is not unitary");
    }
    if (c.method == Method::kGksl) {
      throw ConfigError("method", "gksl needs a named interaction (its Hamiltonian is required)");
    }
  }
  if (!std::isfinite(c.g_tau) || c.g_tau < 0) throw ConfigError("g_tau", "must be finite and non-negative");
  if (!(c.tau > 0) || !std::isfinite(c.tau)) throw ConfigError("tau", "must be positive");
  if (c.k_max < 1) throw ConfigError("k_max", "must be >= 1");
  if (c.initial_state_name && !detail::state_names().count(*c.initial_state_name)) {
    throw ConfigError("initial_state", "unknown state '" + *c.initial_state_name + "'");
  }
  if (c.initial_state_matrix && !is_density_matrix(*c.initial_state_matrix, 1e-10)) {
    throw ConfigError("initial_state", "not a 2x2 density matrix");
  }
  if (c.initial_state_matrix && c.initial_state_matrix->rows() != 2) {
    throw ConfigError("initial_state", "not a 2x2 density matrix");
  }
  if (c.observables.empty()) throw ConfigError("observables", "at least one observable is required");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < c.observables.size(); ++i) {
    const auto& o = c.observables[i];
    const std::string f = "observables[" + std::to_string(i) + "]";
    if (!detail::observable_names().count(o.name)) throw ConfigError(f, "unknown observable '" + o.name + "'");
    if (o.name == "custom") {
      if (!o.matrix || o.matrix->rows() != 2 || o.matrix->cols() != 2) {
        throw ConfigError(f + ".matrix", "custom observables need a 2x2 matrix");
      }
      if (hermiticity_residual(*o.matrix) > 1e-12) throw ConfigError(f + ".matrix", "not Hermitian");
    }
    if (o.label.empty() || o.label == "k" || o.label == "g_t" || !labels.insert(o.label).second) {
      throw ConfigError(f + ".label", "labels must be unique, non-empty and not 'k' or 'g_t'");
    }
  }
  if (!(c.tolerances.positivity > 0)) throw ConfigError("tolerances.positivity", "must be positive");
  if (!(c.tolerances.cutoff > 0)) throw ConfigError("tolerances.cutoff", "must be positive");
  const bool finite = m.name == "ghz" || m.name == "single_photon";
  if (finite) {
    const std::size_t len = m.amplitudes.empty() ? config_n_sites(c) : m.amplitudes.size();
    if (c.k_max > len) throw ConfigError("k_max", "exceeds the number of environment sites");
  }
  if (c.method == Method::kOracle && c.k_max > config_n_sites(c)) {
    throw ConfigError("k_max", "oracle runs need k_max <= n_sites");
  }
  if (c.method == Method::kGksl && finite) {
    throw ConfigError("method", "gksl needs a homogeneous environment");
  }
  if (c.sweep) {
    if (c.sweep->values.empty()) throw ConfigError("sweep.values", "must not be empty");
    if (c.sweep->parameter != "g_tau" && !allowed.at(m.name).count(c.sweep->parameter)) {
      throw ConfigError("sweep.parameter", "'" + c.sweep->parameter + "' cannot be swept for this model");
    }
    if (c.output.empty()) throw ConfigError("output", "sweeps need an output path");
  }
}

inline ExperimentConfig parse_config(const io::json& j) {
  using detail::check_keys;
  if (!j.is_object()) throw ConfigError("(root)", "expected a JSON object");
  check_keys(j, {"model", "interaction", "g_tau", "tau", "k_max", "initial_state", "observables",
                 "output", "method", "tolerances", "stroboscopic", "sweep"},
             "");
  ExperimentConfig c;
  for (const char* key : {"model", "g_tau", "k_max", "observables"}) {
    if (!j.contains(key)) throw ConfigError(key, "missing");
  }
  const io::json& jm = j["model"];
  if (!jm.is_object()) throw ConfigError("model", "expected an object");
  check_keys(jm, {"name", "parameters"}, "model");
  if (!jm.contains("name") || !jm["name"].is_string()) throw ConfigError("model.name", "missing or not a string");
  c.model.name = jm["name"].get<std::string>();
  if (jm.contains("parameters")) {
    if (!jm["parameters"].is_object()) throw ConfigError("model.parameters", "expected an object");
    for (const auto& [k, v] : jm["parameters"].items()) {
      if (k == "amplitudes") {
        if (!v.is_array()) throw ConfigError("model.parameters.amplitudes", "expected an array");
        for (std::size_t i = 0; i < v.size(); ++i) {
          c.model.amplitudes.push_back(
              detail::get_number(v[i], "model.parameters.amplitudes[" + std::to_string(i) + "]"));
        }
      } else {
        c.model.parameters[k] = detail::get_number(v, "model.parameters." + k);
      }
    }
  }
  if (j.contains("interaction")) {
    if (j["interaction"].is_string()) {
      c.interaction_name = j["interaction"].get<std::string>();
    } else {
      c.interaction_matrix = io::matrix_from_json(j["interaction"], "interaction");
    }
  } else {
    c.interaction_name = detail::default_interaction(c.model.name);
  }
  c.g_tau = detail::get_number(j["g_tau"], "g_tau");
  if (j.contains("tau")) c.tau = detail::get_number(j["tau"], "tau");
  c.k_max = detail::get_count(j["k_max"], "k_max");
  if (j.contains("initial_state")) {
    if (j["initial_state"].is_string()) {
      c.initial_state_name = j["initial_state"].get<std::string>();
    } else {
      c.initial_state_matrix = io::matrix_from_json(j["initial_state"], "initial_state");
    }
  } else {
    c.initial_state_name = "ground";
  }
  if (!j["observables"].is_array()) throw ConfigError("observables", "expected an array");
  for (std::size_t i = 0; i < j["observables"].size(); ++i) {
    const io::json& o = j["observables"][i];
    const std::string f = "observables[" + std::to_string(i) + "]";
    ObservableSpec spec;
    if (o.is_string()) {
      spec.name = o.get<std::string>();
    } else if (o.is_object()) {
      check_keys(o, {"name", "label", "matrix"}, f);
      if (!o.contains("name") || !o["name"].is_string()) throw ConfigError(f + ".name", "missing or not a string");
      spec.name = o["name"].get<std::string>();
      if (o.contains("label")) {
        if (!o["label"].is_string()) throw ConfigError(f + ".label", "expected a string");
        spec.label = o["label"].get<std::string>();
      }
      if (o.contains("matrix")) spec.matrix = io::matrix_from_json(o["matrix"], f + ".matrix");
    } else {
      throw ConfigError(f, "expected a name or an object");
    }
    if (spec.label.empty()) spec.label = spec.name;
    c.observables.push_back(std::move(spec));
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output", "expected a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("method")) {
    const auto it = j["method"].is_string() ? detail::method_names().find(j["method"].get<std::string>())
                                            : detail::method_names().end();
    if (it == detail::method_names().end()) throw ConfigError("method", "unknown method");
    c.method = it->second;
  }
  if (j.contains("tolerances")) {
    const io::json& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances", "expected an object");
    check_keys(t, {"positivity", "cutoff"}, "tolerances");
    if (t.contains("positivity")) c.tolerances.positivity = detail::get_number(t["positivity"], "tolerances.positivity");
    if (t.contains("cutoff")) c.tolerances.cutoff = detail::get_number(t["cutoff"], "tolerances.cutoff");
  }
  if (j.contains("stroboscopic")) {
    const io::json& s = j["stroboscopic"];
    if (!s.is_object()) throw ConfigError("stroboscopic", "expected an object");
    check_keys(s, {"form", "two_site"}, "stroboscopic");
    if (s.contains("form")) {
      const std::string f = s["form"].is_string() ? s["form"].get<std::string>() : "";
      if (f == "cumulant") c.stroboscopic.form = StroboscopicForm::kCumulant;
      else if (f == "literal") c.stroboscopic.form = StroboscopicForm::kLiteral;
      else throw ConfigError("stroboscopic.form", "expected 'cumulant' or 'literal'");
    }
    if (s.contains("two_site")) {
      const std::string f = s["two_site"].is_string() ? s["two_site"].get<std::string>() : "";
      if (f == "correlated") c.stroboscopic.two_site = TwoSiteState::kCorrelated;
      else if (f == "product") c.stroboscopic.two_site = TwoSiteState::kProduct;
      else throw ConfigError("stroboscopic.two_site", "expected 'correlated' or 'product'");
    }
  }
  if (j.contains("sweep")) {
    const io::json& s = j["sweep"];
    if (!s.is_object()) throw ConfigError("sweep", "expected an object");
    check_keys(s, {"parameter", "values"}, "sweep");
    if (!s.contains("parameter") || !s["parameter"].is_string()) throw ConfigError("sweep.parameter", "missing or not a string");
    if (!s.contains("values") || !s["values"].is_array()) throw ConfigError("sweep.values", "missing or not an array");
    SweepSpec sw;
    sw.parameter = s["parameter"].get<std::string>();
    for (std::size_t i = 0; i < s["values"].size(); ++i) {
      sw.values.push_back(detail::get_number(s["values"][i], "sweep.values[" + std::to_string(i) + "]"));
    }
    c.sweep = std::move(sw);
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("(file)", "cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

inline io::json serialize_config(const ExperimentConfig& c) {
  io::json params = io::json::object();
  for (const auto& [k, v] : c.model.parameters) params[k] = v;
  if (!c.model.amplitudes.empty()) params["amplitudes"] = c.model.amplitudes;
  io::json j;
  j["model"] = {{"name", c.model.name}, {"parameters", params}};
  if (c.interaction_name) j["interaction"] = *c.interaction_name;
  else j["interaction"] = io::matrix_to_json(*c.interaction_matrix);
  j["g_tau"] = c.g_tau;
  j["tau"] = c.tau;
  j["k_max"] = c.k_max;
  if (c.initial_state_name) j["initial_state"] = *c.initial_state_name;
  else j["initial_state"] = io::matrix_to_json(*c.initial_state_matrix);
  io::json obs = io::json::array();
  for (const auto& o : c.observables) {
    io::json e = {{"name", o.name}, {"label", o.label}};
    if (o.matrix) e["matrix"] = io::matrix_to_json(*o.matrix);
    obs.push_back(std::move(e));
  }
  j["observables"] = std::move(obs);
  j["output"] = c.output;
  j["method"] = detail::method_name(c.method);
  j["tolerances"] = {{"positivity", c.tolerances.positivity}, {"cutoff", c.tolerances.cutoff}};
  j["stroboscopic"] = {
      {"form", c.stroboscopic.form == StroboscopicForm::kCumulant ? "cumulant" : "literal"},
      {"two_site", c.stroboscopic.two_site == TwoSiteState::kCorrelated ? "correlated" : "product"}};
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  return j;
}

// ----------------------------------------------------------------------------
// Model and state construction

inline Matrix named_interaction_hamiltonian(const std::string& name, std::size_t mode_dim) {
  const auto dm = static_cast<Eigen::Index>(mode_dim);
  if (name == "exchange") return models::exchange_hamiltonian(dm);
  if (name == "cluster") return models::cluster_hamiltonian(dm);
  if (name == "heisenberg") return models::heisenberg_hamiltonian();
  if (name == "controlled") return models::controlled_hamiltonian();
  throw ConfigError("interaction", "unknown interaction '" + name + "'");
}

inline MpsEnvironment config_environment(const ExperimentConfig& c) {
  const auto& m = c.model;
  if (m.name == "two_photon") {
    if (detail::has_param(m, "tau_over_T1")) {
      return models::two_photon_env(m.parameters.at("tau_over_T1"), m.parameters.at("tau_over_T2"));
    }
    return models::two_photon_env(c.g_tau / m.parameters.at("g_T1"), c.g_tau / m.parameters.at("g_T2"));
  }
  if (m.name == "cluster") return models::cluster_env();
  if (m.name == "aklt") return models::aklt_env();
  if (m.name == "ghz") return models::ghz_env(config_n_sites(c));
  if (m.name == "single_photon") {
    if (!m.amplitudes.empty()) return models::single_photon_env(m.amplitudes);
    auto p = models::default_photon_profile(config_n_sites(c));
    double n2 = 0.0;
    for (double a : p) n2 += a * a;
    for (double& a : p) a /= std::sqrt(n2);
    return models::single_photon_env(p);
  }
  throw ConfigError("model.name", "unknown model '" + m.name + "'");
}

inline CollisionModel build_model(const ExperimentConfig& c) {
  const std::size_t dm = config_mode_dim(c);
  MpsEnvironment env = config_environment(c);
  if (c.interaction_name) {
    return CollisionModel::from_hamiltonian(std::move(env),
                                            named_interaction_hamiltonian(*c.interaction_name, dm),
                                            2, dm, c.g_tau, c.tau);
  }
  return CollisionModel(std::move(env), {*c.interaction_matrix}, 2, dm, c.g_tau, c.tau);
}

inline Matrix named_state(const std::string& name) {
  if (name == "ground") return models::ground_state();
  if (name == "excited") return models::excited_state();
  if (name == "mixed") return 0.5 * identity(2);
  if (name == "plus" || name == "minus") {
    const double s = name == "plus" ? 1.0 : -1.0;
    Matrix m(2, 2);
    m << 0.5, 0.5 * s, 0.5 * s, 0.5;
    return m;
  }
  throw ConfigError("initial_state", "unknown state '" + name + "'");
}

inline Matrix config_initial_state(const ExperimentConfig& c) {
  return c.initial_state_name ? named_state(*c.initial_state_name) : *c.initial_state_matrix;
}

// ----------------------------------------------------------------------------
// Observables

inline Eigen::Vector3d bloch_vector(const Matrix& rho) {
  return {(rho * models::sigma_x()).trace().real(), (rho * models::sigma_y()).trace().real(),
          (rho * models::sigma_z()).trace().real()};
}

// q(k) = r(k)·r(0) / |r(0)|^2; equals the depolarization parameter when
// rho(k) = q rho(0) + (1 - q) I/2.
inline std::vector<double> depolarization_series(const std::vector<Matrix>& traj) {
  const Eigen::Vector3d r0 = bloch_vector(traj.front());
  const double n2 = r0.squaredNorm();
  if (n2 < 1e-24) {
    throw ConfigError("observables", "depolarization is undefined for a maximally mixed initial state");
  }
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& rho : traj) out.push_back(bloch_vector(rho).dot(r0) / n2);
  return out;
}

inline Matrix observable_matrix(const ObservableSpec& o) {
  if (o.name == "excited_population") return models::excited_state();
  // 2 Re <+|rho|-> = <sigma_z>
  if (o.name == "coherence" || o.name == "bloch_z") return models::sigma_z();
  if (o.name == "bloch_x") return models::sigma_x();
  if (o.name == "bloch_y") return models::sigma_y();
  if (o.name == "custom") return *o.matrix;
  throw ConfigError("observables", "'" + o.name + "' is not a linear observable");
}

inline std::vector<double> evaluate_observable(const ObservableSpec& o,
                                               const std::vector<Matrix>& traj) {
  if (o.name == "depolarization") return depolarization_series(traj);
  return observable_series(traj, observable_matrix(o));
}

// ----------------------------------------------------------------------------
// Runs

inline std::vector<Matrix> run_trajectory(const ExperimentConfig& c) {
  const Matrix rho0 = config_initial_state(c);
  const CollisionModel model = build_model(c);
  const bool fock = c.interaction_name && (*c.interaction_name == "cluster");
  if (fock && (c.method == Method::kEmbedding || c.method == Method::kDecorrelated)) {
    ExperimentConfig probe = c;
    std::vector<Matrix> obs;
    for (const auto& o : c.observables) {
      if (o.name != "depolarization") obs.push_back(observable_matrix(o));
    }
    obs.push_back(models::sigma_x());
    obs.push_back(models::sigma_z());
    check_cutoff_convergence(
        [&](std::size_t cut) {
          probe.model.parameters["fock_cutoff"] = static_cast<double>(cut);
          return build_model(probe);
        },
        model.mode_dim(), rho0, c.k_max, obs, c.tolerances.cutoff);
  }
  switch (c.method) {
    case Method::kEmbedding:
      return trajectory(model, rho0, c.k_max, c.tolerances.positivity);
    case Method::kOracle:
      return brute_force_trajectory(model, rho0, {config_n_sites(c), c.k_max});
    case Method::kNz:
      return solve_nz(build_kernel_table(model, c.k_max), rho0, c.k_max);
    case Method::kGksl: {
      const auto gen = stroboscopic_generator(model, c.stroboscopic);
      std::vector<Matrix> out;
      out.reserve(c.k_max + 1);
      for (std::size_t k = 0; k <= c.k_max; ++k) {
        out.push_back(evolve_gksl(gen.generator, rho0, static_cast<double>(k) * c.tau));
      }
      return out;
    }
    case Method::kDecorrelated: {
      std::optional<std::size_t> n;
      if (model.env().length()) n = *model.env().length();
      else n = c.k_max;
      return trajectory(model.with_env(decorrelate(model.env(), n)), rho0, c.k_max,
                        c.tolerances.positivity);
    }
  }
  throw Error("run: unhandled method");
}

inline io::CsvTable run(const ExperimentConfig& c) {
  const auto traj = run_trajectory(c);
  io::CsvTable t;
  t.header = {"k", "g_t"};
  std::vector<std::vector<double>> cols;
  for (const auto& o : c.observables) {
    t.header.push_back(o.label);
    cols.push_back(evaluate_observable(o, traj));
  }
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row = {static_cast<double>(k), c.g_tau * static_cast<double>(k)};
    for (const auto& col : cols) row.push_back(col[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string sweep_output_path(const std::string& base, std::size_t i) {
  const std::filesystem::path p(base);
  return (p.parent_path() / (p.stem().string() + "_" + std::to_string(i) + p.extension().string()))
      .string();
}

// One config per sweep value, with its own output file. Without a sweep the
// config itself is returned.
inline std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& c) {
  if (!c.sweep) return {c};
  std::vector<ExperimentConfig> out;
  for (std::size_t i = 0; i < c.sweep->values.size(); ++i) {
    ExperimentConfig e = c;
    e.sweep.reset();
    const double v = c.sweep->values[i];
    if (c.sweep->parameter == "g_tau") e.g_tau = v;
    else e.model.parameters[c.sweep->parameter] = v;
    e.output = sweep_output_path(c.output, i);
    validate(e);
    out.push_back(std::move(e));
  }
  return out;
}

// Runs every expanded config concurrently and returns (output path, table)
// in sweep order.
inline std::vector<std::pair<std::string, io::CsvTable>> run_all(const ExperimentConfig& c) {
  const auto configs = expand_sweep(c);
  std::vector<std::future<io::CsvTable>> jobs;
  jobs.reserve(configs.size());
  for (const auto& e : configs) {
    jobs.push_back(std::async(configs.size() > 1 ? std::launch::async : std::launch::deferred,
                              [e] { return run(e); }));
  }
  std::vector<std::pair<std::string, io::CsvTable>> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) out.emplace_back(configs[i].output, jobs[i].get());
  return out;
}

// ----------------------------------------------------------------------------
// Kernel norms

inline io::CsvTable kernel_norms(const ExperimentConfig& c, std::size_t k, std::size_t m_max) {
  if (m_max > k) throw ConfigError("m-max", "must not exceed k");
  if (!c.interaction_name) throw ConfigError("interaction", "kernel norms need a named interaction");
  const CollisionModel model = build_model(c);
  if (!model.env().has_site(k + 1)) throw ConfigError("k", "beyond the end of the environment");
  const Matrix h = named_interaction_hamiltonian(*c.interaction_name, model.mode_dim());
  const auto chis = bond_states(model.env(), k);
  io::CsvTable t;
  t.header = {"m", "K_norm", "K2_norm"};
  for (std::size_t m = 0; m <= m_max; ++m) {
    const double exact = memory_kernel(model, k, m, chis).norm();
    const double second = m == 0 ? std::nan("") : second_order_kernel(model, k, m, h, model.g()).norm();
    t.rows.push_back({static_cast<double>(m), exact, second});
  }
  return t;
}

// ----------------------------------------------------------------------------
// Figure reproduction

enum class Figure { kFig5a, kFig5b, kFig6a, kFig6b };

inline Figure parse_figure(const std::string& s) {
  if (s == "fig5a") return Figure::kFig5a;
  if (s == "fig5b") return Figure::kFig5b;
  if (s == "fig6a") return Figure::kFig6a;
  if (s == "fig6b") return Figure::kFig6b;
  throw ConfigError("figure", "unknown figure '" + s + "' (expected fig5a, fig5b, fig6a or fig6b)");
}

// Curve windows in dimensionless time g t.
inline constexpr double kFig5aWindow = 30.0;
inline constexpr double kFig5bWindow = 15.0;
inline constexpr double kFig6aWindow = 50.0;
inline constexpr double kFig6bWindow = 20.0;
inline constexpr double kFig6aGTau = 0.5;

namespace detail {

inline io::CsvTable two_column_table(const std::vector<std::string>& labels, double g_tau,
                                     const std::vector<std::vector<double>>& cols) {
  io::CsvTable t;
  t.header = {"k", "g_t"};
  for (const auto& l : labels) t.header.push_back(l);
  for (std::size_t k = 0; k < cols.front().size(); ++k) {
    std::vector<double> row = {static_cast<double>(k), g_tau * static_cast<double>(k)};
    for (const auto& c : cols) row.push_back(c[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::size_t steps_for(double window, double g_tau) {
  return static_cast<std::size_t>(std::llround(window / g_tau));
}

}  // namespace detail

// Curve tables keyed by file name.
inline std::vector<std::pair<std::string, io::CsvTable>> reproduce_tables(Figure f) {
  std::vector<std::pair<std::string, io::CsvTable>> out;
  const Matrix g0 = models::ground_state();
  switch (f) {
    case Figure::kFig5a: {
      const double gt = 0.3;
      const std::size_t k_max = detail::steps_for(kFig5aWindow, gt);
      const auto m = models::two_photon_model(gt, 2.3, 59.9);
      const auto a = observable_series(trajectory(m, g0, k_max), models::excited_state());
      const auto b = observable_series(
          trajectory(m.with_env(decorrelate(m.env(), k_max)), g0, k_max), models::excited_state());
      out.emplace_back("fig5a.csv", detail::two_column_table({"correlated", "decorrelated"}, gt, {a, b}));
      break;
    }
    case Figure::kFig5b: {
      for (double gt : {0.3, 0.6}) {
        const std::size_t k_max = detail::steps_for(kFig5bWindow, gt);
        const auto m = models::cluster_model(gt);
        check_cutoff_convergence([&](std::size_t cut) { return models::cluster_model(gt, cut); },
                                 m.mode_dim(), g0, k_max, {models::sigma_z(), models::sigma_x()});
        const auto a = observable_series(trajectory(m, g0, k_max), models::sigma_z());
        const auto b = observable_series(
            trajectory(m.with_env(decorrelate(m.env(), k_max)), g0, k_max), models::sigma_z());
        out.emplace_back(gt == 0.3 ? "fig5b_gtau0.3.csv" : "fig5b_gtau0.6.csv",
                         detail::two_column_table({"correlated", "decorrelated"}, gt, {a, b}));
      }
      break;
    }
    case Figure::kFig6a: {
      const double gt = kFig6aGTau;
      const std::size_t k_max = detail::steps_for(kFig6aWindow, gt);
      const auto m = models::aklt_heisenberg_model(gt);
      const auto a = depolarization_series(trajectory(m, g0, k_max));
      const auto b = depolarization_series(trajectory(m.with_env(decorrelate(m.env())), g0, k_max));
      out.emplace_back("fig6a.csv", detail::two_column_table({"exact", "markov"}, gt, {a, b}));
      break;
    }
    case Figure::kFig6b: {
      const double gt = 0.1;
      const std::size_t k_max = detail::steps_for(kFig6bWindow, gt);
      const auto m = models::aklt_controlled_model(gt);
      const auto exact = observable_series(trajectory(m, g0, k_max), models::sigma_z());
      out.emplace_back("fig6b_exact.csv", detail::two_column_table({"sigma_z"}, gt, {exact}));
      const auto gen = stroboscopic_generator(m);
      io::CsvTable t;
      t.header = {"k", "g_t", "sigma_z"};
      const std::size_t samples = 10 * k_max;
      for (std::size_t s = 0; s <= samples; ++s) {
        const double k = static_cast<double>(s) / 10.0;
        const Matrix rho = evolve_gksl(gen.generator, g0, k * m.tau());
        t.rows.push_back({k, gt * k, (rho * models::sigma_z()).trace().real()});
      }
      out.emplace_back("fig6b_gksl.csv", std::move(t));
      break;
    }
  }
  return out;
}

inline std::vector<std::string> reproduce(Figure f, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  for (const auto& [name, table] : reproduce_tables(f)) {
    const std::string p = (std::filesystem::path(out_dir) / name).string();
    table.write_file(p);
    paths.push_back(p);
  }
  return paths;
}

}  // namespace collmps
