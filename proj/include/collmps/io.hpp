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

// JSON encodings of matrices and MPS environments, and the CSV writer.
// Complex matrices are nested arrays of rows of [re, im] pairs.

#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "collmps/error.hpp"
#include "collmps/linalg.hpp"
#include "collmps/mps.hpp"

namespace collmps::io {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw ConfigError(field, "rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(field, "row " + std::to_string(r) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ConfigError(field, "entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                     ") must be a number or a [re, im] pair");
      }
    }
  }
  return m;
}

inline json env_to_json(const MpsEnvironment& env) {
  json sites = json::array();
  for (const auto& s : env.sites()) {
    json t = json::array();
    for (const auto& b : s) t.push_back(matrix_to_json(b));
    sites.push_back(std::move(t));
  }
  return {{"sites", std::move(sites)},
          {"chi0", matrix_to_json(env.chi0())},
          {"homogeneous", env.homogeneous()},
          {"ancilla_dim", env.ancilla_dim()}};
}

inline MpsEnvironment env_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("environment", "expected an object");
  for (const char* key : {"sites", "chi0", "homogeneous"}) {
    if (!j.contains(key)) throw ConfigError(std::string("environment.") + key, "missing");
  }
  if (!j["sites"].is_array()) throw ConfigError("environment.sites", "expected an array");
  std::vector<SiteTensor> sites;
  for (std::size_t k = 0; k < j["sites"].size(); ++k) {
    const json& t = j["sites"][k];
    const std::string field = "environment.sites[" + std::to_string(k) + "]";
    if (!t.is_array()) throw ConfigError(field, "expected an array of matrices");
    SiteTensor s;
    for (std::size_t i = 0; i < t.size(); ++i) {
      s.push_back(matrix_from_json(t[i], field + "[" + std::to_string(i) + "]"));
    }
    sites.push_back(std::move(s));
  }
  const std::size_t ancilla = j.value("ancilla_dim", std::size_t{1});
  return MpsEnvironment(std::move(sites), matrix_from_json(j["chi0"], "environment.chi0"),
                        j["homogeneous"].get<bool>(), ancilla);
}

// Numeric table with a mandatory header; values printed with 17
// significant digits.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void write(std::ostream& os) const {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    char buf[64];
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", row[i]);
        os << (i ? "," : "") << buf;
      }
      os << '\n';
    }
  }

  void write_file(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path + " for writing");
    write(f);
  }
};

}  // namespace collmps::io
