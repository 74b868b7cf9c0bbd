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

#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "collmps/embedding.hpp"
#include "collmps/linalg.hpp"
#include "collmps/models.hpp"

namespace collmps::testing {

inline Matrix random_matrix(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(n(rng), n(rng));
  }
  return m;
}

inline Matrix random_density(std::mt19937& rng, Eigen::Index n) {
  const Matrix g = random_matrix(rng, n, n);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Matrix random_unitary(std::mt19937& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  return qr.householderQ();
}

inline std::vector<double> normalized_profile(std::size_t n) {
  auto p = models::default_photon_profile(n);
  double n2 = 0.0;
  for (double a : p) n2 += a * a;
  for (double& a : p) a /= std::sqrt(n2);
  return p;
}

// Every case-study model with its interaction.
inline std::vector<std::pair<std::string, CollisionModel>> zoo(std::size_t finite_sites = 8) {
  return {{"two_photon", models::two_photon_model(0.3, 2.3, 59.9)},
          {"cluster", models::cluster_model(0.6, 5)},
          {"aklt_heisenberg", models::aklt_heisenberg_model(0.5)},
          {"aklt_controlled", models::aklt_controlled_model(0.1)},
          {"ghz", models::ghz_model(finite_sites, 0.5)},
          {"single_photon", models::single_photon_model(normalized_profile(finite_sites), 0.5)}};
}

}  // namespace collmps::testing
