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

// Brute-force reference dynamics. The first n sites of the environment are
// contracted into one state vector together with the system and the
// collisions are applied as dense unitaries. Exponential in n; only meant
// for cross-checking the embedding on short chains.

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "collmps/embedding.hpp"
#include "collmps/error.hpp"
#include "collmps/linalg.hpp"
#include "collmps/mps.hpp"

namespace collmps {

inline constexpr std::size_t kOracleStateGuard = std::size_t{1} << 20;
inline constexpr std::size_t kOracleAllocGuard = std::size_t{1} << 24;

struct OracleRun {
  std::size_t n_sites = 0;
  std::size_t k_max = 0;
};

namespace detail {

inline std::size_t checked_pow(std::size_t base, std::size_t exp, std::size_t cap,
                               const std::string& what) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > cap / base) throw GuardError(what);
    out *= base;
  }
  return out;
}

// Environment amplitudes psi[(c0, x_1 .. x_n, b)] with x = (i, c) padded to
// the mode dimension: x = j * r + c, j < dm.
inline Vector environment_vector(const CollisionModel& model, std::size_t n,
                                 std::size_t& left_dim, std::size_t& right_dim) {
  const auto& env = model.env();
  const std::size_t d = env.physical_dim();
  const std::size_t r = env.ancilla_dim();
  const std::size_t dm = model.mode_dim();
  const std::size_t loc = dm * r;

  Eigen::SelfAdjointEigenSolver<Matrix> es(env.chi0());
  std::vector<Vector> cols;
  for (Eigen::Index c = 0; c < es.eigenvalues().size(); ++c) {
    const double p = es.eigenvalues()(c);
    if (p > 1e-15) cols.push_back(std::sqrt(p) * es.eigenvectors().col(c));
  }
  left_dim = cols.size();
  const auto d0 = static_cast<Eigen::Index>(env.bond_dim(0));

  // amp has layout [(c0, x_1..x_k), a_k] with a_k the open bond.
  Matrix amp(static_cast<Eigen::Index>(left_dim), d0);
  for (std::size_t c = 0; c < left_dim; ++c) amp.row(static_cast<Eigen::Index>(c)) = cols[c].transpose();
  for (std::size_t k = 1; k <= n; ++k) {
    const auto dk = static_cast<Eigen::Index>(env.bond_dim(k));
    Matrix next = Matrix::Zero(amp.rows() * static_cast<Eigen::Index>(loc), dk);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t c = 0; c < r; ++c) {
        const Matrix prod = amp * env.component(k, i, c);
        const auto x = static_cast<Eigen::Index>(i * r + c);
        for (Eigen::Index row = 0; row < amp.rows(); ++row) {
          next.row(row * static_cast<Eigen::Index>(loc) + x) = prod.row(row);
        }
      }
    }
    amp = std::move(next);
  }
  right_dim = static_cast<std::size_t>(amp.cols());
  Vector out(amp.size());
  for (Eigen::Index row = 0; row < amp.rows(); ++row) {
    for (Eigen::Index b = 0; b < amp.cols(); ++b) out(row * amp.cols() + b) = amp(row, b);
  }
  return out;
}

}  // namespace detail

// rho_S(k tau), k = 0..run.k_max, from exact unitary evolution of system plus
// the first run.n_sites environment sites.
inline std::vector<Matrix> brute_force_trajectory(const CollisionModel& model, const Matrix& rho0,
                                                  const OracleRun& run) {
  const auto& env = model.env();
  if (run.k_max > run.n_sites) {
    throw InvalidArgument("brute_force_trajectory: k_max exceeds the number of contracted sites");
  }
  if (!env.has_site(run.n_sites)) {
    throw InvalidArgument("brute_force_trajectory: environment has fewer than " +
                          std::to_string(run.n_sites) + " sites");
  }
  if (!is_density_matrix(rho0, 1e-10)) {
    throw InvalidArgument("brute_force_trajectory: initial state is not a density matrix");
  }
  const std::size_t ds = model.system_dim();
  const std::size_t dm = model.mode_dim();
  const std::size_t r = env.ancilla_dim();
  const std::size_t loc = dm * r;
  const std::string too_big = "brute_force_trajectory: state vector for " +
                              std::to_string(run.n_sites) + " sites exceeds the size guard";
  const std::size_t phys = detail::checked_pow(env.local_dim(), run.n_sites, kOracleStateGuard, too_big);
  if (phys * ds * env.bond_dim(0) > kOracleStateGuard) throw GuardError(too_big);
  const std::size_t padded = detail::checked_pow(loc, run.n_sites, kOracleAllocGuard, too_big);
  std::size_t left = 0;
  std::size_t right = 0;
  if (padded * ds * env.bond_dim(0) * env.bond_dim(run.n_sites) > kOracleAllocGuard) {
    throw GuardError(too_big);
  }
  const Vector psi_env = detail::environment_vector(model, run.n_sites, left, right);

  // Full layout [c0][s][x_1..x_n][b].
  const std::size_t tail = padded * right;
  const std::size_t block = ds * tail;
  const auto total = static_cast<Eigen::Index>(left * block);

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho0);
  std::vector<Matrix> out(run.k_max + 1, Matrix::Zero(static_cast<Eigen::Index>(ds),
                                                      static_cast<Eigen::Index>(ds)));
  const auto sdim = static_cast<Eigen::Index>(ds);
  for (Eigen::Index q = 0; q < es.eigenvalues().size(); ++q) {
    const double w = es.eigenvalues()(q);
    if (w <= 1e-15) continue;
    const Vector phi = es.eigenvectors().col(q);
    Vector psi(total);
    for (std::size_t c0 = 0; c0 < left; ++c0) {
      for (std::size_t s = 0; s < ds; ++s) {
        for (std::size_t t = 0; t < tail; ++t) {
          psi(static_cast<Eigen::Index>(c0 * block + s * tail + t)) =
              phi(static_cast<Eigen::Index>(s)) * psi_env(static_cast<Eigen::Index>(c0 * tail + t));
        }
      }
    }
    auto accumulate = [&](std::size_t k) {
      Matrix rho = Matrix::Zero(sdim, sdim);
      for (std::size_t c0 = 0; c0 < left; ++c0) {
        Eigen::Map<const Matrix> m(psi.data() + c0 * block, static_cast<Eigen::Index>(tail), sdim);
        rho += (m.transpose() * m.conjugate());
      }
      out[k] += w * rho;
    };
    accumulate(0);
    for (std::size_t k = 1; k <= run.k_max; ++k) {
      const Matrix& u = model.unitary(k);
      std::size_t stride = right;
      for (std::size_t j = k; j < run.n_sites; ++j) stride *= loc;
      const std::size_t outer = tail / (stride * loc);
      Vector v(static_cast<Eigen::Index>(ds * dm));
      for (std::size_t c0 = 0; c0 < left; ++c0) {
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t c = 0; c < r; ++c) {
            for (std::size_t in = 0; in < stride; ++in) {
              auto index = [&](std::size_t s, std::size_t j) {
                return static_cast<Eigen::Index>(c0 * block + s * tail +
                                                 (o * loc + j * r + c) * stride + in);
              };
              for (std::size_t s = 0; s < ds; ++s) {
                for (std::size_t j = 0; j < dm; ++j) v(static_cast<Eigen::Index>(s * dm + j)) = psi(index(s, j));
              }
              const Vector y = u * v;
              for (std::size_t s = 0; s < ds; ++s) {
                for (std::size_t j = 0; j < dm; ++j) psi(index(s, j)) = y(static_cast<Eigen::Index>(s * dm + j));
              }
            }
          }
        }
      }
      accumulate(k);
    }
  }
  return out;
}

}  // namespace collmps
