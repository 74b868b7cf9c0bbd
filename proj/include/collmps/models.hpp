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

// Case-study environments, interactions and closed-form references.
//
// Qubit systems use the basis (|g>, |e>) = (0, 1). Spin-1 modes use the
// J_z basis ordered (+1, 0, -1). Every interaction is a dimensionless
// Hermitian H with U = exp(-i g tau H) and ||H|| <= 1.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "collmps/embedding.hpp"
#include "collmps/error.hpp"
#include "collmps/linalg.hpp"
#include "collmps/mps.hpp"

namespace collmps::models {

inline Matrix sigma_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

inline Matrix sigma_y() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = -kI;
  m(1, 0) = kI;
  return m;
}

inline Matrix sigma_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

// |e><g|
inline Matrix raising() { return unit_matrix(2, 1, 0); }

inline Matrix ground_state() { return unit_matrix(2, 0, 0); }
inline Matrix excited_state() { return unit_matrix(2, 1, 1); }

// Bosonic annihilation operator truncated to photon numbers 0..dim-1.
inline Matrix annihilation(Eigen::Index dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

struct Spin1 {
  Matrix jx, jy, jz;
};

inline Spin1 spin1() {
  const double s = std::numbers::sqrt2;
  Matrix jp = Matrix::Zero(3, 3);
  jp(0, 1) = s;
  jp(1, 2) = s;
  const Matrix jm = jp.adjoint();
  Spin1 out;
  out.jx = 0.5 * (jp + jm);
  out.jy = -0.5 * kI * (jp - jm);
  out.jz = Matrix::Zero(3, 3);
  out.jz(0, 0) = 1.0;
  out.jz(2, 2) = -1.0;
  return out;
}

// ----------------------------------------------------------------------------
// Environments

// Two-photon wavepacket of exponentially decaying photons emitted in order;
// rank 3, chi0 = diag(1, 0, 0).
inline MpsEnvironment two_photon_env(double tau_over_t1, double tau_over_t2) {
  if (!(tau_over_t1 > 0.0) || !(tau_over_t2 > 0.0)) {
    throw InvalidArgument("two_photon_env: decay rates must be positive");
  }
  const double e1 = std::exp(-tau_over_t1);
  const double e2 = std::exp(-tau_over_t2);
  Matrix b0 = Matrix::Zero(3, 3);
  b0(0, 0) = e1;
  b0(1, 1) = e2;
  b0(2, 2) = 1.0;
  Matrix b1 = Matrix::Zero(3, 3);
  b1(0, 1) = std::sqrt(1.0 - e1 * e1);
  b1(1, 2) = std::sqrt(1.0 - e2 * e2);
  Matrix chi0 = Matrix::Zero(3, 3);
  chi0(0, 0) = 1.0;
  return MpsEnvironment({{b0, b1}}, chi0, true);
}

// Linear photonic cluster state, rank 2, chi0 = diag(1, 0).
inline MpsEnvironment cluster_env() {
  const double h = std::sqrt(0.5);
  Matrix b0 = Matrix::Zero(2, 2);
  b0(0, 0) = h;
  b0(1, 0) = h;
  Matrix b1 = Matrix::Zero(2, 2);
  b1(0, 1) = h;
  b1(1, 1) = -h;
  Matrix chi0 = Matrix::Zero(2, 2);
  chi0(0, 0) = 1.0;
  return MpsEnvironment({{b0, b1}}, chi0, true);
}

// AKLT chain entered in the bulk: physical order (+1, 0, -1), chi0 is the
// stationary bond state of the transfer map.
inline MpsEnvironment aklt_env() {
  const double a = std::sqrt(2.0 / 3.0);
  const double b = 1.0 / std::sqrt(3.0);
  Matrix bp = Matrix::Zero(2, 2);
  bp(0, 1) = a;
  Matrix b0 = Matrix::Zero(2, 2);
  b0(0, 0) = -b;
  b0(1, 1) = b;
  Matrix bm = Matrix::Zero(2, 2);
  bm(1, 0) = -a;
  MpsEnvironment bare({{bp, b0, bm}}, identity(2) / 2.0, true);
  return MpsEnvironment({{bp, b0, bm}}, stationary_bond_state(bare), true);
}

// (|0...0> + |1...1>) / sqrt(2) on n qubits.
inline MpsEnvironment ghz_env(std::size_t n) {
  if (n < 2) throw InvalidArgument("ghz_env: need at least two sites");
  const double h = std::sqrt(0.5);
  std::vector<SiteTensor> sites;
  Matrix f0 = Matrix::Zero(1, 2), f1 = Matrix::Zero(1, 2);
  f0(0, 0) = h;
  f1(0, 1) = h;
  sites.push_back({f0, f1});
  for (std::size_t k = 2; k < n; ++k) sites.push_back({unit_matrix(2, 0, 0), unit_matrix(2, 1, 1)});
  Matrix l0 = Matrix::Zero(2, 1), l1 = Matrix::Zero(2, 1);
  l0(0, 0) = 1.0;
  l1(1, 0) = 1.0;
  sites.push_back({l0, l1});
  return MpsEnvironment(std::move(sites), Matrix::Identity(1, 1), false);
}

// Translation-invariant GHZ bulk: B^i = |i><i|, chi0 = I/2. Its transfer
// matrix has a doubly degenerate unit eigenvalue.
inline MpsEnvironment ghz_bulk_env() {
  return MpsEnvironment({{unit_matrix(2, 0, 0), unit_matrix(2, 1, 1)}}, identity(2) / 2.0, true);
}

// sum_k c_k |0..1_k..0> with the amplitudes normalized; rank 2.
inline MpsEnvironment single_photon_env(const std::vector<cplx>& amplitudes) {
  const std::size_t n = amplitudes.size();
  if (n < 2) throw InvalidArgument("single_photon_env: need at least two sites");
  double norm2 = 0.0;
  for (const auto& c : amplitudes) norm2 += std::norm(c);
  if (norm2 == 0.0) throw InvalidArgument("single_photon_env: amplitude vector is zero");
  // Bond 0: photon still ahead, bond 1: photon already emitted.
  std::vector<SiteTensor> raw;
  for (std::size_t k = 0; k < n; ++k) {
    Matrix b0 = identity(2);
    Matrix b1 = Matrix::Zero(2, 2);
    b1(0, 1) = amplitudes[k];
    if (k == 0) {
      raw.push_back({b0.topRows(1), b1.topRows(1)});
    } else if (k + 1 == n) {
      raw.push_back({b0.rightCols(1), b1.rightCols(1)});
    } else {
      raw.push_back({b0, b1});
    }
  }
  return right_canonicalize(raw);
}

inline MpsEnvironment single_photon_env(const std::vector<double>& amplitudes) {
  return single_photon_env(std::vector<cplx>(amplitudes.begin(), amplitudes.end()));
}

// Homogeneous product of copies of a pure single-site state.
inline MpsEnvironment product_env(const Vector& amplitudes) {
  const double nrm = amplitudes.norm();
  if (nrm == 0.0) throw InvalidArgument("product_env: zero state");
  SiteTensor s;
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
    s.push_back(Matrix::Constant(1, 1, amplitudes(i) / nrm));
  }
  return MpsEnvironment({s}, Matrix::Identity(1, 1), true);
}

// ----------------------------------------------------------------------------
// Interactions (dimensionless Hermitian generators on H_S ⊗ H_mode)

// Excitation-preserving exchange: -i theta H = theta (|e><g| ⊗ a - |g><e| ⊗ a^†),
// so a photon is absorbed while the qubit is excited.
inline Matrix exchange_hamiltonian(Eigen::Index mode_dim) {
  if (mode_dim < 2) throw InvalidArgument("exchange_hamiltonian: mode_dim must be >= 2");
  const Matrix a = annihilation(mode_dim);
  const Matrix sp = raising();
  return kI * (kron(sp, a) - kron(sp.adjoint(), a.adjoint()));
}

// Cluster-state coupling: -i theta H = theta (|e><g| + |g><e|) ⊗ (a - a^†).
inline Matrix cluster_hamiltonian(Eigen::Index mode_dim) {
  if (mode_dim < 2) throw InvalidArgument("cluster_hamiltonian: mode_dim must be >= 2");
  const Matrix a = annihilation(mode_dim);
  return kI * kron(sigma_x(), a - a.adjoint());
}

// (1/2) sum_a sigma_a ⊗ J_a; spectrum {1/2, -1}.
inline Matrix heisenberg_hamiltonian() {
  const Spin1 j = spin1();
  return 0.5 * (kron(sigma_x(), j.jx) + kron(sigma_y(), j.jy) + kron(sigma_z(), j.jz));
}

// sigma_x ⊗ |+1><+1| + sigma_y ⊗ |0><0| + sigma_z ⊗ |-1><-1|
inline Matrix controlled_hamiltonian() {
  return kron(sigma_x(), unit_matrix(3, 0, 0)) + kron(sigma_y(), unit_matrix(3, 1, 1)) +
         kron(sigma_z(), unit_matrix(3, 2, 2));
}

struct InteractionUnitaries {
  Matrix exchange;
  Matrix cluster;
  Matrix heisenberg;
  Matrix controlled;
};

// The four case-study unitaries. Exchange and cluster couplings use the
// truncated Fock space of dimension mode_dim; the spin-1 ones are 6 x 6.
inline InteractionUnitaries interaction_unitaries(double g_tau, Eigen::Index mode_dim) {
  if (mode_dim < 2) throw InvalidArgument("interaction_unitaries: mode_dim must be >= 2");
  return {expm_hermitian_generator(exchange_hamiltonian(mode_dim), g_tau),
          expm_hermitian_generator(cluster_hamiltonian(mode_dim), g_tau),
          expm_hermitian_generator(heisenberg_hamiltonian(), g_tau),
          expm_hermitian_generator(controlled_hamiltonian(), g_tau)};
}

// ----------------------------------------------------------------------------
// Closed forms for the AKLT + Heisenberg depolarization parameter

inline double aklt_exact_q(std::size_t k, double g_tau) {
  const double c = std::cos(1.5 * g_tau);
  const double s = std::sin(1.5 * g_tau);
  const double x = 2.0 + 7.0 * c;
  const double y = 7.0 + 2.0 * c;
  const double z = 2.0 * std::sqrt(y * y + 27.0 * s * s);
  const auto kk = static_cast<double>(k);
  return (0.5 + x / z) * std::pow((y + z) / 27.0, kk) +
         (0.5 - x / z) * std::pow((y - z) / 27.0, kk);
}

inline double aklt_markov_q(std::size_t k, double g_tau) {
  return std::pow((11.0 + 16.0 * std::cos(1.5 * g_tau)) / 27.0, static_cast<double>(k));
}

// ----------------------------------------------------------------------------
// Complete case-study models

inline constexpr std::size_t kDefaultClusterCutoff = 12;

inline CollisionModel two_photon_model(double g_tau, double g_t1, double g_t2, double tau = 1.0) {
  return CollisionModel::from_hamiltonian(two_photon_env(g_tau / g_t1, g_tau / g_t2),
                                          exchange_hamiltonian(3), 2, 3, g_tau, tau);
}

inline CollisionModel cluster_model(double g_tau, std::size_t cutoff = kDefaultClusterCutoff,
                                    double tau = 1.0) {
  const auto dm = static_cast<Eigen::Index>(cutoff);
  return CollisionModel::from_hamiltonian(cluster_env(), cluster_hamiltonian(dm), 2, cutoff,
                                          g_tau, tau);
}

inline CollisionModel aklt_heisenberg_model(double g_tau, double tau = 1.0) {
  return CollisionModel::from_hamiltonian(aklt_env(), heisenberg_hamiltonian(), 2, 3, g_tau, tau);
}

inline CollisionModel aklt_controlled_model(double g_tau, double tau = 1.0) {
  return CollisionModel::from_hamiltonian(aklt_env(), controlled_hamiltonian(), 2, 3, g_tau, tau);
}

inline CollisionModel ghz_model(std::size_t n, double g_tau, double tau = 1.0) {
  return CollisionModel::from_hamiltonian(ghz_env(n), exchange_hamiltonian(2), 2, 2, g_tau, tau);
}

// Default single-photon profile c_k ∝ exp(-0.3 k), k = 1..n.
inline std::vector<double> default_photon_profile(std::size_t n) {
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = std::exp(-0.3 * static_cast<double>(k + 1));
  return c;
}

inline CollisionModel single_photon_model(const std::vector<double>& amplitudes, double g_tau,
                                          double tau = 1.0) {
  return CollisionModel::from_hamiltonian(single_photon_env(amplitudes), exchange_hamiltonian(2),
                                          2, 2, g_tau, tau);
}

}  // namespace collmps::models
