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

// Markovian embedding of a collision model with an MPS environment.
//
// The system together with the current MPS bond forms a joint state R(k) on
// H_S ⊗ H_bond#k. One collision maps R(k-1) to R(k) with Kraus operators
//
//   A_j = sum_i <j|U_k|i> ⊗ (B^[k],i)^T,
//
// where <j|U_k|i> is the d_S x d_S block of the collision unitary between mode
// basis states i and j. The system state is tr_bond R(k).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collmps/error.hpp"
#include "collmps/linalg.hpp"
#include "collmps/mps.hpp"
#include "collmps/superoperator.hpp"

namespace collmps {

class CollisionModel {
 public:
  CollisionModel() = default;

  // `unitaries` holds one matrix (used for every collision) or one per
  // collision k = 1..n. Each acts on H_S ⊗ H_mode with the system index most
  // significant.
  CollisionModel(MpsEnvironment env, std::vector<Matrix> unitaries, std::size_t system_dim,
                 std::size_t mode_dim, double g_tau, double tau = 1.0,
                 std::optional<Matrix> hamiltonian = std::nullopt)
      : env_(std::move(env)),
        unitaries_(std::move(unitaries)),
        system_dim_(system_dim),
        mode_dim_(mode_dim),
        g_tau_(g_tau),
        tau_(tau),
        hamiltonian_(std::move(hamiltonian)) {
    validate();
  }

  // U = exp(-i g_tau H) for a dimensionless Hermitian H on H_S ⊗ H_mode.
  static CollisionModel from_hamiltonian(MpsEnvironment env, const Matrix& h,
                                         std::size_t system_dim, std::size_t mode_dim,
                                         double g_tau, double tau = 1.0) {
    Matrix u = expm_hermitian_generator(h, g_tau);
    return CollisionModel(std::move(env), {std::move(u)}, system_dim, mode_dim, g_tau, tau, h);
  }

  const MpsEnvironment& env() const { return env_; }
  std::size_t system_dim() const { return system_dim_; }
  std::size_t mode_dim() const { return mode_dim_; }
  double g_tau() const { return g_tau_; }
  double tau() const { return tau_; }
  double g() const { return g_tau_ / tau_; }
  const std::optional<Matrix>& hamiltonian() const { return hamiltonian_; }

  // Number of collisions available; empty for homogeneous environments.
  std::optional<std::size_t> length() const { return env_.length(); }

  const Matrix& unitary(std::size_t k) const {
    if (k == 0) throw InvalidArgument("CollisionModel::unitary: collisions are numbered from 1");
    if (unitaries_.size() == 1) return unitaries_.front();
    if (k > unitaries_.size()) {
      throw InvalidArgument("CollisionModel::unitary: no unitary for collision " +
                            std::to_string(k));
    }
    return unitaries_[k - 1];
  }

  // Same model with a different environment (e.g. its decorrelated version).
  CollisionModel with_env(MpsEnvironment env) const {
    CollisionModel m = *this;
    m.env_ = std::move(env);
    m.validate();
    return m;
  }

 private:
  void validate() const {
    if (system_dim_ == 0 || mode_dim_ == 0) throw InvalidArgument("CollisionModel: zero dimension");
    if (mode_dim_ < env_.physical_dim()) {
      throw DimensionError("CollisionModel: mode_dim " + std::to_string(mode_dim_) +
                           " is smaller than the environment's physical dimension " +
                           std::to_string(env_.physical_dim()));
    }
    if (!(tau_ > 0.0)) throw InvalidArgument("CollisionModel: tau must be positive");
    if (unitaries_.empty()) throw InvalidArgument("CollisionModel: no interaction unitary");
    const auto n = static_cast<Eigen::Index>(system_dim_ * mode_dim_);
    for (const auto& u : unitaries_) {
      if (u.rows() != n || u.cols() != n) {
        throw DimensionError("CollisionModel: unitary must be " + std::to_string(n) + "x" +
                             std::to_string(n));
      }
      const double res = (u.adjoint() * u - identity(n)).norm();
      if (res > 1e-12) {
        throw InvalidArgument("CollisionModel: interaction is not unitary (residual " +
                              std::to_string(res) + ")");
      }
    }
    if (hamiltonian_ && (hamiltonian_->rows() != n || hamiltonian_->cols() != n)) {
      throw DimensionError("CollisionModel: Hamiltonian shape mismatch");
    }
    const double rc = check_right_canonical(env_);
    if (rc > 1e-10) {
      throw InvalidArgument("CollisionModel: environment is not right-canonical (residual " +
                            std::to_string(rc) + ")");
    }
  }

  MpsEnvironment env_;
  std::vector<Matrix> unitaries_;
  std::size_t system_dim_ = 0;
  std::size_t mode_dim_ = 0;
  double g_tau_ = 0.0;
  double tau_ = 1.0;
  std::optional<Matrix> hamiltonian_;
};

// Joint system-bond state R(k); factor dims are {d_S, D_k}.
struct SystemBondState {
  std::size_t step = 0;
  MultiIndexOperator state;
};

// d_S x d_S block <j|U|i> of an operator on H_S ⊗ H_mode.
inline Matrix mode_block(const Matrix& u, std::size_t system_dim, std::size_t mode_dim,
                         std::size_t j, std::size_t i) {
  const auto ds = static_cast<Eigen::Index>(system_dim);
  const auto dm = static_cast<Eigen::Index>(mode_dim);
  Matrix out(ds, ds);
  for (Eigen::Index s = 0; s < ds; ++s) {
    for (Eigen::Index sp = 0; sp < ds; ++sp) {
      out(s, sp) = u(s * dm + static_cast<Eigen::Index>(j), sp * dm + static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

// Kraus operators of collision k (1-based), mapping H_S ⊗ H_bond#(k-1) to
// H_S ⊗ H_bond#k. One operator per (mode state j, ancilla c); physical
// indices beyond the environment's dimension are zero padding.
inline std::vector<Matrix> kraus_operators(const CollisionModel& model, std::size_t k) {
  const auto& env = model.env();
  if (!env.has_site(k)) {
    throw InvalidArgument("kraus_operators: collision " + std::to_string(k) +
                          " is beyond the end of the environment");
  }
  const Matrix& u = model.unitary(k);
  const std::size_t ds = model.system_dim();
  const std::size_t dm = model.mode_dim();
  const std::size_t d = env.physical_dim();
  const std::size_t r = env.ancilla_dim();
  const auto rows = static_cast<Eigen::Index>(ds * env.bond_dim(k));
  const auto cols = static_cast<Eigen::Index>(ds * env.bond_dim(k - 1));

  std::vector<Matrix> blocks;
  blocks.reserve(dm * d);
  for (std::size_t j = 0; j < dm; ++j) {
    for (std::size_t i = 0; i < d; ++i) blocks.push_back(mode_block(u, ds, dm, j, i));
  }
  std::vector<Matrix> out;
  out.reserve(dm * r);
  for (std::size_t j = 0; j < dm; ++j) {
    for (std::size_t c = 0; c < r; ++c) {
      Matrix a = Matrix::Zero(rows, cols);
      for (std::size_t i = 0; i < d; ++i) {
        a += kron(blocks[j * d + i], env.component(k, i, c).transpose());
      }
      out.push_back(std::move(a));
    }
  }
  return out;
}

// || sum_j A_j^† A_j - I ||_F
inline double kraus_completeness_residual(const std::vector<Matrix>& kraus) {
  if (kraus.empty()) return 0.0;
  Matrix acc = Matrix::Zero(kraus.front().cols(), kraus.front().cols());
  for (const auto& a : kraus) acc.noalias() += a.adjoint() * a;
  return (acc - identity(acc.rows())).norm();
}

inline SystemBondState initial_system_bond_state(const CollisionModel& model, const Matrix& rho_s) {
  if (static_cast<std::size_t>(rho_s.rows()) != model.system_dim() || rho_s.cols() != rho_s.rows()) {
    throw DimensionError("initial_system_bond_state: system state has wrong shape");
  }
  return {0, MultiIndexOperator({model.system_dim(), model.env().bond_dim(0)},
                                kron(rho_s, model.env().chi0()))};
}

inline SystemBondState step(const CollisionModel& model, const SystemBondState& r) {
  const std::size_t k = r.step + 1;
  if (!model.env().has_site(k)) {
    throw InvalidArgument("step: collision " + std::to_string(k) +
                          " exceeds the finite environment length");
  }
  if (r.state.dims.size() != 2 || r.state.dims[0] != model.system_dim() ||
      r.state.dims[1] != model.env().bond_dim(k - 1)) {
    throw DimensionError("step: system-bond state does not match bond " + std::to_string(k - 1));
  }
  const auto kraus = kraus_operators(model, k);
  Matrix next = Matrix::Zero(kraus.front().rows(), kraus.front().rows());
  for (const auto& a : kraus) next.noalias() += a * r.state.matrix * a.adjoint();
  return {k, MultiIndexOperator({model.system_dim(), model.env().bond_dim(k)}, std::move(next))};
}

inline Matrix system_state(const SystemBondState& r) {
  return trace_second(r.state.matrix, static_cast<Eigen::Index>(r.state.dims.at(0)));
}

inline Matrix bond_marginal(const SystemBondState& r) {
  return trace_first(r.state.matrix, static_cast<Eigen::Index>(r.state.dims.at(0)));
}

namespace detail {

// Positivity and normalization check on an evolved state. Throws when built
// with COLLMPS_STRICT_CHECKS, warns otherwise.
inline void check_physical(const Matrix& rho, double tol, const std::string& where) {
  const double tr_err = std::abs(rho.trace() - 1.0);
  const double herm = hermiticity_residual(rho);
  const double lo = min_eigenvalue(rho);
  if (tr_err <= tol && herm <= tol && lo >= -tol) return;
  const std::string msg = where + ": state left the physical set (trace error " +
                          std::to_string(tr_err) + ", hermiticity " + std::to_string(herm) +
                          ", min eigenvalue " + std::to_string(lo) + ")";
#ifdef COLLMPS_STRICT_CHECKS
  throw GuardError(msg);
#else
  warn(msg);
#endif
}

}  // namespace detail

// rho_S(k tau) for k = 0..k_max.
inline std::vector<Matrix> trajectory(const CollisionModel& model, const Matrix& rho_s0,
                                      std::size_t k_max, double positivity_tol = 1e-10) {
  if (!is_density_matrix(rho_s0, 1e-10)) {
    throw InvalidArgument("trajectory: initial system state is not a density matrix");
  }
  std::vector<Matrix> out;
  out.reserve(k_max + 1);
  SystemBondState r = initial_system_bond_state(model, rho_s0);
  out.push_back(system_state(r));
  for (std::size_t k = 1; k <= k_max; ++k) {
    r = step(model, r);
    detail::check_physical(r.state.matrix, positivity_tol, "trajectory step " + std::to_string(k));
    out.push_back(system_state(r));
  }
  return out;
}

// tr(rho O) per step. The imaginary part must vanish to within 1e-10.
inline std::vector<double> observable_series(const std::vector<Matrix>& traj, const Matrix& o) {
  if (hermiticity_residual(o) > 1e-12) {
    throw InvalidArgument("observable_series: observable is not Hermitian");
  }
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& rho : traj) {
    if (rho.rows() != o.rows()) throw DimensionError("observable_series: shape mismatch");
    const cplx v = (rho * o).trace();
    if (std::abs(v.imag()) > 1e-10) {
      throw InvalidArgument("observable_series: expectation value has imaginary part " +
                            std::to_string(v.imag()));
    }
    out.push_back(v.real());
  }
  return out;
}

// Single-particle channel rho_S -> tr_mode[U (rho_S ⊗ rho_mode) U^†]. A
// smaller rho_mode is zero padded up to the mode dimension.
inline Superoperator uncorrelated_channel(const Matrix& u, std::size_t system_dim,
                                          const Matrix& rho_mode) {
  const auto ds = static_cast<Eigen::Index>(system_dim);
  const Eigen::Index dm = u.rows() / ds;
  if (rho_mode.rows() > dm) throw DimensionError("uncorrelated_channel: mode state too large");
  Matrix padded = Matrix::Zero(dm, dm);
  padded.topLeftCorner(rho_mode.rows(), rho_mode.cols()) = rho_mode;
  return Superoperator::from_map(ds, ds, [&](const Matrix& x) {
    return trace_second(u * kron(x, padded) * u.adjoint(), ds);
  });
}

// Compares observables of a run at `cutoff` against one at twice the cutoff
// and throws GuardError when they differ by more than tol. Returns the
// largest shift seen.
inline double check_cutoff_convergence(
    const std::function<CollisionModel(std::size_t)>& make_model, std::size_t cutoff,
    const Matrix& rho_s0, std::size_t k_max, const std::vector<Matrix>& observables,
    double tol = 1e-6) {
  const auto lo = trajectory(make_model(cutoff), rho_s0, k_max);
  const auto hi = trajectory(make_model(2 * cutoff), rho_s0, k_max);
  double worst = 0.0;
  for (const auto& o : observables) {
    const auto a = observable_series(lo, o);
    const auto b = observable_series(hi, o);
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  if (worst > tol) {
    throw GuardError("Fock cutoff " + std::to_string(cutoff) +
                     " is not converged: observables shift by " + std::to_string(worst) +
                     " when the cutoff is doubled (tolerance " + std::to_string(tol) + ")");
  }
  return worst;
}

}  // namespace collmps
