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

// Discrete time-convolution master equation for collision models.
//
//   (rho((k+1) tau) - rho(k tau)) / tau = sum_{m=0}^{k} K_km[rho((k-m) tau)]
//
// The kernel follows from the time-dependent projection
// P_k[R] = tr_bond(R) ⊗ chi_k on the system-bond space:
//
//   K_k0 = (Phi_{k+1} - Id) / tau
//   K_km = tr_bond ∘ E^[k+1] ∘ Q_k ∘ E^[k] ∘ ... ∘ Q_{k-m+1} ∘ E^[k-m+1] [ · ⊗ chi_{k-m}] / tau
//
// with Q = Id - P and Phi_{k+1} the single-collision channel with the
// marginal of site k+1. The kernel is exact, so solve_nz reproduces the
// embedding up to roundoff.

#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collmps/embedding.hpp"
#include "collmps/error.hpp"
#include "collmps/linalg.hpp"
#include "collmps/mps.hpp"
#include "collmps/superoperator.hpp"

namespace collmps {

// E^[k] as a superoperator from H_S ⊗ H_bond#(k-1) to H_S ⊗ H_bond#k.
inline Superoperator propagator_superop(const CollisionModel& model, std::size_t k) {
  const auto kraus = kraus_operators(model, k);
  Superoperator out = Superoperator::zero(kraus.front().cols(), kraus.front().rows());
  for (const auto& a : kraus) out.matrix += kron(a.conjugate(), a);
  return out;
}

// P_k[R] = tr_bond(R) ⊗ chi_k on H_S ⊗ H_bond#k.
inline Superoperator projection_P(const BondState& chi, std::size_t system_dim) {
  const auto ds = static_cast<Eigen::Index>(system_dim);
  const Eigen::Index n = ds * chi.matrix.rows();
  return Superoperator::from_map(n, n, [&](const Matrix& x) {
    return kron(trace_second(x, ds), chi.matrix);
  });
}

inline Superoperator projection_Q(const BondState& chi, std::size_t system_dim) {
  const Superoperator p = projection_P(chi, system_dim);
  return Superoperator::identity(p.in_dim) - p;
}

namespace detail {

inline Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& x) {
  Matrix out = Matrix::Zero(kraus.front().rows(), kraus.front().rows());
  for (const auto& a : kraus) out.noalias() += a * x * a.adjoint();
  return out;
}

}  // namespace detail

// K_km for 0 <= m <= k. `chis` must hold chi_0..chi_k at least.
inline Superoperator memory_kernel(const CollisionModel& model, std::size_t k, std::size_t m,
                                   const std::vector<BondState>& chis) {
  if (m > k) {
    throw InvalidArgument("memory_kernel: need m <= k, got k=" + std::to_string(k) +
                          " m=" + std::to_string(m));
  }
  if (chis.size() < k + 1) throw InvalidArgument("memory_kernel: missing bond states");
  if (!model.env().has_site(k + 1)) {
    throw InvalidArgument("memory_kernel: collision " + std::to_string(k + 1) +
                          " is beyond the end of the environment");
  }
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const double inv_tau = 1.0 / model.tau();

  if (m == 0) {
    const Matrix rho_site = site_reduced_state(model.env(), chis[k]);
    Superoperator phi = uncorrelated_channel(model.unitary(k + 1), model.system_dim(), rho_site);
    return inv_tau * (phi - Superoperator::identity(ds));
  }

  std::vector<std::vector<Matrix>> kraus;
  kraus.reserve(m + 1);
  for (std::size_t j = k - m + 1; j <= k + 1; ++j) kraus.push_back(kraus_operators(model, j));

  return Superoperator::from_map(ds, ds, [&](const Matrix& e) {
    Matrix x = kron(e, chis[k - m].matrix);
    x = detail::apply_kraus(kraus[0], x);
    for (std::size_t j = k - m + 1; j <= k; ++j) {
      x -= kron(trace_second(x, ds), chis[j].matrix);
      x = detail::apply_kraus(kraus[j - (k - m)], x);
    }
    return Matrix(inv_tau * trace_second(x, ds));
  });
}

inline Superoperator memory_kernel(const CollisionModel& model, std::size_t k, std::size_t m) {
  return memory_kernel(model, k, m, bond_states(model.env(), k));
}

// Kernel entries K_km for k = 0..k_max-1 and m = 0..k.
class KernelTable {
 public:
  KernelTable() = default;
  explicit KernelTable(double tau) : tau_(tau) {}

  double tau() const { return tau_; }
  std::size_t rows() const { return entries_.size(); }

  void set(std::size_t k, std::size_t m, Superoperator s) {
    if (m > k) throw InvalidArgument("KernelTable::set: need m <= k");
    if (s.in_dim != s.out_dim) throw DimensionError("KernelTable::set: kernel must be square");
    if (entries_.size() <= k) entries_.resize(k + 1);
    if (entries_[k].size() <= m) entries_[k].resize(m + 1);
    entries_[k][m] = std::move(s);
  }

  bool has(std::size_t k, std::size_t m) const {
    return k < entries_.size() && m < entries_[k].size() && entries_[k][m].has_value();
  }

  const Superoperator& at(std::size_t k, std::size_t m) const {
    if (!has(k, m)) {
      throw InvalidArgument("KernelTable: missing entry K_" + std::to_string(k) + "," +
                            std::to_string(m));
    }
    return *entries_[k][m];
  }

 private:
  double tau_ = 1.0;
  std::vector<std::vector<std::optional<Superoperator>>> entries_;
};

inline KernelTable build_kernel_table(const CollisionModel& model, std::size_t k_max) {
  KernelTable table(model.tau());
  if (k_max == 0) return table;
  const auto chis = bond_states(model.env(), k_max - 1);
  for (std::size_t k = 0; k < k_max; ++k) {
    for (std::size_t m = 0; m <= k; ++m) table.set(k, m, memory_kernel(model, k, m, chis));
  }
  return table;
}

// Iterates the discrete master equation from rho_0 up to step k_max.
inline std::vector<Matrix> solve_nz(const KernelTable& kernels, const Matrix& rho0,
                                    std::size_t k_max) {
  std::vector<Matrix> out{rho0};
  out.reserve(k_max + 1);
  for (std::size_t k = 0; k < k_max; ++k) {
    Matrix inc = Matrix::Zero(rho0.rows(), rho0.cols());
    for (std::size_t m = 0; m <= k; ++m) inc += kernels.at(k, m).apply(out[k - m]);
    out.push_back(out[k] + kernels.tau() * inc);
  }
  return out;
}

namespace detail {

// Pads an operator on (d)^{⊗n} to (dm)^{⊗n} with zeros; n = 1 or 2.
inline Matrix pad_sites(const Matrix& rho, Eigen::Index d, Eigen::Index dm, int n_sites) {
  if (d == dm) return rho;
  if (n_sites == 1) {
    Matrix out = Matrix::Zero(dm, dm);
    out.topLeftCorner(d, d) = rho;
    return out;
  }
  Matrix out = Matrix::Zero(dm * dm, dm * dm);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index ip = 0; ip < d; ++ip) {
        for (Eigen::Index jp = 0; jp < d; ++jp) {
          out(i * dm + j, ip * dm + jp) = rho(i * d + j, ip * d + jp);
        }
      }
    }
  }
  return out;
}

// Operator X on H_S ⊗ H_mode lifted to H_S ⊗ H_site_a ⊗ H_site_b, acting on
// site a (second = false) or site b (second = true).
inline Matrix lift_to_two_sites(const Matrix& x, Eigen::Index ds, Eigen::Index dm, bool second) {
  if (!second) return kron(x, identity(dm));
  const Eigen::Index n = ds * dm * dm;
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index s = 0; s < ds; ++s) {
    for (Eigen::Index sp = 0; sp < ds; ++sp) {
      for (Eigen::Index a = 0; a < dm; ++a) {
        for (Eigen::Index b = 0; b < dm; ++b) {
          for (Eigen::Index bp = 0; bp < dm; ++bp) {
            out((s * dm + a) * dm + b, (sp * dm + a) * dm + bp) = x(s * dm + b, sp * dm + bp);
          }
        }
      }
    }
  }
  return out;
}

// X -> sum_ab c(a, b) [S_a, [S_b, X]]
inline Superoperator double_commutator_map(const std::vector<Matrix>& s, const Matrix& c,
                                           Eigen::Index ds) {
  return Superoperator::from_map(ds, ds, [&](const Matrix& x) {
    Matrix out = Matrix::Zero(ds, ds);
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = 0; b < s.size(); ++b) {
        const cplx w = c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (w == 0.0) continue;
        out += w * commutator(s[a], commutator(s[b], x));
      }
    }
    return out;
  });
}

}  // namespace detail

// Second-order memory kernel built from the connected two-point correlator
// of the environment, -g^2 tau C_{l l'}([H_l, [H_l', rho]]) with l = k+1,
// l' = k-m+1. H = sum_a S_a ⊗ E_a is expanded in a Hilbert-Schmidt
// orthonormal basis of mode operators (generalized Gell-Mann by default).
inline Superoperator second_order_kernel(const CollisionModel& model, std::size_t k,
                                         std::size_t m, const Matrix& h, double g,
                                         const std::vector<Matrix>& mode_basis = {}) {
  if (m < 1 || m > k) {
    throw InvalidArgument("second_order_kernel: need 1 <= m <= k, got k=" + std::to_string(k) +
                          " m=" + std::to_string(m));
  }
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const auto dm = static_cast<Eigen::Index>(model.mode_dim());
  const auto d = static_cast<Eigen::Index>(model.env().physical_dim());
  if (h.rows() != ds * dm || h.cols() != ds * dm) {
    throw DimensionError("second_order_kernel: H must act on H_S ⊗ H_mode");
  }
  if (hermiticity_residual(h) > 1e-12) {
    throw InvalidArgument("second_order_kernel: H is not Hermitian");
  }
  if (operator_norm(h) > 1.0 + 1e-12) {
    detail::warn("second_order_kernel: ||H|| > 1; the expansion assumes a normalized coupling");
  }
  const std::vector<Matrix> basis = mode_basis.empty() ? gell_mann_basis(dm) : mode_basis;

  const std::size_t later = k + 1;
  const std::size_t earlier = k - m + 1;
  const auto chis = bond_states(model.env(), earlier - 1);
  const Matrix joint = detail::pad_sites(
      two_site_reduced_state(model.env(), earlier, later, chis.back()), d, dm, 2);
  const Matrix rho_early = trace_second(joint, dm);
  const Matrix rho_late = trace_first(joint, dm);
  const Matrix connected = joint - kron(rho_early, rho_late);

  std::vector<Matrix> s;
  s.reserve(basis.size());
  for (const auto& e : basis) s.push_back(trace_second(h * kron(identity(ds), e.adjoint()), ds));

  // c(a, b) = tr[(E_b ⊗ E_a) connected]; a labels the later site.
  const auto nb = static_cast<Eigen::Index>(basis.size());
  Matrix c(nb, nb);
  for (Eigen::Index a = 0; a < nb; ++a) {
    for (Eigen::Index b = 0; b < nb; ++b) {
      c(a, b) = (kron(basis[b], basis[a]) * connected).trace();
    }
  }
  return (-g * g * model.tau()) * detail::double_commutator_map(s, c, ds);
}

// K_m = [<H>, [<H>, X]] - <[H_{m+1}, [H_1, X ⊗ I]]>_E at the stationary bond
// state of a homogeneous chain, evaluated on the full S ⊗ site ⊗ site space.
inline Superoperator stationary_correlation_kernel(const CollisionModel& model, std::size_t m) {
  if (m < 1) throw InvalidArgument("stationary_correlation_kernel: need m >= 1");
  if (!model.env().homogeneous()) {
    throw InvalidArgument("stationary_correlation_kernel: environment is not homogeneous");
  }
  if (!model.hamiltonian()) {
    throw InvalidArgument("stationary_correlation_kernel: model has no interaction Hamiltonian");
  }
  const Matrix& h = *model.hamiltonian();
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const auto dm = static_cast<Eigen::Index>(model.mode_dim());
  const auto d = static_cast<Eigen::Index>(model.env().physical_dim());
  const BondState chi{0, stationary_bond_state(model.env())};
  const Matrix rho1 = detail::pad_sites(site_reduced_state(model.env(), chi), d, dm, 1);
  const Matrix rho2 =
      detail::pad_sites(two_site_reduced_state(model.env(), 1, m + 1, chi), d, dm, 2);
  const Matrix mean_h = trace_second(h * kron(identity(ds), rho1), ds);
  const Matrix h_first = detail::lift_to_two_sites(h, ds, dm, false);
  const Matrix h_second = detail::lift_to_two_sites(h, ds, dm, true);
  const Matrix env_state = kron(identity(ds), rho2);
  return Superoperator::from_map(ds, ds, [&](const Matrix& x) {
    const Matrix big = kron(x, identity(dm * dm));
    const Matrix dc = commutator(h_second, commutator(h_first, big));
    return Matrix(commutator(mean_h, commutator(mean_h, x)) - trace_second(dc * env_state, ds));
  });
}

enum class StroboscopicForm {
  // Central-difference generator with log(Phi_12) / (2 tau) and the full
  // geometric sum of nonlocal kernels (default).
  kCumulant,
  // (Phi_12 - Id) / (2 tau) + (1/2) g^2 tau (±e^{1/l_corr} - 1)^{-1} L_nonlocal.
  kLiteral,
};

enum class TwoSiteState {
  kCorrelated,  // Phi_12 uses the joint two-site marginal
  kProduct,     // Phi_12 uses rho_1 ⊗ rho_2
};

struct StroboscopicOptions {
  StroboscopicForm form = StroboscopicForm::kCumulant;
  TwoSiteState two_site = TwoSiteState::kCorrelated;
};

struct StroboscopicGenerator {
  Superoperator generator;     // L
  Superoperator local;         // L_local
  Superoperator first_kernel;  // K_1
  Superoperator nonlocal_sum;  // sum_{m >= 1} K_m = K_1 / (1 - ratio)
  std::optional<Superoperator> nonlocal;  // L_nonlocal = K_1 / ratio, absent when ratio == 0
  TransferSpectrum spectrum;
};

// Two sequential collisions with sites 1, 2 at the stationary bond state.
inline Superoperator two_collision_channel(const CollisionModel& model, TwoSiteState which) {
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const auto dm = static_cast<Eigen::Index>(model.mode_dim());
  const auto d = static_cast<Eigen::Index>(model.env().physical_dim());
  const BondState chi{0, stationary_bond_state(model.env())};
  Matrix rho12;
  if (which == TwoSiteState::kCorrelated) {
    rho12 = two_site_reduced_state(model.env(), 1, 2, chi);
  } else {
    const Matrix r1 = site_reduced_state(model.env(), chi);
    rho12 = kron(r1, r1);
  }
  rho12 = detail::pad_sites(rho12, d, dm, 2);
  const Matrix& u = model.unitary(1);
  const Matrix u12 = detail::lift_to_two_sites(u, ds, dm, true) *
                     detail::lift_to_two_sites(u, ds, dm, false);
  return Superoperator::from_map(ds, ds, [&](const Matrix& x) {
    return trace_second(u12 * kron(x, rho12) * u12.adjoint(), ds);
  });
}

inline StroboscopicGenerator stroboscopic_generator(const CollisionModel& model,
                                                    StroboscopicOptions opts = {}) {
  if (!model.env().homogeneous()) {
    throw InvalidArgument("stroboscopic_generator: environment is not homogeneous");
  }
  const TransferSpectrum spec = transfer_spectrum(model.env());
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const double tau = model.tau();
  const double g = model.g();
  const Superoperator phi12 = two_collision_channel(model, opts.two_site);

  Superoperator local;
  if (opts.form == StroboscopicForm::kLiteral) {
    local = (0.5 / tau) * (phi12 - Superoperator::identity(ds));
  } else {
    local = Superoperator(ds, ds, Matrix(phi12.matrix.log()) / (2.0 * tau));
  }

  const Superoperator k1 = stationary_correlation_kernel(model, 1);
  const double x = spec.ratio();
  const Superoperator sum = (1.0 / (1.0 - x)) * k1;
  std::optional<Superoperator> nonlocal;
  if (x != 0.0) nonlocal = (1.0 / x) * k1;

  const double w = 0.5 * g * g * tau;
  Superoperator gen = opts.form == StroboscopicForm::kLiteral
                          ? local + w * sum
                          : local + w * (2.0 * sum - k1);
  const double leak = gen.trace_annihilation_residual();
  if (leak > 1e-10) {
    detail::warn("stroboscopic_generator: generator does not annihilate the trace (residual " +
                 std::to_string(leak) + ")");
  }
  return {std::move(gen), std::move(local), k1, sum, std::move(nonlocal), spec};
}

// rho(t) = exp(t L)[rho0].
inline Matrix evolve_gksl(const Superoperator& l, const Matrix& rho0, double t) {
  if (l.in_dim != l.out_dim) throw DimensionError("evolve_gksl: generator must be square");
  const Matrix prop = (t * l.matrix).exp();
  return unvec(prop * vec(rho0), l.out_dim);
}

}  // namespace collmps
