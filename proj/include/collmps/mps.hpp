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

// Correlated environments as right-canonical matrix product states.
//
// Site k (1-based) carries a tensor B^[k] with one D_{k-1} x D_k matrix per
// physical index. Contractions always start from a bond density matrix chi on
// the left and close the open right bond with an identity line, which is
// exact for right-canonical tensors:
//
//   rho_{1..k}(I, I') = tr[ (B^{I_k})^T ... (B^{I_1})^T chi_0 (B^{I'_1})^* ... (B^{I'_k})^* ]
//
// The physical leg may carry a spectator ancilla factor of dimension r: the
// component list then has d * r entries with index i * r + c, where only i is
// seen by the interaction and c is always traced out. This is how product
// environments with mixed single-site states keep bond dimension one.

#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collmps/error.hpp"
#include "collmps/linalg.hpp"

namespace collmps {

// One matrix per physical index.
using SiteTensor = std::vector<Matrix>;

class MpsEnvironment {
 public:
  MpsEnvironment() = default;

  // Finite chains list every site; homogeneous chains list exactly one site
  // that is reused for all k.
  MpsEnvironment(std::vector<SiteTensor> sites, Matrix chi0, bool homogeneous,
                 std::size_t ancilla_dim = 1)
      : sites_(std::move(sites)),
        chi0_(std::move(chi0)),
        homogeneous_(homogeneous),
        ancilla_dim_(ancilla_dim) {
    validate();
  }

  bool homogeneous() const { return homogeneous_; }

  // Number of sites of a finite chain; empty for homogeneous chains.
  std::optional<std::size_t> length() const {
    if (homogeneous_) return std::nullopt;
    return sites_.size();
  }

  bool has_site(std::size_t k) const {
    return k >= 1 && (homogeneous_ || k <= sites_.size());
  }

  const SiteTensor& site(std::size_t k) const {
    if (!has_site(k)) {
      throw InvalidArgument("MpsEnvironment: site " + std::to_string(k) +
                            " does not exist (chain length " + std::to_string(sites_.size()) +
                            ")");
    }
    return homogeneous_ ? sites_.front() : sites_[k - 1];
  }

  const std::vector<SiteTensor>& sites() const { return sites_; }

  // Dimension of the physical leg seen by the interaction.
  std::size_t physical_dim() const { return sites_.front().size() / ancilla_dim_; }
  std::size_t ancilla_dim() const { return ancilla_dim_; }
  // Number of components per site (physical_dim * ancilla_dim).
  std::size_t local_dim() const { return sites_.front().size(); }

  // Bond dimension D_k between sites k and k+1 (D_0 is the chi0 dimension).
  std::size_t bond_dim(std::size_t k) const {
    if (k == 0) return static_cast<std::size_t>(chi0_.rows());
    return static_cast<std::size_t>(site(k).front().cols());
  }

  const Matrix& chi0() const { return chi0_; }

  const Matrix& component(std::size_t k, std::size_t i, std::size_t c = 0) const {
    return site(k)[i * ancilla_dim_ + c];
  }

 private:
  void validate() const {
    if (sites_.empty()) throw InvalidArgument("MpsEnvironment: no sites");
    if (homogeneous_ && sites_.size() != 1) {
      throw InvalidArgument("MpsEnvironment: homogeneous chain takes exactly one site tensor");
    }
    if (ancilla_dim_ == 0) throw InvalidArgument("MpsEnvironment: ancilla_dim must be >= 1");
    const std::size_t nloc = sites_.front().size();
    if (nloc == 0 || nloc % ancilla_dim_ != 0) {
      throw DimensionError("MpsEnvironment: component count not a multiple of ancilla_dim");
    }
    for (std::size_t k = 0; k < sites_.size(); ++k) {
      const auto& s = sites_[k];
      if (s.size() != nloc) {
        throw DimensionError("MpsEnvironment: site " + std::to_string(k + 1) +
                             " has a different physical dimension");
      }
      for (const auto& m : s) {
        if (m.rows() != s.front().rows() || m.cols() != s.front().cols()) {
          throw DimensionError("MpsEnvironment: ragged components at site " +
                               std::to_string(k + 1));
        }
        if (!m.allFinite()) throw InvalidArgument("MpsEnvironment: non-finite entry");
      }
      if (k > 0 && s.front().rows() != sites_[k - 1].front().cols()) {
        throw DimensionError("MpsEnvironment: bond mismatch between sites " +
                             std::to_string(k) + " and " + std::to_string(k + 1));
      }
    }
    if (homogeneous_ && sites_.front().front().rows() != sites_.front().front().cols()) {
      throw DimensionError("MpsEnvironment: homogeneous site tensor must be square");
    }
    require_square(chi0_, "MpsEnvironment: chi0");
    if (chi0_.rows() != sites_.front().front().rows()) {
      throw DimensionError("MpsEnvironment: chi0 dimension does not match first bond");
    }
    if (!is_density_matrix(chi0_, 1e-10)) {
      throw InvalidArgument("MpsEnvironment: chi0 must be a unit-trace positive semidefinite matrix");
    }
  }

  std::vector<SiteTensor> sites_;
  Matrix chi0_;
  bool homogeneous_ = false;
  std::size_t ancilla_dim_ = 1;
};

// chi_k for the bond to the right of site k.
struct BondState {
  std::size_t site_index = 0;
  Matrix matrix;
};

inline BondState initial_bond_state(const MpsEnvironment& env) { return {0, env.chi0()}; }

// max_k || sum_i B^[k],i (B^[k],i)^† - I ||_F
inline double check_right_canonical(const MpsEnvironment& env) {
  double worst = 0.0;
  for (const auto& s : env.sites()) {
    Matrix acc = Matrix::Zero(s.front().rows(), s.front().rows());
    for (const auto& b : s) acc += b * b.adjoint();
    worst = std::max(worst, (acc - identity(acc.rows())).norm());
  }
  return worst;
}

// Bond "free evolution": chi_k = sum_i (B^[k],i)^T chi_{k-1} (B^[k],i)^*.
inline BondState evolve_bond_state(const MpsEnvironment& env, const BondState& chi) {
  const std::size_t k = chi.site_index + 1;
  const auto& s = env.site(k);
  if (chi.matrix.rows() != s.front().rows() || chi.matrix.cols() != s.front().rows()) {
    throw DimensionError("evolve_bond_state: bond state dimension " +
                         std::to_string(chi.matrix.rows()) + " does not match site " +
                         std::to_string(k));
  }
  Matrix out = Matrix::Zero(s.front().cols(), s.front().cols());
  for (const auto& b : s) out.noalias() += b.transpose() * chi.matrix * b.conjugate();
  return {k, std::move(out)};
}

// chi_0, chi_1, ..., chi_k.
inline std::vector<BondState> bond_states(const MpsEnvironment& env, std::size_t k) {
  std::vector<BondState> out{initial_bond_state(env)};
  out.reserve(k + 1);
  for (std::size_t j = 1; j <= k; ++j) out.push_back(evolve_bond_state(env, out.back()));
  return out;
}

namespace detail {

// X_{(i,i')} = sum_c (B^{(i,c)})^T chi (B^{(i',c)})^*, the bond operator
// produced by opening site k's physical index on both ket and bra.
inline std::vector<Matrix> open_site(const MpsEnvironment& env, std::size_t k, const Matrix& chi) {
  const std::size_t d = env.physical_dim();
  const std::size_t r = env.ancilla_dim();
  std::vector<Matrix> out(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t ip = 0; ip < d; ++ip) {
      Matrix acc = Matrix::Zero(env.bond_dim(k), env.bond_dim(k));
      for (std::size_t c = 0; c < r; ++c) {
        acc.noalias() +=
            env.component(k, i, c).transpose() * chi * env.component(k, ip, c).conjugate();
      }
      out[i * d + ip] = std::move(acc);
    }
  }
  return out;
}

inline void check_bond(const MpsEnvironment& env, const BondState& chi, std::size_t site,
                       const char* who) {
  if (chi.site_index + 1 != site) {
    throw InvalidArgument(std::string(who) + ": bond state belongs to bond " +
                          std::to_string(chi.site_index) + ", expected " +
                          std::to_string(site - 1));
  }
  if (static_cast<std::size_t>(chi.matrix.rows()) != env.site(site).front().rows()) {
    throw DimensionError(std::string(who) + ": bond state dimension mismatch");
  }
}

}  // namespace detail

// Reduced state of site k = chi.site_index + 1, d x d.
inline Matrix site_reduced_state(const MpsEnvironment& env, const BondState& chi) {
  const std::size_t k = chi.site_index + 1;
  detail::check_bond(env, chi, k, "site_reduced_state");
  const auto d = static_cast<Eigen::Index>(env.physical_dim());
  const auto open = detail::open_site(env, k, chi.matrix);
  Matrix rho(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index ip = 0; ip < d; ++ip) rho(i, ip) = open[i * d + ip].trace();
  }
  return rho;
}

// Joint reduced state of sites l < lp, ordered (l, lp). `chi` is chi_{l-1}.
inline Matrix two_site_reduced_state(const MpsEnvironment& env, std::size_t l, std::size_t lp,
                                     const BondState& chi) {
  if (l >= lp) {
    throw InvalidArgument("two_site_reduced_state: need l < l', got " + std::to_string(l) +
                          " and " + std::to_string(lp));
  }
  detail::check_bond(env, chi, l, "two_site_reduced_state");
  if (!env.has_site(lp)) throw InvalidArgument("two_site_reduced_state: site beyond chain end");
  const std::size_t d = env.physical_dim();
  auto open = detail::open_site(env, l, chi.matrix);
  for (std::size_t j = l + 1; j < lp; ++j) {
    for (auto& x : open) x = evolve_bond_state(env, {j - 1, x}).matrix;
  }
  const auto dd = static_cast<Eigen::Index>(d * d);
  Matrix rho(dd, dd);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t ip = 0; ip < d; ++ip) {
      const auto second = detail::open_site(env, lp, open[i * d + ip]);
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t jp = 0; jp < d; ++jp) {
          rho(static_cast<Eigen::Index>(i * d + j), static_cast<Eigen::Index>(ip * d + jp)) =
              second[j * d + jp].trace();
        }
      }
    }
  }
  return rho;
}

inline constexpr std::size_t kPrefixGuard = std::size_t{1} << 10;

// Exact rho_{1..k} on the interaction legs of sites 1..k (ancillas traced).
// Guarded by d^k <= kPrefixGuard since the result is a dense d^k x d^k matrix.
inline MultiIndexOperator reduced_density_prefix(const MpsEnvironment& env, std::size_t k) {
  if (k == 0) throw InvalidArgument("reduced_density_prefix: k must be >= 1");
  if (!env.has_site(k)) throw InvalidArgument("reduced_density_prefix: k beyond chain end");
  const std::size_t d = env.physical_dim();
  const std::size_t r = env.ancilla_dim();
  std::size_t rows = 1;
  for (std::size_t j = 0; j < k; ++j) {
    rows *= d;
    if (rows > kPrefixGuard) {
      throw GuardError("reduced_density_prefix: d^k exceeds " + std::to_string(kPrefixGuard));
    }
  }

  // Purify chi0 = W W^†; each column w of W starts one row vector w^T.
  const Matrix w = psd_sqrt(env.chi0());
  // amps[row][col] is a 1 x D_j row vector; col enumerates (c0, ancillas).
  std::vector<std::vector<Matrix>> amps(1);
  for (Eigen::Index c0 = 0; c0 < w.cols(); ++c0) amps[0].push_back(w.col(c0).transpose());
  for (std::size_t j = 1; j <= k; ++j) {
    std::vector<std::vector<Matrix>> next(amps.size() * d);
    for (std::size_t row = 0; row < amps.size(); ++row) {
      for (std::size_t i = 0; i < d; ++i) {
        auto& dst = next[row * d + i];
        dst.reserve(amps[row].size() * r);
        for (const auto& v : amps[row]) {
          for (std::size_t c = 0; c < r; ++c) dst.push_back(v * env.component(j, i, c));
        }
      }
    }
    amps = std::move(next);
  }
  const std::size_t ncol = amps.front().size();
  const auto dk = static_cast<Eigen::Index>(env.bond_dim(k));
  Matrix psi(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(ncol) * dk);
  for (std::size_t row = 0; row < rows; ++row) {
    for (std::size_t col = 0; col < ncol; ++col) {
      psi.block(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col) * dk, 1, dk) =
          amps[row][col];
    }
  }
  return MultiIndexOperator(std::vector<std::size_t>(k, d), psi * psi.adjoint());
}

// T = sum_i B^i ⊗ (B^i)^* for a homogeneous chain.
inline Matrix transfer_matrix(const MpsEnvironment& env) {
  if (!env.homogeneous()) throw InvalidArgument("transfer_matrix: environment is not homogeneous");
  const auto& s = env.site(1);
  const auto n = s.front().rows();
  Matrix t = Matrix::Zero(n * n, n * n);
  for (const auto& b : s) t += kron(b, b.conjugate());
  return t;
}

struct TransferSpectrum {
  cplx lambda2;               // subleading eigenvalue (second largest modulus)
  double correlation_length;  // -1 / ln|lambda2|; 0 when lambda2 == 0
  int sign;                   // sign of Re(lambda2), +1 for zero
  // Signed decay ratio ±e^{-1/l_corr}; equals lambda2 when it is real.
  double ratio() const { return sign * std::abs(lambda2); }
};

inline TransferSpectrum transfer_spectrum(const MpsEnvironment& env, double tol = 1e-10) {
  const Matrix t = transfer_matrix(env);
  Eigen::ComplexEigenSolver<Matrix> es(t, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); });
  if (std::abs(ev.front() - 1.0) > tol) {
    throw InvalidArgument("transfer_spectrum: leading eigenvalue is " +
                          std::to_string(ev.front().real()) + "+" +
                          std::to_string(ev.front().imag()) + "i, expected 1");
  }
  cplx l2 = ev.size() > 1 ? ev[1] : cplx{0.0, 0.0};
  // Defective zero eigenvalues come back as O(sqrt(eps)); T^N = T^(N+1)
  // certifies that every subleading eigenvalue vanishes.
  if (std::abs(l2) < 1e-6) {
    Matrix p = t;
    for (Eigen::Index i = 1; i < t.rows(); ++i) p = p * t;
    if ((p * t - p).norm() < tol) l2 = 0.0;
  }
  const double mod = std::abs(l2);
  if (mod >= 1.0 - tol) {
    throw InfiniteCorrelationLength("transfer_spectrum: |lambda2| = " + std::to_string(mod) +
                                    "; correlation length is infinite");
  }
  if (std::abs(l2.imag()) > tol) {
    detail::warn("transfer_spectrum: complex subleading eigenvalue; using |lambda2| with the sign of its real part");
  }
  TransferSpectrum out;
  out.lambda2 = l2;
  out.correlation_length = mod > 0.0 ? -1.0 / std::log(mod) : 0.0;
  out.sign = l2.real() < 0.0 ? -1 : 1;
  return out;
}

// Fixed point of the bond free evolution of a homogeneous chain, normalized to
// unit trace.
inline Matrix stationary_bond_state(const MpsEnvironment& env, double tol = 1e-10) {
  if (!env.homogeneous()) {
    throw InvalidArgument("stationary_bond_state: environment is not homogeneous");
  }
  const auto n = static_cast<Eigen::Index>(env.bond_dim(1));
  // Column-major superoperator of chi -> sum_i B^T chi B^*: (B^† ⊗ B^T).
  Matrix sup = Matrix::Zero(n * n, n * n);
  for (const auto& b : env.site(1)) sup += kron(b.adjoint(), b.transpose());
  Eigen::ComplexEigenSolver<Matrix> es(sup);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = i;
  }
  if (std::abs(es.eigenvalues()(best) - 1.0) > tol) {
    throw InvalidArgument("stationary_bond_state: bond map has no unit eigenvalue");
  }
  Matrix chi = unvec(es.eigenvectors().col(best), n);
  chi = hermitian_part(chi / chi.trace());
  return chi;
}

namespace detail {

// Right-to-left LQ sweep. Returns the new chi0 (unnormalized).
inline Matrix canonical_sweep(std::vector<SiteTensor>& sites, const Matrix& chi0,
                              double rank_tol) {
  const std::size_t p = sites.front().size();
  for (std::size_t k = sites.size(); k-- > 0;) {
    auto& s = sites[k];
    const auto rows = s.front().rows();
    const auto cols = s.front().cols();
    Matrix wide(rows, static_cast<Eigen::Index>(p) * cols);
    for (std::size_t i = 0; i < p; ++i) wide.middleCols(static_cast<Eigen::Index>(i) * cols, cols) = s[i];
    LqResult lq = truncated_lq(wide, rank_tol);
    if (lq.rank == 0) throw InvalidArgument("right_canonicalize: state has zero norm");
    for (std::size_t i = 0; i < p; ++i) {
      s[i] = lq.q.middleCols(static_cast<Eigen::Index>(i) * cols, cols);
    }
    if (k > 0) {
      for (auto& b : sites[k - 1]) b = b * lq.l;
    } else {
      return lq.l.transpose() * chi0 * lq.l.conjugate();
    }
  }
  return chi0;
}

inline Matrix direct_sum(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace detail

// Brings a finite chain into right-canonical form without changing the
// physical state. Directions of relative weight below rank_tol are dropped.
inline MpsEnvironment right_canonicalize(const MpsEnvironment& env, double rank_tol = 1e-12) {
  if (env.homogeneous()) {
    throw InvalidArgument("right_canonicalize: only finite chains can be swept");
  }
  auto sites = env.sites();
  Matrix chi0 = detail::canonical_sweep(sites, env.chi0(), rank_tol);
  const cplx tr = chi0.trace();
  if (std::abs(tr) == 0.0) throw InvalidArgument("right_canonicalize: state has zero norm");
  chi0 = hermitian_part(chi0 / tr);
  return MpsEnvironment(std::move(sites), std::move(chi0), false, env.ancilla_dim());
}

// A pure open-boundary MPS (first site 1 x D_1, last site D_{n-1} x 1) with a
// mixture weight.
struct WeightedMps {
  double weight = 1.0;
  std::vector<SiteTensor> sites;
};

// Mixture sum_q p_q |psi_q><psi_q| of normalized branches: each branch is
// canonicalized separately and the tensors are stacked block-diagonally,
// with chi0 = diag(p_q).
inline MpsEnvironment right_canonicalize(const std::vector<WeightedMps>& branches,
                                         double rank_tol = 1e-12) {
  if (branches.empty()) throw InvalidArgument("right_canonicalize: no branches");
  double total = 0.0;
  for (const auto& b : branches) {
    if (!(b.weight >= 0.0)) throw InvalidArgument("right_canonicalize: negative weight");
    total += b.weight;
  }
  if (total <= 0.0) throw InvalidArgument("right_canonicalize: weights sum to zero");

  std::vector<SiteTensor> sum;
  std::vector<double> weights;
  for (const auto& br : branches) {
    if (br.weight == 0.0) continue;
    if (br.sites.empty() || br.sites.front().front().rows() != 1 ||
        br.sites.back().front().cols() != 1) {
      throw DimensionError("right_canonicalize: branches need open boundaries of dimension 1");
    }
    MpsEnvironment one(br.sites, Matrix::Identity(1, 1), false);
    MpsEnvironment canon = right_canonicalize(one, rank_tol);
    // A pure branch keeps chi0 = [1] after canonicalization up to a phase
    // already absorbed in the first site.
    if (sum.empty()) {
      sum = canon.sites();
    } else {
      if (canon.sites().size() != sum.size() || canon.local_dim() != sum.front().size()) {
        throw DimensionError("right_canonicalize: branches differ in length or physical dimension");
      }
      for (std::size_t k = 0; k < sum.size(); ++k) {
        for (std::size_t i = 0; i < sum[k].size(); ++i) {
          sum[k][i] = detail::direct_sum(sum[k][i], canon.sites()[k][i]);
        }
      }
    }
    weights.push_back(br.weight / total);
  }
  Matrix chi0 = Matrix::Zero(static_cast<Eigen::Index>(weights.size()),
                             static_cast<Eigen::Index>(weights.size()));
  for (std::size_t q = 0; q < weights.size(); ++q) {
    chi0(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q)) = weights[q];
  }
  return MpsEnvironment(std::move(sum), std::move(chi0), false);
}

inline MpsEnvironment right_canonicalize(const std::vector<SiteTensor>& pure_sites,
                                         double rank_tol = 1e-12) {
  return right_canonicalize(std::vector<WeightedMps>{{1.0, pure_sites}}, rank_tol);
}

namespace detail {

// Bond-dimension-one site whose interaction leg is in state rho, purified
// into an ancilla of dimension d: B^{(i,c)} = (sqrt(rho))_{i c}.
inline SiteTensor purified_site(const Matrix& rho) {
  const Matrix root = psd_sqrt(rho);
  const auto d = rho.rows();
  SiteTensor s;
  s.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) s.push_back(Matrix::Constant(1, 1, root(i, c)));
  }
  return s;
}

inline bool is_product_chain(const MpsEnvironment& env) {
  if (env.chi0().rows() != 1) return false;
  for (const auto& s : env.sites()) {
    if (s.front().rows() != 1 || s.front().cols() != 1) return false;
  }
  return true;
}

}  // namespace detail

// Product of the single-site marginals of `env`. Homogeneous chains whose chi0
// is stationary stay homogeneous; otherwise the marginals vary with k and a
// site count is required. Chains that already have bond dimension one are
// returned unchanged.
inline MpsEnvironment decorrelate(const MpsEnvironment& env,
                                  std::optional<std::size_t> n_sites = std::nullopt,
                                  double tol = 1e-12) {
  if (detail::is_product_chain(env)) return env;
  if (env.homogeneous()) {
    const BondState chi1 = evolve_bond_state(env, initial_bond_state(env));
    if ((chi1.matrix - env.chi0()).norm() <= tol) {
      const Matrix rho = site_reduced_state(env, initial_bond_state(env));
      return MpsEnvironment({detail::purified_site(rho)}, Matrix::Identity(1, 1), true,
                            env.physical_dim());
    }
    if (!n_sites) {
      throw InvalidArgument(
          "decorrelate: chi0 is not stationary, so the marginals depend on k; pass a site count");
    }
  }
  const std::size_t n = env.homogeneous() ? *n_sites : *env.length();
  std::vector<SiteTensor> sites;
  sites.reserve(n);
  BondState chi = initial_bond_state(env);
  for (std::size_t k = 1; k <= n; ++k) {
    sites.push_back(detail::purified_site(site_reduced_state(env, chi)));
    if (k < n) chi = evolve_bond_state(env, chi);
  }
  return MpsEnvironment(std::move(sites), Matrix::Identity(1, 1), false, env.physical_dim());
}

}  // namespace collmps
