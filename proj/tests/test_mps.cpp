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

#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "collmps/models.hpp"
#include "collmps/mps.hpp"
#include "support.hpp"

using namespace collmps;
using Catch::Matchers::WithinAbs;

namespace {

// Psi[(i_1..i_n), b] = sum v_a (B^{i_1} ... B^{i_n})_{a b}; site 1 most
// significant. Written out by brute force over configurations.
Matrix contract_chain(const std::vector<SiteTensor>& sites, const Vector& left) {
  const std::size_t n = sites.size();
  const std::size_t d = sites.front().size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= d;
  const Eigen::Index right = sites.back().front().cols();
  Matrix psi(static_cast<Eigen::Index>(total), right);
  std::vector<std::size_t> idx(n);
  for (std::size_t x = 0; x < total; ++x) {
    std::size_t rem = x;
    for (std::size_t k = n; k-- > 0;) {
      idx[k] = rem % d;
      rem /= d;
    }
    Matrix row = left.transpose();
    for (std::size_t k = 0; k < n; ++k) row = row * sites[k][idx[k]];
    psi.row(static_cast<Eigen::Index>(x)) = row;
  }
  return psi;
}

std::vector<SiteTensor> repeat(const MpsEnvironment& env, std::size_t n) {
  std::vector<SiteTensor> out;
  for (std::size_t k = 1; k <= n; ++k) out.push_back(env.site(k));
  return out;
}

Vector basis_vector(Eigen::Index n, Eigen::Index i) {
  Vector v = Vector::Zero(n);
  v(i) = 1.0;
  return v;
}

// |<a|b>| for normalized vectors.
double overlap(const Vector& a, const Vector& b) { return std::abs(a.normalized().dot(b.normalized())); }

}  // namespace

TEST_CASE("stated environments are right-canonical", "[mps]") {
  CHECK(check_right_canonical(models::aklt_env()) < 1e-15);
  CHECK(check_right_canonical(models::cluster_env()) < 1e-15);
  CHECK(check_right_canonical(models::two_photon_env(0.3 / 2.3, 0.3 / 59.9)) < 1e-14);
  CHECK(check_right_canonical(models::ghz_env(6)) < 1e-13);
  CHECK(check_right_canonical(models::single_photon_env(testing::normalized_profile(9))) < 1e-13);
}

TEST_CASE("scaled tensors have the forced canonical residual", "[mps]") {
  const MpsEnvironment a = models::aklt_env();
  SiteTensor s = a.site(1);
  for (auto& b : s) b *= 2.0;
  const MpsEnvironment scaled({s}, a.chi0(), true);
  CHECK_THAT(check_right_canonical(scaled), WithinAbs(3.0 * std::sqrt(2.0), 1e-12));
}

TEST_CASE("environment validation", "[mps]") {
  const Matrix b = identity(2);
  CHECK_THROWS_AS(MpsEnvironment({{b, b}}, 2.0 * identity(2), true), InvalidArgument);
  CHECK_THROWS_AS(MpsEnvironment({{b, Matrix::Zero(2, 3)}}, identity(2) / 2.0, true), DimensionError);
  CHECK_THROWS_AS(MpsEnvironment({{b}, {Matrix::Zero(3, 3)}}, identity(2) / 2.0, false), DimensionError);
  CHECK_THROWS_AS(MpsEnvironment({}, identity(1), false), InvalidArgument);
  const MpsEnvironment g = models::ghz_env(4);
  CHECK_FALSE(g.has_site(5));
  CHECK_THROWS(g.site(5));
}

TEST_CASE("AKLT bond state is a transfer fixed point", "[mps]") {
  const MpsEnvironment env = models::aklt_env();
  CHECK((env.chi0() - identity(2) / 2.0).norm() < 1e-12);
  const BondState chi1 = evolve_bond_state(env, initial_bond_state(env));
  CHECK(chi1.site_index == 1);
  CHECK((chi1.matrix - identity(2) / 2.0).norm() < 1e-14);
  CHECK((site_reduced_state(env, initial_bond_state(env)) - identity(3) / 3.0).norm() < 1e-14);
}

TEST_CASE("two-photon bond state after one step", "[mps]") {
  const double r1 = 0.3 / 2.3;
  const MpsEnvironment env = models::two_photon_env(r1, 0.3 / 59.9);
  const BondState chi1 = evolve_bond_state(env, initial_bond_state(env));
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = std::exp(-2 * r1);
  expect(1, 1) = 1 - std::exp(-2 * r1);
  CHECK((chi1.matrix - expect).norm() < 1e-14);
}

TEST_CASE("bond states keep unit trace and positivity", "[mps]") {
  for (const auto& [name, model] : testing::zoo(12)) {
    INFO(name);
    const auto& env = model.env();
    const std::size_t n = env.length() ? *env.length() : 100;
    const auto chis = bond_states(env, n);
    for (const auto& chi : chis) {
      CHECK(std::abs(chi.matrix.trace() - 1.0) < 1e-12);
      CHECK(hermiticity_residual(chi.matrix) < 1e-12);
      CHECK(min_eigenvalue(chi.matrix) > -1e-12);
    }
  }
}

TEST_CASE("cluster marginal, spectrum and two-site state", "[mps]") {
  const MpsEnvironment env = models::cluster_env();
  CHECK((site_reduced_state(env, initial_bond_state(env)) - identity(2) / 2.0).norm() < 1e-14);
  const TransferSpectrum ts = transfer_spectrum(env);
  CHECK(std::abs(ts.lambda2) < 1e-12);
  CHECK(ts.correlation_length < 1e-3);

  // Brute-force 10-site state with the open right leg traced out.
  const Matrix psi = contract_chain(repeat(env, 10), basis_vector(2, 0));
  const MultiIndexOperator full(std::vector<std::size_t>(10, 2), psi * psi.adjoint());
  const auto chis = bond_states(env, 9);
  for (std::size_t l = 1; l <= 9; ++l) {
    INFO("sites " << l << "," << l + 1);
    const Matrix expect = partial_trace(full, {l - 1, l}).matrix;
    const Matrix got = two_site_reduced_state(env, l, l + 1, chis[l - 1]);
    CHECK((got - expect).norm() < 1e-12);
  }
}

TEST_CASE("AKLT spectrum and two-point correlations", "[mps]") {
  const MpsEnvironment env = models::aklt_env();
  const TransferSpectrum ts = transfer_spectrum(env);
  CHECK(std::abs(ts.lambda2 - cplx(-1.0 / 3.0)) < 1e-12);
  CHECK_THAT(ts.correlation_length, WithinAbs(1.0 / std::log(3.0), 1e-12));
  CHECK(ts.sign == -1);
  const models::Spin1 j = models::spin1();
  const Matrix jj = kron(j.jx, j.jx) + kron(j.jy, j.jy) + kron(j.jz, j.jz);
  const BondState chi{0, env.chi0()};
  for (int m = 1; m <= 6; ++m) {
    INFO("distance " << m);
    // <J_a J_a> = (4/3)(-1/3)^m and tr(J_z^2) = 2 fix the weight (1/3)(-1/3)^m.
    const Matrix expect = identity(9) / 9.0 + (std::pow(-1.0 / 3.0, m) / 3.0) * jj;
    CHECK((two_site_reduced_state(env, 1, 1 + m, chi) - expect).norm() < 1e-12);
  }
}

TEST_CASE("two-site state approaches the product at rate |lambda2|", "[mps]") {
  const MpsEnvironment env = models::aklt_env();
  const BondState chi{0, env.chi0()};
  const Matrix r1 = site_reduced_state(env, chi);
  double prev = 0.0;
  for (std::size_t m = 1; m <= 8; ++m) {
    const double gap = (two_site_reduced_state(env, 1, 1 + m, chi) - kron(r1, r1)).norm();
    if (m > 1) CHECK_THAT(gap / prev, WithinAbs(1.0 / 3.0, 1e-10));
    prev = gap;
  }
}

TEST_CASE("GHZ has an infinite correlation length", "[mps]") {
  CHECK_THROWS_AS(transfer_spectrum(models::ghz_bulk_env()), InfiniteCorrelationLength);
  CHECK_THROWS_AS(transfer_spectrum(models::ghz_env(4)), InvalidArgument);
  CHECK_THROWS_AS(stationary_bond_state(models::ghz_env(4)), InvalidArgument);
}

TEST_CASE("GHZ contraction and marginals", "[mps]") {
  const MpsEnvironment env = models::ghz_env(3);
  const MultiIndexOperator rho = reduced_density_prefix(env, 3);
  Vector ghz = Vector::Zero(8);
  ghz(0) = ghz(7) = std::sqrt(0.5);
  CHECK((rho.matrix - ghz * ghz.adjoint()).norm() < 1e-12);
  const MpsEnvironment big = models::ghz_env(10);
  const auto chis = bond_states(big, 9);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK((site_reduced_state(big, chis[k]) - identity(2) / 2.0).norm() < 1e-12);
  }
}

TEST_CASE("single-photon wavepacket contraction", "[mps]") {
  const std::vector<cplx> c = {0.5, cplx(0.0, 0.5), -0.5, cplx(0.3, 0.4) / std::sqrt(2.0) * 1.0};
  std::vector<cplx> amps = c;
  double n2 = 0.0;
  for (auto& a : amps) n2 += std::norm(a);
  for (auto& a : amps) a /= std::sqrt(n2);
  const MpsEnvironment env = models::single_photon_env(amps);
  CHECK(check_right_canonical(env) < 1e-13);
  for (std::size_t k = 0; k <= amps.size(); ++k) CHECK(env.bond_dim(k) <= 2);
  Vector expect = Vector::Zero(16);
  for (std::size_t k = 0; k < 4; ++k) expect(1 << (3 - k)) = amps[k];
  const Matrix rho = reduced_density_prefix(env, 4).matrix;
  CHECK((rho - expect * expect.adjoint()).norm() < 1e-12);
}

TEST_CASE("single photon in the first bin is a product state", "[mps]") {
  const MpsEnvironment env = models::single_photon_env(std::vector<double>{1, 0, 0, 0, 0});
  const Matrix rho = reduced_density_prefix(env, 5).matrix;
  CHECK(std::abs(rho(16, 16) - 1.0) < 1e-12);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
  CHECK_THROWS_AS(models::single_photon_env(std::vector<double>{0, 0, 0}), InvalidArgument);
}

TEST_CASE("two-photon wavepacket amplitudes on ten bins", "[mps]") {
  const double r1 = 0.3 / 2.3;
  const double r2 = 0.3 / 59.9;
  const MpsEnvironment env = models::two_photon_env(r1, r2);
  // Photon 1 still ahead on the left, both photons emitted on the right.
  const Vector psi = contract_chain(repeat(env, 10), basis_vector(3, 0)).col(2);
  Vector expect = Vector::Zero(1024);
  for (int l = 1; l <= 10; ++l) {
    for (int m = 1; l + m <= 10; ++m) {
      expect((1 << (10 - l)) | (1 << (10 - l - m))) = std::exp(-l * r1) * std::exp(-m * r2);
    }
  }
  CHECK(((psi.normalized() - expect.normalized()).norm() < 1e-10 ||
         (psi.normalized() + expect.normalized()).norm() < 1e-10));
}

TEST_CASE("prefix density is consistent with chained marginals", "[mps]") {
  for (const auto& [name, model] : testing::zoo(8)) {
    INFO(name);
    const auto& env = model.env();
    const std::size_t d = env.local_dim();
    std::size_t kmax = 1;
    while (kmax < 6) {
      std::size_t cap = 1;
      for (std::size_t i = 0; i <= kmax; ++i) cap *= d;
      if (cap > kPrefixGuard) break;
      ++kmax;
    }
    const auto chis = bond_states(env, kmax);
    for (std::size_t k = 1; k <= kmax; ++k) {
      const MultiIndexOperator rho = reduced_density_prefix(env, k);
      CHECK(std::abs(rho.matrix.trace() - 1.0) < 1e-12);
      const Matrix last = partial_trace(rho, {k - 1}).matrix;
      CHECK((last - site_reduced_state(env, chis[k - 1])).norm() < 1e-12);
    }
  }
  CHECK_THROWS_AS(reduced_density_prefix(models::aklt_env(), 7), GuardError);
}

TEST_CASE("product environment marginals", "[mps]") {
  Vector c(3);
  c << 0.6, cplx(0.0, 0.8), 0.0;
  const MpsEnvironment env = models::product_env(c);
  const BondState chi = initial_bond_state(env);
  const Matrix r = site_reduced_state(env, chi);
  CHECK((r - c * c.adjoint()).norm() < 1e-14);
  CHECK((two_site_reduced_state(env, 1, 3, chi) - kron(r, r)).norm() < 1e-14);
}

TEST_CASE("right_canonicalize reproduces a random finite chain", "[mps]") {
  std::mt19937 rng(21);
  std::vector<SiteTensor> raw;
  const std::vector<Eigen::Index> dims = {1, 3, 4, 2, 1};
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    raw.push_back({testing::random_matrix(rng, dims[k], dims[k + 1]),
                   testing::random_matrix(rng, dims[k], dims[k + 1])});
  }
  const Vector psi = contract_chain(raw, basis_vector(1, 0)).col(0);
  const MpsEnvironment env = right_canonicalize(raw);
  CHECK(check_right_canonical(env) < 1e-12);
  const Matrix rho = reduced_density_prefix(env, 4).matrix;
  CHECK((rho - psi.normalized() * psi.normalized().adjoint()).norm() < 1e-12);

  const MpsEnvironment again = right_canonicalize(env);
  CHECK((reduced_density_prefix(again, 4).matrix - rho).norm() < 1e-10);
}

TEST_CASE("right_canonicalize truncates redundant bond directions", "[mps]") {
  // Bond 2 is padded with a zero direction.
  SiteTensor a = {Matrix::Zero(1, 2), Matrix::Zero(1, 2)};
  a[0](0, 0) = 1.0;
  SiteTensor b = {Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  b[1](0, 0) = 1.0;
  const MpsEnvironment env = right_canonicalize(std::vector<SiteTensor>{a, b});
  CHECK(env.bond_dim(1) == 1);
  const Matrix rho = reduced_density_prefix(env, 2).matrix;
  CHECK(std::abs(rho(1, 1) - 1.0) < 1e-12);
}

TEST_CASE("weighted mixtures become direct sums", "[mps]") {
  SiteTensor up = {Matrix::Ones(1, 1), Matrix::Zero(1, 1)};
  SiteTensor down = {Matrix::Zero(1, 1), Matrix::Ones(1, 1)};
  const MpsEnvironment env = right_canonicalize(std::vector<WeightedMps>{
      {0.25, {up, up, up}}, {0.75, {down, down, down}}});
  CHECK(check_right_canonical(env) < 1e-12);
  const Matrix rho = reduced_density_prefix(env, 3).matrix;
  Matrix expect = Matrix::Zero(8, 8);
  expect(0, 0) = 0.25;
  expect(7, 7) = 0.75;
  CHECK((rho - expect).norm() < 1e-12);
}

TEST_CASE("decorrelate keeps marginals and removes correlations", "[mps]") {
  SECTION("product input is unchanged") {
    Vector c(2);
    c << 0.6, 0.8;
    const MpsEnvironment env = models::product_env(c);
    const MpsEnvironment out = decorrelate(env);
    CHECK(out.bond_dim(0) == 1);
    CHECK((site_reduced_state(out, initial_bond_state(out)) - c * c.adjoint()).norm() < 1e-14);
  }
  SECTION("AKLT becomes i.i.d. maximally mixed spins") {
    const MpsEnvironment out = decorrelate(models::aklt_env());
    CHECK(out.homogeneous());
    CHECK(out.bond_dim(0) == 1);
    const BondState chi = initial_bond_state(out);
    CHECK((site_reduced_state(out, chi) - identity(3) / 3.0).norm() < 1e-14);
    CHECK((two_site_reduced_state(out, 1, 2, chi) - identity(9) / 9.0).norm() < 1e-14);
  }
  SECTION("two-photon marginals survive site by site") {
    const MpsEnvironment env = models::two_photon_env(0.3 / 2.3, 0.3 / 59.9);
    CHECK_THROWS_AS(decorrelate(env), InvalidArgument);
    const MpsEnvironment out = decorrelate(env, 20);
    const auto a = bond_states(env, 19);
    const auto b = bond_states(out, 19);
    for (std::size_t k = 1; k <= 20; ++k) {
      INFO("site " << k);
      const Matrix ra = site_reduced_state(env, a[k - 1]);
      const Matrix rb = site_reduced_state(out, b[k - 1]);
      CHECK((ra - rb).norm() < 1e-12);
      if (k < 20) {
        const Matrix pair = two_site_reduced_state(out, k, k + 1, b[k - 1]);
        CHECK((pair - kron(rb, site_reduced_state(out, b[k]))).norm() < 1e-12);
      }
    }
  }
}
