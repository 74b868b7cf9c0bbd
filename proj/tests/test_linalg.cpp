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

#include <random>

#include "collmps/linalg.hpp"
#include "support.hpp"

using namespace collmps;
using Catch::Matchers::WithinAbs;

TEST_CASE("kron follows the first-factor-major convention", "[linalg]") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  const Matrix k = kron(a, b);
  REQUIRE(k.rows() == 4);
  CHECK(k(0, 1) == cplx(1));
  CHECK(k(1, 0) == cplx(1));
  CHECK(k(2, 1) == cplx(3));
  CHECK(k(3, 0) == cplx(3));
  CHECK(k(2, 3) == cplx(4));
  CHECK(k(0, 3) == cplx(2));
  CHECK(k(0, 0) == cplx(0));
}

TEST_CASE("partial trace of a product returns the kept factor", "[linalg]") {
  std::mt19937 rng(7);
  const Matrix a = testing::random_density(rng, 2);
  const Matrix b = testing::random_density(rng, 3);
  const Matrix c = testing::random_density(rng, 2);
  const MultiIndexOperator abc({2, 3, 2}, kron(kron(a, b), c));
  CHECK((partial_trace(abc, {1}).matrix - b).norm() < 1e-12);
  CHECK((partial_trace(abc, {0, 2}).matrix - kron(a, c)).norm() < 1e-12);
  CHECK((partial_trace(abc, {0, 1, 2}).matrix - abc.matrix).norm() < 1e-12);
  CHECK((trace_second(kron(a, b), 2) - a).norm() < 1e-12);
  CHECK((trace_first(kron(a, b), 2) - b).norm() < 1e-12);
}

TEST_CASE("partial trace rejects bad keep sets", "[linalg]") {
  const MultiIndexOperator op({2, 2}, identity(4));
  CHECK_THROWS_AS(partial_trace(op, {}), InvalidArgument);
  CHECK_THROWS_AS(partial_trace(op, {2}), InvalidArgument);
  CHECK_THROWS_AS(partial_trace(op, {0, 0}), InvalidArgument);
  CHECK_THROWS_AS(MultiIndexOperator({2, 3}, identity(4)).validate(), DimensionError);
}

TEST_CASE("partial trace of an entangled pure state is maximally mixed", "[linalg]") {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = std::sqrt(0.5);
  const MultiIndexOperator bell({2, 2}, psi * psi.adjoint());
  CHECK((partial_trace(bell, {0}).matrix - identity(2) / 2.0).norm() < 1e-12);
}

TEST_CASE("exp of a Hermitian generator", "[linalg]") {
  Matrix sx(2, 2);
  sx << 0, 1, 1, 0;
  const double t = 0.37;
  Matrix expect(2, 2);
  expect << std::cos(t), -kI * std::sin(t), -kI * std::sin(t), std::cos(t);
  CHECK((expm_hermitian_generator(sx, t) - expect).norm() < 1e-14);
  CHECK((expm_hermitian_generator(sx, 0.0) - identity(2)).norm() < 1e-15);
  Matrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(expm_hermitian_generator(bad, 0.1), InvalidArgument);
}

TEST_CASE("exp of a random Hermitian generator is unitary", "[linalg]") {
  std::mt19937 rng(11);
  const Matrix g = testing::random_matrix(rng, 6, 6);
  const Matrix h = hermitian_part(g);
  const Matrix u = expm_hermitian_generator(h, 0.8);
  CHECK((u.adjoint() * u - identity(6)).norm() < 1e-12);
  CHECK((expm_hermitian_generator(h, 0.3) * expm_hermitian_generator(h, 0.5) - u).norm() < 1e-12);
}

TEST_CASE("LQ factorization reconstructs and has orthonormal rows", "[linalg]") {
  std::mt19937 rng(3);
  const Matrix m = testing::random_matrix(rng, 3, 8);
  const LqResult f = lq_factorize(m);
  CHECK(f.rank == 3);
  CHECK((f.l * f.q - m).norm() < 1e-12);
  CHECK((f.q * f.q.adjoint() - identity(f.q.rows())).norm() < 1e-12);
}

TEST_CASE("truncated LQ drops null directions", "[linalg]") {
  std::mt19937 rng(5);
  const Matrix a = testing::random_matrix(rng, 4, 2);
  const Matrix b = testing::random_matrix(rng, 2, 6);
  const LqResult f = truncated_lq(a * b);
  CHECK(f.rank == 2);
  CHECK(f.q.rows() == 2);
  CHECK((f.l * f.q - a * b).norm() < 1e-10);
  CHECK((f.q * f.q.adjoint() - identity(2)).norm() < 1e-12);
}

TEST_CASE("generalized Gell-Mann basis is Hilbert-Schmidt orthonormal", "[linalg]") {
  for (Eigen::Index n : {2, 3, 5}) {
    const auto basis = gell_mann_basis(n);
    REQUIRE(basis.size() == static_cast<std::size_t>(n * n));
    for (std::size_t a = 0; a < basis.size(); ++a) {
      CHECK(hermiticity_residual(basis[a]) < 1e-15);
      for (std::size_t b = 0; b < basis.size(); ++b) {
        const cplx ip = (basis[a].adjoint() * basis[b]).trace();
        CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-14);
      }
    }
  }
}

TEST_CASE("vec and unvec are column-major inverses", "[linalg]") {
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  const Vector v = vec(x);
  CHECK(v(1) == cplx(3));
  CHECK(v(2) == cplx(2));
  CHECK(unvec(v, 2) == x);
}

TEST_CASE("density-matrix predicates", "[linalg]") {
  std::mt19937 rng(9);
  const Matrix rho = testing::random_density(rng, 3);
  CHECK(is_density_matrix(rho));
  CHECK_FALSE(is_density_matrix(2.0 * rho));
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_FALSE(is_density_matrix(neg));
  CHECK_THAT(min_eigenvalue(neg), WithinAbs(-0.5, 1e-14));
  CHECK_THAT(trace_distance(models::ground_state(), models::excited_state()), WithinAbs(1.0, 1e-14));
  CHECK((psd_sqrt(rho) * psd_sqrt(rho) - rho).norm() < 1e-12);
}
