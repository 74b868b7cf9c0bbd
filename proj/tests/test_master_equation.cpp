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

#include "collmps/master_equation.hpp"
#include "collmps/models.hpp"
#include "support.hpp"

using namespace collmps;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("superoperator conjugation convention", "[superoperator]") {
  std::mt19937 rng(1);
  const Matrix a = testing::random_matrix(rng, 3, 3);
  const Matrix b = testing::random_matrix(rng, 3, 3);
  const Matrix x = testing::random_matrix(rng, 3, 3);
  const Superoperator s = Superoperator::conjugation(a, b);
  CHECK((s.apply(x) - a * x * b.adjoint()).norm() < 1e-12);
  const Superoperator t = Superoperator::from_map(3, 3, [&](const Matrix& y) { return Matrix(a * y * b.adjoint()); });
  CHECK((s.matrix - t.matrix).norm() < 1e-12);
  CHECK_THROWS_AS(s.apply(identity(2)), DimensionError);
  CHECK_THROWS_AS(Superoperator(2, 2, identity(3)), DimensionError);
}

TEST_CASE("propagator superoperator matches step", "[master]") {
  std::mt19937 rng(2);
  const auto m = models::aklt_heisenberg_model(0.5);
  const Superoperator e = propagator_superop(m, 1);
  CHECK(e.matrix.rows() == 16);
  CHECK(e.trace_preservation_residual() < 1e-12);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_matrix(rng, 4, 4);
    const SystemBondState r{0, MultiIndexOperator({2, 2}, x)};
    CHECK((e.apply(x) - step(m, r).state.matrix).norm() < 1e-12);
  }
  const CollisionModel id(models::product_env(Vector::Ones(1)), {identity(4)}, 2, 2, 0.0);
  CHECK((propagator_superop(id, 1).matrix - Matrix::Identity(4, 4)).norm() < 1e-15);
}

TEST_CASE("projector algebra", "[master]") {
  for (const auto& [name, model] : testing::zoo(8)) {
    INFO(name);
    const auto chis = bond_states(model.env(), 8);
    for (const auto& chi : chis) {
      const Superoperator p = projection_P(chi, 2);
      const Superoperator q = projection_Q(chi, 2);
      CHECK(((p * p) - p).norm() < 1e-12);
      CHECK(((q * q) - q).norm() < 1e-12);
      CHECK((p * q).norm() < 1e-12);
      CHECK((q * p).norm() < 1e-12);
    }
  }
  std::mt19937 rng(8);
  const Matrix rho = testing::random_density(rng, 2);
  const BondState chi{0, identity(2) / 2.0};
  const Matrix prod = kron(rho, chi.matrix);
  CHECK((projection_P(chi, 2).apply(prod) - prod).norm() < 1e-14);
  const BondState one{0, Matrix::Identity(1, 1)};
  CHECK((projection_P(one, 2).matrix - Matrix::Identity(4, 4)).norm() < 1e-15);
}

TEST_CASE("memory kernel vanishes without correlations or coupling", "[master]") {
  SECTION("bond dimension one") {
    const auto m = models::aklt_heisenberg_model(0.5);
    const auto md = m.with_env(decorrelate(m.env()));
    for (std::size_t m_ = 1; m_ <= 4; ++m_) CHECK(memory_kernel(md, 4, m_).norm() < 1e-14);
    CHECK(memory_kernel(md, 4, 0).norm() > 1e-3);
  }
  SECTION("zero coupling") {
    const auto m = models::aklt_heisenberg_model(0.0);
    for (std::size_t m_ = 0; m_ <= 3; ++m_) CHECK(memory_kernel(m, 3, m_).norm() < 1e-14);
  }
  SECTION("index checks") {
    const auto m = models::aklt_heisenberg_model(0.5);
    CHECK_THROWS_AS(memory_kernel(m, 2, 3), InvalidArgument);
    CHECK_THROWS_AS(memory_kernel(models::ghz_model(4, 0.5), 4, 0), InvalidArgument);
  }
}

TEST_CASE("kernel entries annihilate the trace", "[master]") {
  const auto m = models::two_photon_model(0.3, 2.3, 59.9);
  const auto table = build_kernel_table(m, 6);
  for (std::size_t k = 0; k < 6; ++k) {
    for (std::size_t j = 0; j <= k; ++j) CHECK(table.at(k, j).trace_annihilation_residual() < 1e-12);
  }
  CHECK_THROWS_AS(table.at(6, 0), InvalidArgument);
  CHECK_FALSE(table.has(2, 3));
}

TEST_CASE("Nakajima-Zwanzig iteration reproduces the embedding", "[master]") {
  std::mt19937 rng(15);
  for (const auto& [name, model] : testing::zoo(20)) {
    INFO(name);
    const Matrix rho0 = testing::random_density(rng, 2);
    const auto exact = trajectory(model, rho0, 20);
    const auto nz = solve_nz(build_kernel_table(model, 20), rho0, 20);
    for (std::size_t k = 0; k <= 20; ++k) CHECK(trace_distance(exact[k], nz[k]) < 1e-8);
  }
}

TEST_CASE("solve_nz edge cases", "[master]") {
  std::mt19937 rng(6);
  const Matrix rho0 = testing::random_density(rng, 2);
  KernelTable zero(0.5);
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t m = 0; m <= k; ++m) zero.set(k, m, Superoperator::zero(2, 2));
  }
  for (const auto& r : solve_nz(zero, rho0, 5)) CHECK((r - rho0).norm() < 1e-15);
  CHECK_THROWS_AS(solve_nz(zero, rho0, 6), InvalidArgument);
}

TEST_CASE("second-order kernel is basis independent", "[master]") {
  std::mt19937 rng(19);
  const auto m = models::aklt_heisenberg_model(0.2);
  const Matrix h = *m.hamiltonian();
  const Matrix u = testing::random_unitary(rng, 3);
  std::vector<Matrix> rotated;
  for (const auto& e : gell_mann_basis(3)) rotated.push_back(u * e * u.adjoint());
  for (std::size_t mm = 1; mm <= 3; ++mm) {
    const Superoperator a = second_order_kernel(m, 4, mm, h, m.g());
    const Superoperator b = second_order_kernel(m, 4, mm, h, m.g(), rotated);
    CHECK((a - b).norm() < 1e-14);
  }
}

TEST_CASE("second-order kernel matches the full-space correlation kernel", "[master]") {
  for (const auto& m : {models::aklt_heisenberg_model(0.2), models::aklt_controlled_model(0.3)}) {
    for (std::size_t mm = 1; mm <= 4; ++mm) {
      const Superoperator a = second_order_kernel(m, 6, mm, *m.hamiltonian(), m.g());
      const Superoperator b = (m.g() * m.g() * m.tau()) * stationary_correlation_kernel(m, mm);
      CHECK((a - b).norm() < 1e-13);
    }
  }
}

TEST_CASE("second-order kernel special cases", "[master]") {
  SECTION("cluster correlations vanish") {
    const auto m = models::cluster_model(0.3, 6);
    for (std::size_t mm = 1; mm <= 4; ++mm) {
      CHECK(second_order_kernel(m, 5, mm, *m.hamiltonian(), m.g()).norm() < 1e-14);
    }
  }
  SECTION("product environment") {
    Vector c(3);
    c << 0.6, 0.0, 0.8;
    const auto m = CollisionModel::from_hamiltonian(models::product_env(c), models::heisenberg_hamiltonian(), 2, 3, 0.4);
    CHECK(second_order_kernel(m, 3, 2, *m.hamiltonian(), m.g()).norm() < 1e-15);
  }
  SECTION("AKLT decays by 1/3 per step of m") {
    const auto m = models::aklt_heisenberg_model(0.2);
    double prev = 0.0;
    for (std::size_t mm = 1; mm <= 6; ++mm) {
      const double n = second_order_kernel(m, 7, mm, *m.hamiltonian(), m.g()).norm();
      if (mm > 1) CHECK_THAT(n / prev, WithinAbs(1.0 / 3.0, 1e-10));
      prev = n;
    }
  }
  SECTION("argument checks") {
    const auto m = models::aklt_heisenberg_model(0.2);
    CHECK_THROWS_AS(second_order_kernel(m, 3, 0, *m.hamiltonian(), m.g()), InvalidArgument);
    Matrix nh = *m.hamiltonian();
    nh(0, 1) += 1.0;
    CHECK_THROWS_AS(second_order_kernel(m, 3, 1, nh, m.g()), InvalidArgument);
  }
}

TEST_CASE("second-order residual shrinks like g^3 at fixed tau", "[master]") {
  // Controlled coupling: the cubic term of the exact kernel survives.
  const auto m1 = models::aklt_controlled_model(0.2);
  const auto m2 = models::aklt_controlled_model(0.1);
  const double r1 = (memory_kernel(m1, 3, 1) - second_order_kernel(m1, 3, 1, *m1.hamiltonian(), m1.g())).norm();
  const double r2 = (memory_kernel(m2, 3, 1) - second_order_kernel(m2, 3, 1, *m2.hamiltonian(), m2.g())).norm();
  CHECK(r1 / r2 >= 6.0);
  CHECK(r1 / r2 <= 10.0);
}

TEST_CASE("stationary kernels decay at the transfer ratio", "[master]") {
  for (const auto& m : {models::aklt_heisenberg_model(0.3), models::aklt_controlled_model(0.3)}) {
    const double l2 = std::abs(transfer_spectrum(m.env()).lambda2);
    double prev = stationary_correlation_kernel(m, 1).norm();
    for (std::size_t mm = 2; mm <= 6; ++mm) {
      const double n = stationary_correlation_kernel(m, mm).norm();
      CHECK_THAT(n / prev, WithinRel(l2, 0.05));
      prev = n;
    }
  }
}

TEST_CASE("stroboscopic generator structure", "[master]") {
  SECTION("uncorrelated environment has no nonlocal part") {
    const auto m = models::aklt_controlled_model(0.2);
    const auto md = m.with_env(decorrelate(m.env()));
    const auto gen = stroboscopic_generator(md);
    CHECK(gen.first_kernel.norm() < 1e-14);
    CHECK(!gen.nonlocal.has_value());
    CHECK((gen.generator - gen.local).norm() < 1e-14);
  }
  SECTION("trace annihilation for both forms and two-site choices") {
    const auto m = models::aklt_controlled_model(0.2);
    for (auto form : {StroboscopicForm::kCumulant, StroboscopicForm::kLiteral}) {
      for (auto two : {TwoSiteState::kCorrelated, TwoSiteState::kProduct}) {
        CHECK(stroboscopic_generator(m, {form, two}).generator.trace_annihilation_residual() < 1e-10);
      }
    }
  }
  SECTION("nonlocal term is K1 over the signed ratio") {
    const auto m = models::aklt_controlled_model(0.2);
    const auto gen = stroboscopic_generator(m);
    REQUIRE(gen.nonlocal.has_value());
    CHECK((gen.nonlocal->matrix * (-1.0 / 3.0) - gen.first_kernel.matrix).norm() < 1e-12);
  }
  SECTION("GHZ bulk is rejected") {
    const auto m = CollisionModel::from_hamiltonian(models::ghz_bulk_env(), models::exchange_hamiltonian(2), 2, 2, 0.3);
    CHECK_THROWS_AS(stroboscopic_generator(m), InfiniteCorrelationLength);
    CHECK_THROWS_AS(stroboscopic_generator(models::ghz_model(5, 0.3)), InvalidArgument);
  }
}

TEST_CASE("AKLT Heisenberg generator vanishes in the stroboscopic limit", "[master]") {
  double prev = 0.0;
  for (double gt : {0.2, 0.1, 0.05}) {
    const double tau = gt * gt / 0.1;
    const double n = stroboscopic_generator(models::aklt_heisenberg_model(gt, tau)).generator.norm();
    if (prev > 0.0) CHECK(n < 0.3 * prev);
    prev = n;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("GKSL propagation", "[master]") {
  std::mt19937 rng(27);
  const auto gen = stroboscopic_generator(models::aklt_controlled_model(0.1)).generator;
  const Matrix rho0 = testing::random_density(rng, 2);
  CHECK((evolve_gksl(gen, rho0, 0.0) - rho0).norm() < 1e-15);
  CHECK((evolve_gksl(Superoperator::zero(2, 2), rho0, 3.0) - rho0).norm() < 1e-15);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix r = testing::random_density(rng, 2);
    const Matrix a = evolve_gksl(gen, r, 1.3 + 2.1);
    const Matrix b = evolve_gksl(gen, evolve_gksl(gen, r, 2.1), 1.3);
    CHECK((a - b).norm() < 1e-10);
    CHECK(std::abs(a.trace() - 1.0) < 1e-10);
  }
}

TEST_CASE("stroboscopic trajectory converges as g tau shrinks", "[master]") {
  auto deviation = [](double gt) {
    const double tau = gt * gt / 0.1;
    const auto m = models::aklt_controlled_model(gt, tau);
    const auto gen = stroboscopic_generator(m).generator;
    const auto k_max = static_cast<std::size_t>(std::llround(20.0 / gt));
    const auto traj = trajectory(m, models::ground_state(), k_max);
    double worst = 0.0;
    for (std::size_t k = 0; k <= k_max; ++k) {
      const Matrix r = evolve_gksl(gen, models::ground_state(), static_cast<double>(k) * tau);
      worst = std::max(worst, std::abs(((traj[k] - r) * models::sigma_z()).trace()));
    }
    return worst;
  };
  const double a = deviation(0.1);
  const double b = deviation(0.05);
  CHECK(a / b >= 1.8);
}
