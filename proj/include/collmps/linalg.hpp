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

// Dense complex linear algebra shared by the rest of the library.
//
// Every matrix is an Eigen::MatrixXcd. Composite operators on H_1 ⊗ H_2 ⊗ ...
// use the Kronecker ordering where the first factor is the most significant
// index, i.e. |i_1 i_2 ...> sits at row i_1 * (d_2 d_3 ...) + i_2 * (...) + ...

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <initializer_list>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "collmps/error.hpp"

namespace collmps {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Numerical tolerances. `exact` is used for identities that hold up to
// roundoff, `dynamics` for quantities accumulated over many steps.
struct Tolerances {
  double exact = 1e-12;
  double dynamics = 1e-8;
  double positivity = 1e-10;
};

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

// |i><j| on an n-dimensional space.
inline Matrix unit_matrix(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  Matrix m = Matrix::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline double hermiticity_residual(const Matrix& m) {
  return (m - m.adjoint()).norm();
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Smallest eigenvalue of the Hermitian part of `m`.
inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Largest singular value.
inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// Half the trace norm of (a - b); both are assumed Hermitian.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline bool is_density_matrix(const Matrix& rho, double tol = 1e-10) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) return false;
  if (!rho.allFinite()) return false;
  if (hermiticity_residual(rho) > tol) return false;
  if (std::abs(rho.trace() - 1.0) > tol) return false;
  return min_eigenvalue(rho) >= -tol;
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Positive square root of a Hermitian positive semidefinite matrix; negative
// eigenvalues from roundoff are clamped to zero.
inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Column-major vectorization: vec(X)[i + j * rows] = X(i, j).
inline Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0) {
    throw DimensionError("unvec: vector length not divisible by row count");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

inline std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<std::size_t>());
}

// An operator on a tensor product space together with its factor dimensions.
struct MultiIndexOperator {
  std::vector<std::size_t> dims;
  Matrix matrix;

  MultiIndexOperator() = default;
  MultiIndexOperator(std::vector<std::size_t> factor_dims, Matrix m)
      : dims(std::move(factor_dims)), matrix(std::move(m)) {
    validate();
  }

  std::size_t total_dim() const { return product(dims); }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(total_dim());
    if (matrix.rows() != n || matrix.cols() != n) {
      throw DimensionError("MultiIndexOperator: matrix is " + std::to_string(matrix.rows()) +
                           "x" + std::to_string(matrix.cols()) +
                           " but factor dims multiply to " + std::to_string(n));
    }
  }
};

// Traces out every factor not listed in `keep`. The kept factors retain their
// original relative order.
inline MultiIndexOperator partial_trace(const MultiIndexOperator& op,
                                        std::span<const std::size_t> keep) {
  op.validate();
  const std::size_t nf = op.dims.size();
  if (keep.empty()) throw InvalidArgument("partial_trace: keep set is empty");
  std::vector<bool> kept(nf, false);
  for (std::size_t f : keep) {
    if (f >= nf) {
      throw InvalidArgument("partial_trace: factor index " + std::to_string(f) +
                            " out of range for " + std::to_string(nf) + " factors");
    }
    if (kept[f]) throw InvalidArgument("partial_trace: duplicate factor index");
    kept[f] = true;
  }

  std::vector<std::size_t> strides(nf, 1);
  for (std::size_t f = nf; f-- > 1;) strides[f - 1] = strides[f] * op.dims[f];

  std::vector<std::size_t> keep_dims, trace_dims, keep_strides, trace_strides;
  for (std::size_t f = 0; f < nf; ++f) {
    if (kept[f]) {
      keep_dims.push_back(op.dims[f]);
      keep_strides.push_back(strides[f]);
    } else {
      trace_dims.push_back(op.dims[f]);
      trace_strides.push_back(strides[f]);
    }
  }

  // Offsets of all multi-indices over a set of factors, in lexicographic order.
  auto offsets = [](const std::vector<std::size_t>& d, const std::vector<std::size_t>& s) {
    std::vector<std::size_t> out{0};
    for (std::size_t f = 0; f < d.size(); ++f) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * d[f]);
      for (std::size_t base : out) {
        for (std::size_t i = 0; i < d[f]; ++i) next.push_back(base + i * s[f]);
      }
      out = std::move(next);
    }
    return out;
  };
  const auto ko = offsets(keep_dims, keep_strides);
  const auto to = offsets(trace_dims, trace_strides);

  const auto nk = static_cast<Eigen::Index>(ko.size());
  Matrix out = Matrix::Zero(nk, nk);
  for (Eigen::Index r = 0; r < nk; ++r) {
    for (Eigen::Index c = 0; c < nk; ++c) {
      cplx acc = 0.0;
      for (std::size_t t : to) {
        acc += op.matrix(static_cast<Eigen::Index>(ko[r] + t),
                         static_cast<Eigen::Index>(ko[c] + t));
      }
      out(r, c) = acc;
    }
  }
  return MultiIndexOperator(std::move(keep_dims), std::move(out));
}

inline MultiIndexOperator partial_trace(const MultiIndexOperator& op,
                                        std::initializer_list<std::size_t> keep) {
  return partial_trace(op, std::span<const std::size_t>(keep.begin(), keep.size()));
}

// tr_B of an operator on H_A ⊗ H_B with dim(H_A) = da.
inline Matrix trace_second(const Matrix& m, Eigen::Index da) {
  const Eigen::Index db = m.rows() / da;
  Matrix out = Matrix::Zero(da, da);
  for (Eigen::Index a = 0; a < da; ++a) {
    for (Eigen::Index b = 0; b < da; ++b) {
      out(a, b) = m.block(a * db, b * db, db, db).trace();
    }
  }
  return out;
}

// tr_A of an operator on H_A ⊗ H_B with dim(H_A) = da.
inline Matrix trace_first(const Matrix& m, Eigen::Index da) {
  const Eigen::Index db = m.rows() / da;
  Matrix out = Matrix::Zero(db, db);
  for (Eigen::Index a = 0; a < da; ++a) out += m.block(a * db, a * db, db, db);
  return out;
}

// U = exp(-i theta H) for Hermitian H, via the eigendecomposition of H.
inline Matrix expm_hermitian_generator(const Matrix& h, double theta, double tol = 1e-12) {
  require_square(h, "expm_hermitian_generator: generator");
  const double res = hermiticity_residual(h);
  if (!(res <= tol)) {
    throw InvalidArgument("expm_hermitian_generator: generator is not Hermitian (residual " +
                          std::to_string(res) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases(i) = std::exp(-kI * theta * es.eigenvalues()(i));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

struct LqResult {
  Matrix l;  // rows(M) x p
  Matrix q;  // p x cols(M), orthonormal rows
  Eigen::Index rank = 0;
};

// M = L Q with orthonormal rows of Q, p = min(rows, cols). L is lower
// trapezoidal. `rank` counts singular values of L above rank_tol * s_max.
inline LqResult lq_factorize(const Matrix& m, double rank_tol = 1e-12) {
  const Eigen::Index r = m.rows();
  const Eigen::Index c = m.cols();
  const Eigen::Index p = std::min(r, c);
  Eigen::HouseholderQR<Matrix> qr(m.adjoint());
  Matrix qfull = qr.householderQ() * Matrix::Identity(c, p);
  Matrix rfac = qr.matrixQR().topRows(p).template triangularView<Eigen::Upper>();
  LqResult out{rfac.adjoint(), qfull.adjoint(), 0};
  if (p > 0) {
    Eigen::JacobiSVD<Matrix> svd(out.l);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (smax > 0.0 && s(i) > rank_tol * smax) ++out.rank;
    }
  }
  return out;
}

// LQ factorization with directions of relative weight below rank_tol removed:
// M ≈ L' Q' where Q' has exactly rank orthonormal rows.
inline LqResult truncated_lq(const Matrix& m, double rank_tol = 1e-12) {
  LqResult base = lq_factorize(m, rank_tol);
  if (base.rank == base.q.rows()) return base;
  Eigen::JacobiSVD<Matrix> svd(base.l, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index k = base.rank;
  LqResult out;
  out.rank = k;
  out.l = svd.matrixU().leftCols(k) * svd.singularValues().head(k).cast<cplx>().asDiagonal();
  out.q = svd.matrixV().leftCols(k).adjoint() * base.q;
  return out;
}

// Hilbert-Schmidt orthonormal generalized Gell-Mann basis of n x n operators,
// starting with I / sqrt(n). tr(E_a^† E_b) = delta_ab.
inline std::vector<Matrix> gell_mann_basis(Eigen::Index n) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(n * n));
  basis.push_back(identity(n) / std::sqrt(static_cast<double>(n)));
  const double s2 = std::sqrt(0.5);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      basis.push_back(s2 * (unit_matrix(n, j, k) + unit_matrix(n, k, j)));
      basis.push_back(-kI * s2 * (unit_matrix(n, j, k) - unit_matrix(n, k, j)));
    }
  }
  for (Eigen::Index l = 1; l < n; ++l) {
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < l; ++j) d(j, j) = 1.0;
    d(l, l) = -static_cast<double>(l);
    basis.push_back(d / std::sqrt(static_cast<double>(l * (l + 1))));
  }
  return basis;
}

}  // namespace collmps
