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

#include <algorithm>
#include <string>
#include <utility>

#include "collmps/error.hpp"
#include "collmps/linalg.hpp"

namespace collmps {

// Linear map from in_dim x in_dim operators to out_dim x out_dim operators,
// stored as an out_dim^2 x in_dim^2 matrix acting on column-major vec(X).
// Under this convention X -> A X B^† is (B^* ⊗ A).
struct Superoperator {
  Eigen::Index in_dim = 0;
  Eigen::Index out_dim = 0;
  Matrix matrix;

  Superoperator() = default;
  Superoperator(Eigen::Index in, Eigen::Index out, Matrix m)
      : in_dim(in), out_dim(out), matrix(std::move(m)) {
    if (matrix.rows() != out * out || matrix.cols() != in * in) {
      throw DimensionError("Superoperator: matrix shape does not match operator dimensions");
    }
  }

  static Superoperator identity(Eigen::Index n) {
    return {n, n, Matrix::Identity(n * n, n * n)};
  }

  static Superoperator zero(Eigen::Index in, Eigen::Index out) {
    return {in, out, Matrix::Zero(out * out, in * in)};
  }

  // X -> a X b^†
  static Superoperator conjugation(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw DimensionError("Superoperator::conjugation: operand shapes differ");
    }
    require_square(a, "Superoperator::conjugation");
    return {a.cols(), a.rows(), kron(b.conjugate(), a)};
  }

  // Tabulates an arbitrary linear map column by column on |i><j|.
  template <class F>
  static Superoperator from_map(Eigen::Index in, Eigen::Index out, F&& f) {
    Matrix m(out * out, in * in);
    for (Eigen::Index j = 0; j < in; ++j) {
      for (Eigen::Index i = 0; i < in; ++i) {
        const Matrix y = f(unit_matrix(in, i, j));
        if (y.rows() != out || y.cols() != out) {
          throw DimensionError("Superoperator::from_map: map returned wrong shape");
        }
        m.col(i + j * in) = vec(y);
      }
    }
    return {in, out, std::move(m)};
  }

  Matrix apply(const Matrix& x) const {
    if (x.rows() != in_dim || x.cols() != in_dim) {
      throw DimensionError("Superoperator::apply: operand is " + std::to_string(x.rows()) + "x" +
                           std::to_string(x.cols()) + ", expected " + std::to_string(in_dim));
    }
    return unvec(matrix * vec(x), out_dim);
  }

  double norm() const { return matrix.norm(); }

  // max over |i><j| of |tr S[|i><j|] - delta_ij|
  double trace_preservation_residual() const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < in_dim; ++j) {
      for (Eigen::Index i = 0; i < in_dim; ++i) {
        cplx tr = 0.0;
        for (Eigen::Index a = 0; a < out_dim; ++a) tr += matrix(a + a * out_dim, i + j * in_dim);
        worst = std::max(worst, std::abs(tr - (i == j ? 1.0 : 0.0)));
      }
    }
    return worst;
  }

  // max over |i><j| of |tr S[|i><j|]|; zero for generators of trace-preserving
  // semigroups and for memory-kernel entries.
  double trace_annihilation_residual() const {
    double worst = 0.0;
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      cplx tr = 0.0;
      for (Eigen::Index a = 0; a < out_dim; ++a) tr += matrix(a + a * out_dim, c);
      worst = std::max(worst, std::abs(tr));
    }
    return worst;
  }
};

inline Superoperator operator*(const Superoperator& a, const Superoperator& b) {
  if (a.in_dim != b.out_dim) throw DimensionError("Superoperator composition: dimension mismatch");
  return {b.in_dim, a.out_dim, a.matrix * b.matrix};
}

inline Superoperator operator+(const Superoperator& a, const Superoperator& b) {
  if (a.in_dim != b.in_dim || a.out_dim != b.out_dim) {
    throw DimensionError("Superoperator sum: dimension mismatch");
  }
  return {a.in_dim, a.out_dim, a.matrix + b.matrix};
}

inline Superoperator operator-(const Superoperator& a, const Superoperator& b) {
  if (a.in_dim != b.in_dim || a.out_dim != b.out_dim) {
    throw DimensionError("Superoperator difference: dimension mismatch");
  }
  return {a.in_dim, a.out_dim, a.matrix - b.matrix};
}

inline Superoperator operator*(cplx s, const Superoperator& a) {
  return {a.in_dim, a.out_dim, s * a.matrix};
}

inline Superoperator operator*(double s, const Superoperator& a) {
  return {a.in_dim, a.out_dim, s * a.matrix};
}

}  // namespace collmps
