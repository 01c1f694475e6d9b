// Copyright 2026 The qbayes Authors
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

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qbayes/errors.hpp"

namespace qbayes {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest system dimension accepted by state, observable and instrument
/// constructors.
inline constexpr Index kMaxDim = 64;

inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kNormTol = 1e-9;
/// Outcomes with probability at or below this floor have no posterior.
inline constexpr double kProbFloor = 1e-12;

/// Validation tolerances. Defaults are the library-wide constants above;
/// the CLI can override them per run.
struct Tolerances {
    double herm = kHermTol;
    double psd = kPsdTol;
    double norm = kNormTol;
};

/// Throws InvalidArgument for non-finite entries and DimensionMismatch when
/// either side exceeds kMaxDim.
void check_matrix(const CMatrix& m);

CMatrix identity(Index d);

/// max |m - m^dagger| over entries.
double hermiticity_residual(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol = kHermTol);
CMatrix hermitize(const CMatrix& m);
double max_abs(const CMatrix& m);

/// tr(a b) without forming the product.
Complex trace_product(const CMatrix& a, const CMatrix& b);

struct HermitianEigen {
    RVector values;   ///< ascending
    CMatrix vectors;  ///< orthonormal columns, first nonzero component real-positive
};

/// Eigendecomposition of a Hermitian matrix with a deterministic output
/// convention. Throws NotHermitian when the input is off by more than
/// `herm_tol`.
HermitianEigen eig_hermitian(const CMatrix& m, double herm_tol = kHermTol);

RVector singular_values(const CMatrix& m);

/// Schatten 1-norm.
double trace_norm(const CMatrix& m);

/// Schatten p-norm for p >= 1; p = infinity gives the operator norm.
double schatten_norm(const CMatrix& m, double p);

bool is_psd(const CMatrix& m, double tol = kPsdTol, double herm_tol = kHermTol);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Column-stacking vectorization: vec(m)[i + rows*j] = m(i, j).
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Index rows, Index cols);

/// rho -> sum_i A_i rho A_i^dagger.
CMatrix apply_kraus(std::span<const CMatrix> kraus, const CMatrix& rho);

/// b -> sum_i A_i^dagger b A_i.
CMatrix apply_kraus_dual(std::span<const CMatrix> kraus, const CMatrix& b);

/// Matrix of the map rho -> sum_i A_i rho A_i^dagger acting on column-stacked
/// vectors. With vec(A X B) = (B^T kron A) vec(X), each term contributes
/// conj(A_i) kron A_i, so entries are (rows_out^2) x (cols_in^2).
struct SuperopMatrix {
    Index dim_in = 0;
    Index dim_out = 0;
    CMatrix entries;

    CMatrix apply(const CMatrix& rho) const;
};

SuperopMatrix superop_matrix(std::span<const CMatrix> kraus);

}  // namespace qbayes
