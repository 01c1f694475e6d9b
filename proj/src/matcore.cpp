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

#include "qbayes/matcore.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qbayes {

void check_matrix(const CMatrix& m) {
    if (m.rows() > kMaxDim || m.cols() > kMaxDim) {
        std::ostringstream os;
        os << "matrix " << m.rows() << "x" << m.cols() << " exceeds the dimension limit " << kMaxDim;
        fail(ErrorCode::DimensionMismatch, os.str());
    }
    if (!m.allFinite()) fail(ErrorCode::InvalidArgument, "matrix has non-finite entries");
}

CMatrix identity(Index d) { return CMatrix::Identity(d, d); }

double hermiticity_residual(const CMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& m, double tol) { return hermiticity_residual(m) <= tol; }

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Complex trace_product(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows() || a.rows() != b.cols())
        fail(ErrorCode::DimensionMismatch, "trace_product: incompatible shapes");
    // tr(ab) = sum_ij a_ij b_ji
    return a.cwiseProduct(b.transpose()).sum();
}

HermitianEigen eig_hermitian(const CMatrix& m, double herm_tol) {
    const double residual = hermiticity_residual(m);
    if (!(residual <= herm_tol)) {
        std::ostringstream os;
        os << "eig_hermitian: hermiticity residual " << residual << " exceeds " << herm_tol;
        fail(ErrorCode::NotHermitian, os.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitize(m));
    if (solver.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "eig_hermitian: solver failed");
    HermitianEigen out{solver.eigenvalues(), solver.eigenvectors()};
    for (Index j = 0; j < out.vectors.cols(); ++j) {
        auto col = out.vectors.col(j);
        for (Index i = 0; i < col.size(); ++i) {
            const double mag = std::abs(col(i));
            if (mag > 1e-12) {
                col *= std::conj(col(i)) / mag;
                col(i) = Complex(std::real(col(i)), 0.0);
                break;
            }
        }
    }
    return out;
}

RVector singular_values(const CMatrix& m) {
    if (m.size() == 0) return RVector();
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues();
}

double trace_norm(const CMatrix& m) { return singular_values(m).sum(); }

double schatten_norm(const CMatrix& m, double p) {
    if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "schatten_norm: p must be >= 1");
    const RVector s = singular_values(m);
    if (s.size() == 0) return 0.0;
    if (std::isinf(p)) return s.maxCoeff();
    if (p == 1.0) return s.sum();
    if (p == 2.0) return std::sqrt(s.squaredNorm());
    double acc = 0.0;
    for (double v : s) acc += std::pow(v, p);
    return std::pow(acc, 1.0 / p);
}

bool is_psd(const CMatrix& m, double tol, double herm_tol) {
    const HermitianEigen e = eig_hermitian(m, herm_tol);
    return e.values.size() == 0 || e.values(0) >= -tol;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CVector vec(const CMatrix& m) { return m.reshaped(); }

CMatrix unvec(const CVector& v, Index rows, Index cols) {
    if (v.size() != rows * cols) fail(ErrorCode::DimensionMismatch, "unvec: size mismatch");
    return v.reshaped(rows, cols);
}

namespace {

void check_kraus_shapes(std::span<const CMatrix> kraus) {
    for (const auto& k : kraus) {
        if (k.rows() != kraus.front().rows() || k.cols() != kraus.front().cols())
            fail(ErrorCode::DimensionMismatch, "Kraus operators have different shapes");
    }
}

}  // namespace

CMatrix apply_kraus(std::span<const CMatrix> kraus, const CMatrix& rho) {
    if (kraus.empty()) return CMatrix::Zero(rho.rows(), rho.cols());
    check_kraus_shapes(kraus);
    if (kraus.front().cols() != rho.rows() || rho.rows() != rho.cols())
        fail(ErrorCode::DimensionMismatch, "apply_kraus: state dimension does not match Kraus input");
    CMatrix out = CMatrix::Zero(kraus.front().rows(), kraus.front().rows());
    for (const auto& k : kraus) out.noalias() += k * rho * k.adjoint();
    return out;
}

CMatrix apply_kraus_dual(std::span<const CMatrix> kraus, const CMatrix& b) {
    if (kraus.empty()) return CMatrix::Zero(b.rows(), b.cols());
    check_kraus_shapes(kraus);
    if (kraus.front().rows() != b.rows() || b.rows() != b.cols())
        fail(ErrorCode::DimensionMismatch, "apply_kraus_dual: operator dimension does not match Kraus output");
    CMatrix out = CMatrix::Zero(kraus.front().cols(), kraus.front().cols());
    for (const auto& k : kraus) out.noalias() += k.adjoint() * b * k;
    return out;
}

CMatrix SuperopMatrix::apply(const CMatrix& rho) const {
    if (rho.rows() != dim_in || rho.cols() != dim_in)
        fail(ErrorCode::DimensionMismatch, "SuperopMatrix::apply: state dimension mismatch");
    return unvec(entries * vec(rho), dim_out, dim_out);
}

SuperopMatrix superop_matrix(std::span<const CMatrix> kraus) {
    if (kraus.empty()) fail(ErrorCode::InvalidArgument, "superop_matrix: empty Kraus list");
    check_kraus_shapes(kraus);
    const Index d_out = kraus.front().rows();
    const Index d_in = kraus.front().cols();
    SuperopMatrix out{d_in, d_out, CMatrix::Zero(d_out * d_out, d_in * d_in)};
    for (const auto& k : kraus) out.entries += kron(k.conjugate(), k);
    return out;
}

}  // namespace qbayes
