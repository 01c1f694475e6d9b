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

// Random generators and independent numeric oracles shared by the test
// binaries. The oracles deliberately avoid Eigen's decompositions.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qbayes/instrument.hpp"
#include "qbayes/matcore.hpp"
#include "qbayes/measure.hpp"

namespace qbayes::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::uint64_t bits() { return rng_(); }

    CMatrix ginibre(Index rows, Index cols) {
        CMatrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = Complex(normal(), normal());
        return m;
    }

    CMatrix hermitian(Index d) {
        CMatrix g = ginibre(d, d);
        return 0.5 * (g + g.adjoint());
    }

    CMatrix density(Index d) {
        CMatrix g = ginibre(d, d);
        CMatrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        return 0.5 * (rho + rho.adjoint());
    }

    CMatrix pure_density(Index d) {
        CVector v = ginibre(d, 1).col(0);
        v.normalize();
        return v * v.adjoint();
    }

    CMatrix unitary(Index d) {
        // Gram-Schmidt on a Ginibre matrix.
        CMatrix g = ginibre(d, d);
        for (Index j = 0; j < d; ++j) {
            for (Index k = 0; k < j; ++k) g.col(j) -= g.col(k) * g.col(k).dot(g.col(j));
            g.col(j).normalize();
        }
        return g;
    }

    /// Random instrument with `outcomes` outcomes, each with 1..max_kraus
    /// Kraus operators, normalized through S^{-1/2}.
    KrausInstrument instrument(Index d_in, Index d_out, int outcomes, int max_kraus) {
        std::vector<KrausList> lists(static_cast<std::size_t>(outcomes));
        CMatrix s = CMatrix::Zero(d_in, d_in);
        for (auto& list : lists) {
            const int n = integer(1, max_kraus);
            for (int k = 0; k < n; ++k) {
                list.push_back(ginibre(d_out, d_in));
                s += list.back().adjoint() * list.back();
            }
        }
        // S must be invertible: at least d_in / d_out operators in total.
        std::size_t total = 0;
        for (const auto& list : lists) total += list.size();
        while (static_cast<Index>(total) * d_out < d_in) {
            lists.front().push_back(ginibre(d_out, d_in));
            s += lists.front().back().adjoint() * lists.front().back();
            ++total;
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (s + s.adjoint()));
        const CMatrix inv_sqrt = es.eigenvectors() *
                                 es.eigenvalues().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() *
                                 es.eigenvectors().adjoint();
        std::vector<std::string> labels;
        for (int x = 0; x < outcomes; ++x) labels.push_back("o" + std::to_string(x));
        for (auto& list : lists)
            for (auto& k : list) k = k * inv_sqrt;
        return KrausInstrument::make_reduced(OutcomeSpace(labels), std::move(lists));
    }

    Event event(std::size_t n) {
        Event e;
        for (std::size_t i = 0; i < n; ++i)
            if (uniform() < 0.5) e.push_back(i);
        return e;
    }

private:
    std::mt19937_64 rng_;
};

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending.
inline std::vector<double> jacobi_symmetric_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i][i];
    std::sort(out.begin(), out.end());
    return out;
}

/// Eigenvalues of a Hermitian matrix through the real embedding
/// [[Re, -Im], [Im, Re]], whose spectrum is the Hermitian one doubled.
inline std::vector<double> oracle_hermitian_eigenvalues(const CMatrix& h) {
    const auto n = static_cast<std::size_t>(h.rows());
    std::vector<std::vector<double>> a(2 * n, std::vector<double>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex z = h(static_cast<Index>(i), static_cast<Index>(j));
            a[i][j] = z.real();
            a[i + n][j + n] = z.real();
            a[i][j + n] = -z.imag();
            a[i + n][j] = z.imag();
        }
    }
    const std::vector<double> doubled = jacobi_symmetric_eigenvalues(a);
    std::vector<double> out;
    for (std::size_t i = 0; i < doubled.size(); i += 2) out.push_back(0.5 * (doubled[i] + doubled[i + 1]));
    return out;
}

/// Characteristic polynomial coefficients of a square matrix by the
/// Faddeev-LeVerrier recursion; c[0] = 1 is the leading coefficient.
inline std::vector<Complex> characteristic_polynomial(const CMatrix& a) {
    const Index n = a.rows();
    std::vector<Complex> c(static_cast<std::size_t>(n) + 1);
    c[0] = 1.0;
    CMatrix m = CMatrix::Zero(n, n);
    for (Index k = 1; k <= n; ++k) {
        m = a * m + c[static_cast<std::size_t>(k - 1)] * CMatrix::Identity(n, n);
        CMatrix am = a * m;
        c[static_cast<std::size_t>(k)] = -am.trace() / static_cast<double>(k);
    }
    return c;
}

/// Roots of a monic polynomial by Durand-Kerner iteration.
inline std::vector<Complex> polynomial_roots(const std::vector<Complex>& c) {
    const std::size_t n = c.size() - 1;
    std::vector<Complex> z(n);
    const Complex seed(0.4, 0.9);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, static_cast<double>(i));
    auto eval = [&](Complex x) {
        Complex v = c[0];
        for (std::size_t i = 1; i < c.size(); ++i) v = v * x + c[i];
        return v;
    };
    for (int iter = 0; iter < 5000; ++iter) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            const Complex step = eval(z[i]) / denom;
            z[i] -= step;
            delta = std::max(delta, std::abs(step));
        }
        if (delta < 1e-15) break;
    }
    return z;
}

/// Sorted copy by (real, imag) for multiset comparisons.
inline std::vector<Complex> sorted_complex(std::vector<Complex> v) {
    std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
        if (std::abs(a.real() - b.real()) > 1e-7) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return v;
}

inline CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline CMatrix ket_bra(Index d, Index i, Index j) {
    CMatrix m = CMatrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

inline CMatrix plus_projector() {
    CMatrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    return m;
}

inline CMatrix minus_projector() {
    CMatrix m(2, 2);
    m << 0.5, -0.5, -0.5, 0.5;
    return m;
}

inline KrausInstrument luders_z() {
    return KrausInstrument::make(OutcomeSpace({"0", "1"}), {{ket_bra(2, 0, 0)}, {ket_bra(2, 1, 1)}});
}

inline KrausInstrument luders_x() {
    return KrausInstrument::make(OutcomeSpace({"0", "1"}), {{plus_projector()}, {minus_projector()}});
}

inline CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

/// Noisy readout with symmetric fidelity q.
inline KrausInstrument noisy_readout(double q) {
    return KrausInstrument::make(OutcomeSpace({"0", "1"}), {{diag2(std::sqrt(q), std::sqrt(1 - q))},
                                                            {diag2(std::sqrt(1 - q), std::sqrt(q))}});
}

inline KrausList amplitude_damping(double gamma) {
    CMatrix k0 = diag2(1.0, std::sqrt(1.0 - gamma));
    CMatrix k1 = CMatrix::Zero(2, 2);
    k1(0, 1) = std::sqrt(gamma);
    return {k0, k1};
}

inline KrausList depolarizing(double p) {
    return {std::sqrt(1 - 3 * p / 4) * CMatrix::Identity(2, 2), std::sqrt(p / 4) * pauli_x(),
            std::sqrt(p / 4) * pauli_y(), std::sqrt(p / 4) * pauli_z()};
}

/// Generalized amplitude damping: relaxation gamma towards the thermal
/// state with excited population n.
inline KrausList generalized_amplitude_damping(double gamma, double n) {
    const double a = std::sqrt(1 - n);
    const double b = std::sqrt(n);
    CMatrix k1 = CMatrix::Zero(2, 2);
    k1(0, 1) = a * std::sqrt(gamma);
    CMatrix k3 = CMatrix::Zero(2, 2);
    k3(1, 0) = b * std::sqrt(gamma);
    return {a * diag2(1.0, std::sqrt(1 - gamma)), k1, b * diag2(std::sqrt(1 - gamma), 1.0), k3};
}

}  // namespace qbayes::testing
