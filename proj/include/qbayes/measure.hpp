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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbayes/matcore.hpp"

namespace qbayes {

/// Finite ordered set of outcome labels.
///
/// Product spaces (built by `OutcomeSpace::product` or read from tuple labels)
/// additionally remember the component labels of each outcome; their display
/// label is "(a,b,...)". An optional real embedding attaches a value to every
/// label, which the inference estimators need.
class OutcomeSpace {
public:
    OutcomeSpace() = default;
    explicit OutcomeSpace(std::vector<std::string> labels,
                          std::optional<std::vector<double>> embedding = std::nullopt);

    /// Outcome space whose labels are tuples of component labels, each of
    /// uniform arity.
    static OutcomeSpace from_tuples(std::vector<std::vector<std::string>> tuples,
                                    std::optional<std::vector<double>> embedding = std::nullopt);

    /// Ordered Cartesian product; the first factor varies slowest.
    static OutcomeSpace product(std::span<const OutcomeSpace> factors);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

    std::optional<std::size_t> find(const std::string& label) const;
    /// Throws UnknownLabel.
    std::size_t index_of(const std::string& label) const;

    bool is_product() const noexcept { return !tuples_.empty(); }
    std::size_t arity() const noexcept { return tuples_.empty() ? 0 : tuples_.front().size(); }
    const std::vector<std::vector<std::string>>& tuples() const noexcept { return tuples_; }

    const std::optional<std::vector<double>>& embedding() const noexcept { return embedding_; }
    OutcomeSpace with_embedding(std::vector<double> values) const;

    friend bool operator==(const OutcomeSpace& a, const OutcomeSpace& b) {
        return a.labels_ == b.labels_ && a.embedding_ == b.embedding_;
    }

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<std::string>> tuples_;
    std::optional<std::vector<double>> embedding_;
};

std::string tuple_label(std::span<const std::string> components);

/// Positive unit-trace matrix.
class DensityMatrix {
public:
    /// Throws NotHermitian or NotADensityMatrix with the offending residual.
    static DensityMatrix make(const CMatrix& m, const Tolerances& tol = {});
    static DensityMatrix maximally_mixed(Index d);
    static DensityMatrix pure(const CVector& psi);
    /// |i><i| in dimension d.
    static DensityMatrix basis(Index d, Index i);

    const CMatrix& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    double purity() const;
    /// tr(rho^m) for m >= 1.
    double moment(int m) const;

private:
    explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {}
    CMatrix m_;
};

/// Largest violation of the density-matrix conditions: hermiticity residual,
/// negative part of the smallest eigenvalue, and trace deviation.
double density_residual(const CMatrix& m);

/// Positive-operator-valued measure on a finite outcome space.
class Povm {
public:
    /// Throws DimensionMismatch, NotHermitian or NotAPovm.
    static Povm make(OutcomeSpace space, std::vector<CMatrix> effects, const Tolerances& tol = {});
    /// Projective measurement in the computational basis, labels "0".."d-1".
    static Povm computational(Index d);

    const OutcomeSpace& space() const noexcept { return space_; }
    const std::vector<CMatrix>& effects() const noexcept { return effects_; }
    const CMatrix& effect(std::size_t i) const { return effects_.at(i); }
    const CMatrix& effect(const std::string& label) const { return effects_.at(space_.index_of(label)); }
    std::size_t size() const noexcept { return effects_.size(); }
    Index dim() const noexcept { return effects_.empty() ? 0 : effects_.front().rows(); }

private:
    Povm(OutcomeSpace space, std::vector<CMatrix> effects)
        : space_(std::move(space)), effects_(std::move(effects)) {}
    OutcomeSpace space_;
    std::vector<CMatrix> effects_;
};

/// Entrywise max |sum_x E_x - I|.
double completeness_residual(std::span<const CMatrix> effects);

struct OutcomeDistribution {
    OutcomeSpace space;
    std::vector<double> probs;

    double prob(const std::string& label) const { return probs.at(space.index_of(label)); }
};

/// Clip round-off negatives in [-tol, 0) to zero and renormalize when the
/// total is within tol of 1. Larger negatives raise NegativeProbability, a
/// larger total deviation raises NotAPovm.
void normalize_probabilities(std::vector<double>& probs, double tol = kNormTol);

/// Outcome probabilities tr[rho E_x].
OutcomeDistribution induced_measure(const Povm& nu, const DensityMatrix& rho, const Tolerances& tol = {});

/// Radon-Nikodym derivative of the POVM with respect to its induced measure
/// under counting measure: E_x / tr[rho E_x], zero for zero effects.
/// Requires rho full rank (smallest eigenvalue > 1e-8).
std::vector<CMatrix> rn_derivative(const Povm& nu, const DensityMatrix& rho);

/// Marginal along `axis` of a POVM over tuple labels. The marginal outcome
/// order is the first-appearance order of component labels.
Povm marginal_observable(const Povm& joint, std::size_t axis);

/// Joint observable of two commuting POVMs on the same space: effects
/// a_x b_y over tuple labels (x, y). Throws NotCommuting otherwise.
Povm product_povm(const Povm& a, const Povm& b, double tol = 1e-10);

}  // namespace qbayes
