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

#include "qbayes/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace qbayes {

// ---------------------------------------------------------------- OutcomeSpace

std::string tuple_label(std::span<const std::string> components) {
    std::string out = "(";
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (i) out += ',';
        out += components[i];
    }
    out += ')';
    return out;
}

OutcomeSpace::OutcomeSpace(std::vector<std::string> labels, std::optional<std::vector<double>> embedding)
    : labels_(std::move(labels)), embedding_(std::move(embedding)) {
    if (labels_.empty()) fail(ErrorCode::InvalidArgument, "outcome space must be nonempty");
    std::set<std::string> seen;
    for (const auto& l : labels_) {
        if (!seen.insert(l).second) fail(ErrorCode::InvalidArgument, "duplicate outcome label '" + l + "'");
    }
    if (embedding_ && embedding_->size() != labels_.size())
        fail(ErrorCode::InvalidArgument, "outcome embedding must assign a value to every label");
    if (embedding_) {
        for (double v : *embedding_)
            if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "outcome embedding has non-finite values");
    }
}

OutcomeSpace OutcomeSpace::from_tuples(std::vector<std::vector<std::string>> tuples,
                                       std::optional<std::vector<double>> embedding) {
    if (tuples.empty()) fail(ErrorCode::MalformedProductLabels, "no tuple labels");
    const std::size_t arity = tuples.front().size();
    if (arity == 0) fail(ErrorCode::MalformedProductLabels, "tuple labels must have at least one component");
    std::vector<std::string> labels;
    labels.reserve(tuples.size());
    for (const auto& t : tuples) {
        if (t.size() != arity) fail(ErrorCode::MalformedProductLabels, "tuple labels have non-uniform arity");
        labels.push_back(tuple_label(t));
    }
    OutcomeSpace out(std::move(labels), std::move(embedding));
    out.tuples_ = std::move(tuples);
    return out;
}

OutcomeSpace OutcomeSpace::product(std::span<const OutcomeSpace> factors) {
    if (factors.empty()) fail(ErrorCode::InvalidArgument, "product of zero outcome spaces");
    std::vector<std::vector<std::string>> tuples{{}};
    for (const auto& f : factors) {
        std::vector<std::vector<std::string>> next;
        next.reserve(tuples.size() * f.size());
        for (const auto& prefix : tuples) {
            for (const auto& l : f.labels()) {
                auto t = prefix;
                t.push_back(l);
                next.push_back(std::move(t));
            }
        }
        tuples = std::move(next);
    }
    return from_tuples(std::move(tuples));
}

std::optional<std::size_t> OutcomeSpace::find(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t OutcomeSpace::index_of(const std::string& label) const {
    if (auto i = find(label)) return *i;
    fail(ErrorCode::UnknownLabel, "unknown outcome label '" + label + "'");
}

OutcomeSpace OutcomeSpace::with_embedding(std::vector<double> values) const {
    OutcomeSpace out = *this;
    if (values.size() != labels_.size())
        fail(ErrorCode::InvalidArgument, "outcome embedding must assign a value to every label");
    out.embedding_ = std::move(values);
    return out;
}

// --------------------------------------------------------------- DensityMatrix

double density_residual(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) return std::numeric_limits<double>::infinity();
    if (!m.allFinite()) return std::numeric_limits<double>::infinity();
    const double herm = hermiticity_residual(m);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitize(m), Eigen::EigenvaluesOnly);
    const double neg = std::max(0.0, -solver.eigenvalues()(0));
    const double tr = std::abs(m.trace() - Complex(1.0, 0.0));
    return std::max({herm, neg, tr});
}

DensityMatrix DensityMatrix::make(const CMatrix& m, const Tolerances& tol) {
    check_matrix(m);
    if (m.rows() != m.cols() || m.rows() == 0)
        fail(ErrorCode::DimensionMismatch, "density matrix must be square and nonempty");
    const double herm = hermiticity_residual(m);
    if (herm > tol.herm) {
        std::ostringstream os;
        os << "density matrix hermiticity residual " << herm;
        fail(ErrorCode::NotHermitian, os.str());
    }
    CMatrix h = hermitize(m);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues()(0);
    if (min_eig < -tol.psd) {
        std::ostringstream os;
        os << "density matrix has negative eigenvalue " << min_eig;
        fail(ErrorCode::NotADensityMatrix, os.str());
    }
    const double tr_dev = std::abs(h.trace().real() - 1.0);
    if (tr_dev > tol.norm) {
        std::ostringstream os;
        os << "density matrix trace deviates from 1 by " << tr_dev;
        fail(ErrorCode::NotADensityMatrix, os.str());
    }
    return DensityMatrix(std::move(h));
}

DensityMatrix DensityMatrix::maximally_mixed(Index d) {
    if (d < 1 || d > kMaxDim) fail(ErrorCode::DimensionMismatch, "invalid dimension");
    return DensityMatrix(identity(d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) fail(ErrorCode::InvalidArgument, "pure state vector must be nonzero");
    const CVector u = psi / n;
    CMatrix m = u * u.adjoint();
    check_matrix(m);
    return DensityMatrix(hermitize(m));
}

DensityMatrix DensityMatrix::basis(Index d, Index i) {
    if (i < 0 || i >= d) fail(ErrorCode::InvalidArgument, "basis index out of range");
    CVector e = CVector::Zero(d);
    e(i) = 1.0;
    return pure(e);
}

double DensityMatrix::purity() const { return trace_product(m_, m_).real(); }

double DensityMatrix::moment(int m) const {
    if (m < 1) fail(ErrorCode::InvalidArgument, "moment order must be >= 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m_, Eigen::EigenvaluesOnly);
    double acc = 0.0;
    for (double lam : solver.eigenvalues()) acc += std::pow(std::max(lam, 0.0), m);
    return acc;
}

// ------------------------------------------------------------------------ Povm

double completeness_residual(std::span<const CMatrix> effects) {
    if (effects.empty()) return std::numeric_limits<double>::infinity();
    CMatrix sum = CMatrix::Zero(effects.front().rows(), effects.front().cols());
    for (const auto& e : effects) sum += e;
    return max_abs(sum - identity(sum.rows()));
}

Povm Povm::make(OutcomeSpace space, std::vector<CMatrix> effects, const Tolerances& tol) {
    if (effects.empty() || effects.size() != space.size())
        fail(ErrorCode::NotAPovm, "POVM needs exactly one effect per outcome");
    const Index d = effects.front().rows();
    for (std::size_t i = 0; i < effects.size(); ++i) {
        auto& e = effects[i];
        check_matrix(e);
        if (e.rows() != d || e.cols() != d)
            fail(ErrorCode::DimensionMismatch, "POVM effects must share one square dimension");
        const double herm = hermiticity_residual(e);
        if (herm > tol.herm) {
            std::ostringstream os;
            os << "effect '" << space.label(i) << "' hermiticity residual " << herm;
            fail(ErrorCode::NotHermitian, os.str());
        }
        e = hermitize(e);
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(e, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues()(0) < -tol.psd) {
            std::ostringstream os;
            os << "effect '" << space.label(i) << "' has negative eigenvalue " << solver.eigenvalues()(0);
            fail(ErrorCode::NotAPovm, os.str());
        }
    }
    const double res = completeness_residual(effects);
    if (res > tol.norm) {
        std::ostringstream os;
        os << "POVM effects do not sum to identity (residual " << res << ")";
        fail(ErrorCode::NotAPovm, os.str());
    }
    return Povm(std::move(space), std::move(effects));
}

Povm Povm::computational(Index d) {
    std::vector<std::string> labels;
    std::vector<CMatrix> effects;
    for (Index i = 0; i < d; ++i) {
        labels.push_back(std::to_string(i));
        effects.push_back(DensityMatrix::basis(d, i).matrix());
    }
    return make(OutcomeSpace(std::move(labels)), std::move(effects));
}

// ------------------------------------------------------------------ operations

void normalize_probabilities(std::vector<double>& probs, double tol) {
    double total = 0.0;
    for (double& p : probs) {
        if (!std::isfinite(p)) fail(ErrorCode::InvalidArgument, "non-finite probability");
        if (p < -tol) {
            std::ostringstream os;
            os << "probability " << p << " is negative beyond round-off";
            fail(ErrorCode::NegativeProbability, os.str());
        }
        if (p < 0.0) p = 0.0;
        total += p;
    }
    if (std::abs(total - 1.0) > tol) {
        std::ostringstream os;
        os << "probabilities sum to " << total;
        fail(ErrorCode::NotAPovm, os.str());
    }
    for (double& p : probs) p /= total;
}

OutcomeDistribution induced_measure(const Povm& nu, const DensityMatrix& rho, const Tolerances& tol) {
    if (nu.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "induced_measure: POVM and state dimensions differ");
    std::vector<double> probs;
    probs.reserve(nu.size());
    for (const auto& e : nu.effects()) probs.push_back(trace_product(rho.matrix(), e).real());
    normalize_probabilities(probs, tol.norm);
    return {nu.space(), std::move(probs)};
}

std::vector<CMatrix> rn_derivative(const Povm& nu, const DensityMatrix& rho) {
    if (nu.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "rn_derivative: POVM and state dimensions differ");
    const HermitianEigen e = eig_hermitian(rho.matrix());
    if (!(e.values(0) > 1e-8)) {
        std::ostringstream os;
        os << "rn_derivative: state is not full rank (smallest eigenvalue " << e.values(0) << ")";
        fail(ErrorCode::NotFullRank, os.str());
    }
    std::vector<CMatrix> out;
    out.reserve(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const CMatrix& eff = nu.effect(i);
        if (max_abs(eff) <= kPsdTol) {
            out.push_back(CMatrix::Zero(eff.rows(), eff.cols()));
            continue;
        }
        const double mass = trace_product(rho.matrix(), eff).real();
        if (!(mass > kProbFloor))
            fail(ErrorCode::InconsistentNullSet,
                 "rn_derivative: nonzero effect '" + nu.space().label(i) + "' has zero induced mass");
        out.push_back(eff / mass);
    }
    return out;
}

Povm marginal_observable(const Povm& joint, std::size_t axis) {
    const OutcomeSpace& space = joint.space();
    if (!space.is_product())
        fail(ErrorCode::MalformedProductLabels, "marginal_observable: outcome labels are not tuples");
    if (axis >= space.arity()) {
        std::ostringstream os;
        os << "marginal_observable: axis " << axis << " out of range for arity " << space.arity();
        fail(ErrorCode::MalformedProductLabels, os.str());
    }
    std::vector<std::string> labels;
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<CMatrix> effects;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const std::string& c = space.tuples()[i][axis];
        auto [it, inserted] = slot.emplace(c, labels.size());
        if (inserted) {
            labels.push_back(c);
            effects.push_back(CMatrix::Zero(joint.dim(), joint.dim()));
        }
        effects[it->second] += joint.effect(i);
    }
    return Povm::make(OutcomeSpace(std::move(labels)), std::move(effects));
}

Povm product_povm(const Povm& a, const Povm& b, double tol) {
    if (a.dim() != b.dim()) fail(ErrorCode::DimensionMismatch, "product_povm: dimensions differ");
    std::vector<std::vector<std::string>> tuples;
    std::vector<CMatrix> effects;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const CMatrix ab = a.effect(i) * b.effect(j);
            const CMatrix ba = b.effect(j) * a.effect(i);
            const double comm = max_abs(ab - ba);
            if (comm > tol) {
                std::ostringstream os;
                os << "product_povm: effects '" << a.space().label(i) << "' and '" << b.space().label(j)
                   << "' do not commute (residual " << comm << ")";
                fail(ErrorCode::NotCommuting, os.str());
            }
            tuples.push_back({a.space().label(i), b.space().label(j)});
            effects.push_back(hermitize(ab));
        }
    }
    return Povm::make(OutcomeSpace::from_tuples(std::move(tuples)), std::move(effects));
}

}  // namespace qbayes
