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
#include <span>
#include <string>
#include <vector>

#include "qbayes/matcore.hpp"
#include "qbayes/measure.hpp"

namespace qbayes {

using KrausList = std::vector<CMatrix>;

/// Set of outcome indices. Order and duplicates are ignored by the
/// operations that consume it.
using Event = std::vector<std::size_t>;

/// Completely positive instrument in Kraus form.
///
/// Outcome x acts as rho -> sum_k K_k(x) rho K_k(x)^dagger with d_out x d_in
/// Kraus operators. The per-outcome lists are linearly independent; an
/// outcome may carry an empty list, which is the zero operation.
class KrausInstrument {
public:
    /// Throws DimensionMismatch, or NotAnInstrument when completeness fails
    /// or a per-outcome list is linearly dependent.
    static KrausInstrument make(OutcomeSpace space, std::vector<KrausList> kraus, const Tolerances& tol = {});

    /// Same as make, after reducing each list to a linearly independent one
    /// with identical action.
    static KrausInstrument make_reduced(OutcomeSpace space, std::vector<KrausList> kraus,
                                        const Tolerances& tol = {});

    /// Single-outcome instrument rho -> u rho u^dagger.
    static KrausInstrument unitary(const CMatrix& u, const std::string& label = "x0");
    /// Single-outcome instrument for the channel with the given Kraus list.
    static KrausInstrument channel(KrausList kraus, const std::string& label = "x0");
    /// Luders instrument of a POVM: K(x) = sqrt(E_x).
    static KrausInstrument luders(const Povm& povm);

    Index dim_in() const noexcept { return dim_in_; }
    Index dim_out() const noexcept { return dim_out_; }
    const OutcomeSpace& space() const noexcept { return space_; }
    std::size_t size() const noexcept { return kraus_.size(); }
    const KrausList& kraus(std::size_t x) const { return kraus_.at(x); }
    const std::vector<KrausList>& all_kraus() const noexcept { return kraus_; }
    std::size_t total_kraus_count() const;
    /// Every Kraus operator of every outcome, in outcome order.
    KrausList flat_kraus() const;

private:
    KrausInstrument(Index dim_in, Index dim_out, OutcomeSpace space, std::vector<KrausList> kraus)
        : dim_in_(dim_in), dim_out_(dim_out), space_(std::move(space)), kraus_(std::move(kraus)) {}

    Index dim_in_ = 0;
    Index dim_out_ = 0;
    OutcomeSpace space_;
    std::vector<KrausList> kraus_;
};

/// Entrywise max |sum_x sum_k K^dagger K - I|.
double instrument_completeness_residual(std::span<const KrausList> kraus, Index dim_in);

/// Number of singular values of the stacked vec(K) matrix above `tol`.
Index kraus_rank(std::span<const CMatrix> kraus, double tol = 1e-8);

/// Linearly independent Kraus list with the same action. Lists that are
/// already independent are returned unchanged; otherwise the stacked vec(K)
/// matrix is rotated onto its right singular vectors and directions with
/// singular value <= threshold are dropped.
KrausList reduce_kraus(KrausList kraus, double threshold = 1e-8);

Event full_event(const OutcomeSpace& space);
/// Throws UnknownLabel.
Event event_of(const OutcomeSpace& space, std::span<const std::string> labels);

/// sum_{x in event} sum_k K_k(x) rho K_k(x)^dagger.
CMatrix apply_on_event(const KrausInstrument& inst, const Event& event, const CMatrix& rho);
CMatrix apply_outcome(const KrausInstrument& inst, std::size_t x, const CMatrix& rho);
/// Unconditional channel (event = whole space).
CMatrix apply_channel(const KrausInstrument& inst, const CMatrix& rho);

/// sum_{x in event} sum_k K_k(x)^dagger b K_k(x).
CMatrix dual_apply(const KrausInstrument& inst, const Event& event, const CMatrix& b);
CMatrix dual_outcome(const KrausInstrument& inst, std::size_t x, const CMatrix& b);

/// Effects sum_k K_k(x)^dagger K_k(x).
Povm induced_observable(const KrausInstrument& inst);

/// Sequential composition; the first element acts first. The outcome space
/// is the ordered product of the factor spaces. Throws
/// DimensionChainMismatch, or OutcomeExplosion above 10^6 outcomes.
KrausInstrument compose(std::span<const KrausInstrument> insts);

/// Observables actually measured at each step of a sequential scheme:
/// J_1*(X) ... J_i*(.) ... J_n*(X) 1.
std::vector<Povm> sequential_marginals(std::span<const KrausInstrument> insts);

/// Joint observable J*1 of the composite, after certifying on the full
/// matrix-unit basis that every step's dual commutes with the dual of its
/// predecessors' composite. Throws NotCommuting with the witness.
Povm joint_observable_commuting(std::span<const KrausInstrument> insts, double tol = 1e-8);

/// Ancilla + unitary + pointer realization of an instrument. The joint
/// space is system (x) ancilla with index s * ancilla_dim + a.
class IndirectMeasurement {
public:
    static IndirectMeasurement make(Index system_dim, CMatrix ancilla_state, CMatrix unitary, OutcomeSpace space,
                                    std::vector<CMatrix> pointer, const Tolerances& tol = {});

    Index system_dim() const noexcept { return system_dim_; }
    Index ancilla_dim() const noexcept { return ancilla_state_.rows(); }
    const CMatrix& ancilla_state() const noexcept { return ancilla_state_; }
    const CMatrix& unitary() const noexcept { return unitary_; }
    const OutcomeSpace& space() const noexcept { return space_; }
    const std::vector<CMatrix>& pointer() const noexcept { return pointer_; }

private:
    IndirectMeasurement(Index system_dim, CMatrix ancilla_state, CMatrix unitary, OutcomeSpace space,
                        std::vector<CMatrix> pointer)
        : system_dim_(system_dim),
          ancilla_state_(std::move(ancilla_state)),
          unitary_(std::move(unitary)),
          space_(std::move(space)),
          pointer_(std::move(pointer)) {}

    Index system_dim_;
    CMatrix ancilla_state_;
    CMatrix unitary_;
    OutcomeSpace space_;
    std::vector<CMatrix> pointer_;
};

/// Dilation with one ancilla level per Kraus operator. The isometry
/// V psi = sum_j K_j psi (x) e_j is completed to a unitary by Gram-Schmidt
/// over canonical basis vectors in index order.
IndirectMeasurement dilate(const KrausInstrument& inst);

/// Isometry V of the dilation, (d * m) x d.
CMatrix dilation_isometry(const KrausInstrument& inst);

/// Phi_phi U^dagger [a (x) nu(A)] U.
CMatrix reconstruct_dual(const IndirectMeasurement& im, const Event& event, const CMatrix& a);
/// tr_ancilla[(1 (x) nu(A)) U (rho (x) phi) U^dagger].
CMatrix reconstruct_apply(const IndirectMeasurement& im, const Event& event, const CMatrix& rho);

/// True iff both realize the same instrument, compared outcome by outcome on
/// every matrix unit.
bool statistically_equivalent(const IndirectMeasurement& a, const IndirectMeasurement& b, double tol = 1e-8);

}  // namespace qbayes
