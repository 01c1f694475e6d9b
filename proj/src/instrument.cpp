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

#include "qbayes/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace qbayes {

namespace {

constexpr std::size_t kMaxCompositeOutcomes = 1'000'000;

CMatrix stacked(std::span<const CMatrix> kraus) {
    const Index rows = kraus.front().size();
    CMatrix out(rows, static_cast<Index>(kraus.size()));
    for (std::size_t j = 0; j < kraus.size(); ++j) out.col(static_cast<Index>(j)) = kraus[j].reshaped();
    return out;
}

void check_event(const KrausInstrument& inst, const Event& event) {
    for (std::size_t x : event) {
        if (x >= inst.size()) {
            std::ostringstream os;
            os << "event index " << x << " outside outcome space of size " << inst.size();
            fail(ErrorCode::UnknownLabel, os.str());
        }
    }
}

Event normalized(const Event& event) {
    std::set<std::size_t> s(event.begin(), event.end());
    return {s.begin(), s.end()};
}

CMatrix matrix_unit(Index d, Index k, Index l) {
    CMatrix e = CMatrix::Zero(d, d);
    e(k, l) = 1.0;
    return e;
}

CMatrix sqrt_psd(const CMatrix& m) {
    const HermitianEigen e = eig_hermitian(m);
    RVector s = e.values.cwiseMax(0.0).cwiseSqrt();
    return e.vectors * s.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace

// ------------------------------------------------------------- KrausInstrument

double instrument_completeness_residual(std::span<const KrausList> kraus, Index dim_in) {
    CMatrix sum = CMatrix::Zero(dim_in, dim_in);
    for (const auto& list : kraus) {
        for (const auto& k : list) {
            if (k.cols() != dim_in) return std::numeric_limits<double>::infinity();
            sum.noalias() += k.adjoint() * k;
        }
    }
    return max_abs(sum - identity(dim_in));
}

Index kraus_rank(std::span<const CMatrix> kraus, double tol) {
    if (kraus.empty()) return 0;
    const RVector s = singular_values(stacked(kraus));
    return static_cast<Index>((s.array() > tol).count());
}

KrausList reduce_kraus(KrausList kraus, double threshold) {
    if (kraus.empty()) return kraus;
    const Index rows = kraus.front().rows();
    const Index cols = kraus.front().cols();
    const CMatrix v = stacked(kraus);
    Eigen::JacobiSVD<CMatrix> svd(v, Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    const Index rank = static_cast<Index>((s.array() > threshold).count());
    if (rank == static_cast<Index>(kraus.size())) return kraus;
    // v W = U Sigma: columns are mutually orthogonal and span the same
    // operator space, and W unitary keeps sum_k B_k rho B_k^dagger unchanged.
    const CMatrix rotated = v * svd.matrixV();
    KrausList out;
    out.reserve(static_cast<std::size_t>(rank));
    for (Index k = 0; k < rank; ++k) out.push_back(rotated.col(k).reshaped(rows, cols));
    return out;
}

KrausInstrument KrausInstrument::make(OutcomeSpace space, std::vector<KrausList> kraus, const Tolerances& tol) {
    if (kraus.size() != space.size())
        fail(ErrorCode::NotAnInstrument, "instrument needs one Kraus list per outcome");
    Index d_in = -1;
    Index d_out = -1;
    for (const auto& list : kraus) {
        for (const auto& k : list) {
            check_matrix(k);
            if (d_in < 0) {
                d_in = k.cols();
                d_out = k.rows();
            }
            if (k.cols() != d_in || k.rows() != d_out)
                fail(ErrorCode::DimensionMismatch, "Kraus operators of one instrument must share a shape");
        }
    }
    if (d_in <= 0 || d_out <= 0) fail(ErrorCode::NotAnInstrument, "instrument has no Kraus operators");
    const double res = instrument_completeness_residual(kraus, d_in);
    if (res > tol.norm) {
        std::ostringstream os;
        os << "Kraus operators violate completeness (residual " << res << ")";
        fail(ErrorCode::NotAnInstrument, os.str());
    }
    for (std::size_t x = 0; x < kraus.size(); ++x) {
        if (kraus_rank(kraus[x]) != static_cast<Index>(kraus[x].size()))
            fail(ErrorCode::NotAnInstrument,
                 "Kraus list of outcome '" + space.label(x) + "' is linearly dependent");
    }
    return KrausInstrument(d_in, d_out, std::move(space), std::move(kraus));
}

KrausInstrument KrausInstrument::make_reduced(OutcomeSpace space, std::vector<KrausList> kraus,
                                              const Tolerances& tol) {
    for (auto& list : kraus) list = reduce_kraus(std::move(list));
    return make(std::move(space), std::move(kraus), tol);
}

KrausInstrument KrausInstrument::unitary(const CMatrix& u, const std::string& label) {
    return make(OutcomeSpace({label}), {KrausList{u}});
}

KrausInstrument KrausInstrument::channel(KrausList kraus, const std::string& label) {
    return make_reduced(OutcomeSpace({label}), {std::move(kraus)});
}

KrausInstrument KrausInstrument::luders(const Povm& povm) {
    std::vector<KrausList> kraus;
    for (const auto& e : povm.effects()) {
        CMatrix k = sqrt_psd(e);
        if (max_abs(k) <= 1e-12)
            kraus.push_back({});
        else
            kraus.push_back({std::move(k)});
    }
    return make(povm.space(), std::move(kraus));
}

std::size_t KrausInstrument::total_kraus_count() const {
    std::size_t n = 0;
    for (const auto& list : kraus_) n += list.size();
    return n;
}

KrausList KrausInstrument::flat_kraus() const {
    KrausList out;
    for (const auto& list : kraus_) out.insert(out.end(), list.begin(), list.end());
    return out;
}

// ---------------------------------------------------------------------- events

Event full_event(const OutcomeSpace& space) {
    Event e(space.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = i;
    return e;
}

Event event_of(const OutcomeSpace& space, std::span<const std::string> labels) {
    Event e;
    for (const auto& l : labels) e.push_back(space.index_of(l));
    return e;
}

// ------------------------------------------------------------------ primal/dual

CMatrix apply_outcome(const KrausInstrument& inst, std::size_t x, const CMatrix& rho) {
    if (rho.rows() != inst.dim_in() || rho.cols() != inst.dim_in())
        fail(ErrorCode::DimensionMismatch, "state dimension does not match instrument input");
    if (x >= inst.size()) fail(ErrorCode::UnknownLabel, "outcome index out of range");
    const auto& list = inst.kraus(x);
    if (list.empty()) return CMatrix::Zero(inst.dim_out(), inst.dim_out());
    return apply_kraus(list, rho);
}

CMatrix apply_on_event(const KrausInstrument& inst, const Event& event, const CMatrix& rho) {
    check_event(inst, event);
    if (rho.rows() != inst.dim_in() || rho.cols() != inst.dim_in())
        fail(ErrorCode::DimensionMismatch, "state dimension does not match instrument input");
    CMatrix out = CMatrix::Zero(inst.dim_out(), inst.dim_out());
    for (std::size_t x : normalized(event)) out += apply_outcome(inst, x, rho);
    return out;
}

CMatrix apply_channel(const KrausInstrument& inst, const CMatrix& rho) {
    return apply_on_event(inst, full_event(inst.space()), rho);
}

CMatrix dual_outcome(const KrausInstrument& inst, std::size_t x, const CMatrix& b) {
    if (b.rows() != inst.dim_out() || b.cols() != inst.dim_out())
        fail(ErrorCode::DimensionMismatch, "operator dimension does not match instrument output");
    if (x >= inst.size()) fail(ErrorCode::UnknownLabel, "outcome index out of range");
    const auto& list = inst.kraus(x);
    if (list.empty()) return CMatrix::Zero(inst.dim_in(), inst.dim_in());
    return apply_kraus_dual(list, b);
}

CMatrix dual_apply(const KrausInstrument& inst, const Event& event, const CMatrix& b) {
    check_event(inst, event);
    if (b.rows() != inst.dim_out() || b.cols() != inst.dim_out())
        fail(ErrorCode::DimensionMismatch, "operator dimension does not match instrument output");
    CMatrix out = CMatrix::Zero(inst.dim_in(), inst.dim_in());
    for (std::size_t x : normalized(event)) out += dual_outcome(inst, x, b);
    return out;
}

Povm induced_observable(const KrausInstrument& inst) {
    std::vector<CMatrix> effects;
    effects.reserve(inst.size());
    const CMatrix one = identity(inst.dim_out());
    for (std::size_t x = 0; x < inst.size(); ++x) effects.push_back(dual_outcome(inst, x, one));
    return Povm::make(inst.space(), std::move(effects));
}

// ------------------------------------------------------------------ composition

namespace {

void check_chain(std::span<const KrausInstrument> insts) {
    if (insts.empty()) fail(ErrorCode::InvalidArgument, "empty instrument sequence");
    for (std::size_t i = 1; i < insts.size(); ++i) {
        if (insts[i - 1].dim_out() != insts[i].dim_in()) {
            std::ostringstream os;
            os << "step " << i << " outputs dimension " << insts[i - 1].dim_out() << " but step " << i + 1
               << " expects " << insts[i].dim_in();
            fail(ErrorCode::DimensionChainMismatch, os.str());
        }
    }
}

void check_outcome_budget(std::span<const KrausInstrument> insts) {
    std::size_t total = 1;
    for (const auto& inst : insts) {
        if (total > kMaxCompositeOutcomes / inst.size()) {
            fail(ErrorCode::OutcomeExplosion, "composite outcome space exceeds 10^6 outcomes");
        }
        total *= inst.size();
    }
    if (total > kMaxCompositeOutcomes)
        fail(ErrorCode::OutcomeExplosion, "composite outcome space exceeds 10^6 outcomes");
}

}  // namespace

KrausInstrument compose(std::span<const KrausInstrument> insts) {
    check_chain(insts);
    if (insts.size() == 1) return insts.front();
    check_outcome_budget(insts);

    std::vector<OutcomeSpace> spaces;
    for (const auto& inst : insts) spaces.push_back(inst.space());

    // Lexicographic enumeration with the first step as the slowest index,
    // matching OutcomeSpace::product. Reducing after every step keeps lists
    // bounded by d_in * d_out.
    std::vector<KrausList> lists = insts.front().all_kraus();
    for (std::size_t step = 1; step < insts.size(); ++step) {
        const auto& inst = insts[step];
        std::vector<KrausList> next;
        next.reserve(lists.size() * inst.size());
        for (const auto& prefix : lists) {
            for (std::size_t y = 0; y < inst.size(); ++y) {
                KrausList products;
                products.reserve(prefix.size() * inst.kraus(y).size());
                for (const auto& k : inst.kraus(y))
                    for (const auto& p : prefix) products.push_back(k * p);
                next.push_back(reduce_kraus(std::move(products)));
            }
        }
        lists = std::move(next);
    }
    return KrausInstrument::make(OutcomeSpace::product(spaces), std::move(lists));
}

std::vector<Povm> sequential_marginals(std::span<const KrausInstrument> insts) {
    check_chain(insts);
    check_outcome_budget(insts);
    const std::size_t n = insts.size();
    std::vector<Povm> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // tail = J_{i+1}*(X) ... J_n*(X) 1
        CMatrix tail = identity(insts.back().dim_out());
        for (std::size_t j = n; j-- > i + 1;) tail = dual_apply(insts[j], full_event(insts[j].space()), tail);
        std::vector<CMatrix> effects;
        for (std::size_t x = 0; x < insts[i].size(); ++x) {
            CMatrix b = dual_outcome(insts[i], x, tail);
            for (std::size_t j = i; j-- > 0;) b = dual_apply(insts[j], full_event(insts[j].space()), b);
            effects.push_back(std::move(b));
        }
        out.push_back(Povm::make(insts[i].space(), std::move(effects)));
    }
    return out;
}

Povm joint_observable_commuting(std::span<const KrausInstrument> insts, double tol) {
    check_chain(insts);
    check_outcome_budget(insts);
    const Index d = insts.front().dim_in();
    for (const auto& inst : insts) {
        if (inst.dim_in() != d || inst.dim_out() != d)
            fail(ErrorCode::DimensionMismatch, "commuting instruments must act on one algebra");
    }
    for (std::size_t i = 1; i < insts.size(); ++i) {
        const KrausInstrument pred = compose(insts.subspan(0, i));
        for (Index k = 0; k < d; ++k) {
            for (Index l = 0; l < d; ++l) {
                const CMatrix e = matrix_unit(d, k, l);
                for (std::size_t y = 0; y < insts[i].size(); ++y) {
                    const CMatrix ye = dual_outcome(insts[i], y, e);
                    for (std::size_t z = 0; z < pred.size(); ++z) {
                        const CMatrix lhs = dual_outcome(insts[i], y, dual_outcome(pred, z, e));
                        const CMatrix rhs = dual_outcome(pred, z, ye);
                        const double r = max_abs(lhs - rhs);
                        if (r > tol) {
                            std::ostringstream os;
                            os << "step " << i + 1 << " outcome '" << insts[i].space().label(y)
                               << "' does not commute with predecessor outcome '" << pred.space().label(z)
                               << "' on basis element E(" << k << "," << l << "), residual " << r;
                            fail(ErrorCode::NotCommuting, os.str());
                        }
                    }
                }
            }
        }
    }
    const KrausInstrument composite = compose(insts);
    Povm joint = induced_observable(composite);
    if (insts.size() == 1) return joint;
    for (std::size_t i = 0; i < insts.size(); ++i) {
        const Povm own = induced_observable(insts[i]);
        const Povm marg = marginal_observable(joint, i);
        for (std::size_t x = 0; x < own.size(); ++x) {
            const double r = max_abs(own.effect(x) - marg.effect(own.space().label(x)));
            if (r > tol) {
                std::ostringstream os;
                os << "marginal " << i << " differs from the factor observable by " << r;
                fail(ErrorCode::NotCommuting, os.str());
            }
        }
    }
    return joint;
}

// ---------------------------------------------------------------------- dilation

IndirectMeasurement IndirectMeasurement::make(Index system_dim, CMatrix ancilla_state, CMatrix unitary,
                                              OutcomeSpace space, std::vector<CMatrix> pointer,
                                              const Tolerances& tol) {
    const Index m = ancilla_state.rows();
    if (system_dim < 1 || m < 1) fail(ErrorCode::DimensionMismatch, "indirect measurement dimensions must be positive");
    if (density_residual(ancilla_state) > tol.norm)
        fail(ErrorCode::NotADensityMatrix, "ancilla state is not a density matrix");
    const Index joint = system_dim * m;
    if (unitary.rows() != joint || unitary.cols() != joint)
        fail(ErrorCode::DimensionMismatch, "unitary must act on system (x) ancilla");
    const double unit_res = max_abs(unitary.adjoint() * unitary - identity(joint));
    if (unit_res > tol.norm) {
        std::ostringstream os;
        os << "coupling is not unitary (residual " << unit_res << ")";
        fail(ErrorCode::InvalidArgument, os.str());
    }
    if (pointer.size() != space.size()) fail(ErrorCode::NotAPovm, "pointer needs one projection per outcome");
    CMatrix sum = CMatrix::Zero(m, m);
    for (std::size_t x = 0; x < pointer.size(); ++x) {
        const CMatrix& p = pointer[x];
        if (p.rows() != m || p.cols() != m) fail(ErrorCode::DimensionMismatch, "pointer acts on the ancilla");
        if (max_abs(p * p - p) > tol.norm || hermiticity_residual(p) > tol.herm)
            fail(ErrorCode::NotAPovm, "pointer effect '" + space.label(x) + "' is not a projection");
        for (std::size_t y = 0; y < x; ++y) {
            if (max_abs(p * pointer[y]) > tol.norm)
                fail(ErrorCode::NotAPovm, "pointer projections are not mutually orthogonal");
        }
        sum += p;
    }
    if (max_abs(sum - identity(m)) > tol.norm) fail(ErrorCode::NotAPovm, "pointer projections do not sum to identity");
    return IndirectMeasurement(system_dim, std::move(ancilla_state), std::move(unitary), std::move(space),
                               std::move(pointer));
}

CMatrix dilation_isometry(const KrausInstrument& inst) {
    const KrausList all = inst.flat_kraus();
    const Index d_in = inst.dim_in();
    const Index d_out = inst.dim_out();
    const Index m = static_cast<Index>(all.size());
    CMatrix v = CMatrix::Zero(d_out * m, d_in);
    for (Index j = 0; j < m; ++j)
        for (Index s = 0; s < d_out; ++s) v.row(s * m + j) = all[static_cast<std::size_t>(j)].row(s);
    return v;
}

IndirectMeasurement dilate(const KrausInstrument& inst) {
    if (inst.dim_in() != inst.dim_out())
        fail(ErrorCode::DimensionMismatch, "dilate requires an instrument on a single system");
    const Index d = inst.dim_in();
    const Index m = static_cast<Index>(inst.total_kraus_count());
    if (m < 1) fail(ErrorCode::InvalidArgument, "dilate: instrument has no Kraus operators");
    const Index joint = d * m;
    const CMatrix v = dilation_isometry(inst);

    // Columns s*m + 0 carry psi (x) e_0 -> V psi; the rest are filled by
    // Gram-Schmidt over canonical basis vectors in index order.
    CMatrix u = CMatrix::Zero(joint, joint);
    std::vector<Index> fixed_cols;
    for (Index s = 0; s < d; ++s) {
        u.col(s * m) = v.col(s);
        fixed_cols.push_back(s * m);
    }
    std::vector<CVector> basis;
    for (Index s = 0; s < d; ++s) basis.push_back(v.col(s));
    std::vector<CVector> extension;
    for (Index c = 0; c < joint && static_cast<Index>(extension.size()) < joint - d; ++c) {
        CVector w = CVector::Zero(joint);
        w(c) = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) w -= b * b.dot(w);
        }
        const double n = w.norm();
        if (n > 1e-6) {
            w /= n;
            basis.push_back(w);
            extension.push_back(w);
        }
    }
    if (static_cast<Index>(extension.size()) != joint - d)
        fail(ErrorCode::CompletionFailure, "dilate: orthonormal extension degenerated");
    std::size_t next = 0;
    for (Index c = 0; c < joint; ++c) {
        if (c % m == 0) continue;
        u.col(c) = extension[next++];
    }

    CMatrix ancilla = CMatrix::Zero(m, m);
    ancilla(0, 0) = 1.0;
    std::vector<CMatrix> pointer;
    Index slot = 0;
    for (std::size_t x = 0; x < inst.size(); ++x) {
        CMatrix p = CMatrix::Zero(m, m);
        for (std::size_t k = 0; k < inst.kraus(x).size(); ++k, ++slot) p(slot, slot) = 1.0;
        pointer.push_back(std::move(p));
    }
    return IndirectMeasurement::make(d, std::move(ancilla), std::move(u), inst.space(), std::move(pointer));
}

namespace {

CMatrix pointer_on_event(const IndirectMeasurement& im, const Event& event) {
    CMatrix p = CMatrix::Zero(im.ancilla_dim(), im.ancilla_dim());
    for (std::size_t x : normalized(event)) {
        if (x >= im.pointer().size()) fail(ErrorCode::UnknownLabel, "event index outside pointer outcome space");
        p += im.pointer()[x];
    }
    return p;
}

}  // namespace

CMatrix reconstruct_dual(const IndirectMeasurement& im, const Event& event, const CMatrix& a) {
    const Index d = im.system_dim();
    const Index m = im.ancilla_dim();
    if (a.rows() != d || a.cols() != d) fail(ErrorCode::DimensionMismatch, "reconstruct_dual: operator dimension");
    const CMatrix y = im.unitary().adjoint() * kron(a, pointer_on_event(im, event)) * im.unitary();
    const CMatrix& phi = im.ancilla_state();
    CMatrix out = CMatrix::Zero(d, d);
    for (Index s = 0; s < d; ++s)
        for (Index t = 0; t < d; ++t)
            for (Index i = 0; i < m; ++i)
                for (Index j = 0; j < m; ++j) out(s, t) += phi(j, i) * y(s * m + i, t * m + j);
    return out;
}

CMatrix reconstruct_apply(const IndirectMeasurement& im, const Event& event, const CMatrix& rho) {
    const Index d = im.system_dim();
    const Index m = im.ancilla_dim();
    if (rho.rows() != d || rho.cols() != d) fail(ErrorCode::DimensionMismatch, "reconstruct_apply: state dimension");
    const CMatrix z = im.unitary() * kron(rho, im.ancilla_state()) * im.unitary().adjoint();
    const CMatrix p = pointer_on_event(im, event);
    CMatrix out = CMatrix::Zero(d, d);
    for (Index s = 0; s < d; ++s)
        for (Index t = 0; t < d; ++t)
            for (Index i = 0; i < m; ++i)
                for (Index j = 0; j < m; ++j) out(s, t) += p(j, i) * z(s * m + i, t * m + j);
    return out;
}

bool statistically_equivalent(const IndirectMeasurement& a, const IndirectMeasurement& b, double tol) {
    if (a.system_dim() != b.system_dim())
        fail(ErrorCode::IncompatibleOutcomeSpaces, "indirect measurements act on different system dimensions");
    if (a.space().labels() != b.space().labels())
        fail(ErrorCode::IncompatibleOutcomeSpaces, "indirect measurements have different outcome spaces");
    const Index d = a.system_dim();
    for (std::size_t x = 0; x < a.space().size(); ++x) {
        const Event ev{x};
        for (Index k = 0; k < d; ++k) {
            for (Index l = 0; l < d; ++l) {
                const CMatrix e = matrix_unit(d, k, l);
                if (max_abs(reconstruct_dual(a, ev, e) - reconstruct_dual(b, ev, e)) > tol) return false;
            }
        }
    }
    return true;
}

}  // namespace qbayes
