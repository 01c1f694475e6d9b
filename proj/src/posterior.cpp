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

#include "qbayes/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbayes/format.hpp"

namespace qbayes {

namespace {

DensityMatrix normalized_state(const CMatrix& unnormalized, double p) {
    // The numerator is positive by construction; its round-off relative to
    // p can exceed the absolute PSD tolerance when p is tiny.
    Tolerances tol;
    tol.psd = std::max(kPsdTol, 1e-13 / p);
    tol.herm = std::max(kHermTol, 1e-13 / p);
    return DensityMatrix::make(hermitize(unnormalized) / p, tol);
}

void check_input(const KrausInstrument& inst, const DensityMatrix& rho) {
    if (rho.dim() != inst.dim_in()) fail(ErrorCode::DimensionMismatch, "state dimension does not match instrument input");
}

}  // namespace

OutcomeDistribution outcome_distribution(const KrausInstrument& inst, const DensityMatrix& rho, const Tolerances& tol) {
    check_input(inst, rho);
    std::vector<double> probs;
    probs.reserve(inst.size());
    for (std::size_t x = 0; x < inst.size(); ++x) probs.push_back(apply_outcome(inst, x, rho.matrix()).trace().real());
    normalize_probabilities(probs, tol.norm);
    return {inst.space(), std::move(probs)};
}

DensityMatrix posterior_state(const KrausInstrument& inst, const DensityMatrix& rho, std::size_t x) {
    check_input(inst, rho);
    const CMatrix out = apply_outcome(inst, x, rho.matrix());
    const double p = out.trace().real();
    if (!(p > kProbFloor)) {
        std::ostringstream os;
        os << "outcome '" << inst.space().label(x) << "' has probability " << p << "; posterior undefined";
        fail(ErrorCode::ZeroProbabilityOutcome, os.str());
    }
    return normalized_state(out, p);
}

DensityMatrix posterior_state(const KrausInstrument& inst, const DensityMatrix& rho, const std::string& label) {
    return posterior_state(inst, rho, inst.space().index_of(label));
}

PosteriorFamily posterior_family(const KrausInstrument& inst, const DensityMatrix& rho) {
    check_input(inst, rho);
    PosteriorFamily fam{inst, rho, outcome_distribution(inst, rho), {}};
    fam.states.reserve(inst.size());
    const Index d = inst.dim_out();
    CMatrix total = CMatrix::Zero(d, d);
    for (std::size_t x = 0; x < inst.size(); ++x) {
        const CMatrix out = apply_outcome(inst, x, rho.matrix());
        total += out;
        if (!(fam.dist.probs[x] > kProbFloor)) {
            fam.states.emplace_back(std::nullopt);
            if (max_abs(out) > 1e-9)
                fail(ErrorCode::InvalidArgument, "posterior_family: null outcome carries a nonzero output");
            continue;
        }
        const double p = out.trace().real();
        DensityMatrix s = normalized_state(out, p);
        const double formula = max_abs(s.matrix() - out / p);
        const double mixture = max_abs(s.matrix() * fam.dist.probs[x] - out);
        if (formula > 1e-10 || mixture > 1e-9) {
            std::ostringstream os;
            os << "posterior_family: outcome '" << inst.space().label(x) << "' fails the state identities (" << formula
               << ", " << mixture << ")";
            fail(ErrorCode::InvalidArgument, os.str());
        }
        fam.states.emplace_back(std::move(s));
    }
    CMatrix mix = CMatrix::Zero(d, d);
    for (std::size_t x = 0; x < inst.size(); ++x)
        if (fam.states[x]) mix += fam.states[x]->matrix() * fam.dist.probs[x];
    if (max_abs(mix - total) > 1e-9) fail(ErrorCode::InvalidArgument, "posterior_family: mixture identity fails");
    return fam;
}

double disintegration_residual(const PosteriorFamily& family, const Event& event, const CMatrix& a) {
    std::vector<std::size_t> xs(event.begin(), event.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    Complex lhs = 0.0;
    for (std::size_t x : xs) {
        if (x >= family.states.size()) fail(ErrorCode::UnknownLabel, "event index outside outcome space");
        if (family.states[x]) lhs += trace_product(family.states[x]->matrix(), a) * family.dist.probs[x];
    }
    const Complex rhs = trace_product(apply_on_event(family.instrument, xs, family.prior.matrix()), a);
    return std::abs(lhs - rhs);
}

PropernessResult properness_check(const PosteriorFamily& family) {
    const CMatrix total = apply_channel(family.instrument, family.prior.matrix());
    const HermitianEigen e = eig_hermitian(hermitize(total));
    const Index d = total.rows();
    std::vector<CMatrix> candidates;
    CMatrix kernel = CMatrix::Zero(d, d);
    bool has_kernel = false;
    for (Index j = 0; j < d; ++j) {
        const CVector v = e.vectors.col(j);
        candidates.push_back(v * v.adjoint());
        if (e.values(j) <= 1e-12) {
            kernel += v * v.adjoint();
            has_kernel = true;
        }
    }
    if (has_kernel) candidates.push_back(kernel);
    for (const auto& a : candidates) {
        if (trace_product(total, a).real() > 1e-12) continue;
        for (std::size_t x = 0; x < family.states.size(); ++x) {
            if (!family.states[x]) continue;
            if (trace_product(family.states[x]->matrix(), a).real() > 1e-10)
                return {false, a, family.dist.space.label(x)};
        }
    }
    return {};
}

Step sample_step(const KrausInstrument& inst, const DensityMatrix& rho, double u) {
    check_input(inst, rho);
    std::vector<CMatrix> outs;
    std::vector<double> probs;
    outs.reserve(inst.size());
    probs.reserve(inst.size());
    for (std::size_t x = 0; x < inst.size(); ++x) {
        outs.push_back(apply_outcome(inst, x, rho.matrix()));
        probs.push_back(outs.back().trace().real());
    }
    normalize_probabilities(probs);
    std::size_t chosen = inst.size();
    double cum = 0.0;
    for (std::size_t x = 0; x < inst.size(); ++x) {
        if (!(probs[x] > kProbFloor)) continue;
        chosen = x;
        cum += probs[x];
        if (u < cum) break;
    }
    // Falling through keeps the last supported outcome, which absorbs the
    // round-off gap between cum and 1.
    if (chosen == inst.size()) fail(ErrorCode::ZeroProbabilityOutcome, "no outcome has positive probability");
    const double p = outs[chosen].trace().real();
    return {chosen, probs[chosen], normalized_state(outs[chosen], p)};
}

Trajectory sample_trajectory(std::span<const KrausInstrument> insts, const DensityMatrix& prior, std::uint64_t seed,
                             std::uint64_t stream) {
    if (insts.empty()) fail(ErrorCode::InvalidArgument, "sample_trajectory: empty instrument sequence");
    for (std::size_t i = 1; i < insts.size(); ++i) {
        if (insts[i - 1].dim_out() != insts[i].dim_in())
            fail(ErrorCode::DimensionChainMismatch, "sample_trajectory: instrument dimensions do not chain");
    }
    const CounterRng rng(seed, stream);
    Trajectory traj;
    traj.seed = seed;
    DensityMatrix current = prior;
    for (std::size_t i = 0; i < insts.size(); ++i) {
        Step s = sample_step(insts[i], current, rng.uniform(i));
        traj.outcomes.push_back(insts[i].space().label(s.index));
        traj.indices.push_back(s.index);
        traj.probs.push_back(s.prob);
        traj.logprob += std::log(s.prob);
        current = s.state;
        traj.states.push_back(std::move(s.state));
    }
    return traj;
}

std::vector<double> classical_bayes_oracle(std::span<const double> prior_weights,
                                           const std::vector<std::vector<double>>& likelihood,
                                           std::size_t observation) {
    if (likelihood.size() != prior_weights.size())
        fail(ErrorCode::DimensionMismatch, "classical_bayes_oracle: one likelihood row per prior weight");
    std::vector<double> post(prior_weights.size());
    double evidence = 0.0;
    for (std::size_t t = 0; t < post.size(); ++t) {
        if (observation >= likelihood[t].size()) fail(ErrorCode::UnknownLabel, "observation index out of range");
        post[t] = likelihood[t][observation] * prior_weights[t];
        evidence += post[t];
    }
    if (!(evidence > 0.0)) fail(ErrorCode::ZeroEvidence, "observation has zero evidence under the prior");
    for (double& p : post) p /= evidence;
    return post;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "step,outcome,prob,purity\n";
    for (std::size_t i = 0; i < traj.outcomes.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += csv_field(traj.outcomes[i]);
        out += ',';
        out += format_double(traj.probs[i]);
        out += ',';
        out += format_double(traj.states[i].purity());
        out += '\n';
    }
    return out;
}

}  // namespace qbayes
