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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbayes/instrument.hpp"
#include "qbayes/measure.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

/// Outcome probabilities tr[J({x}) rho] of an instrument.
OutcomeDistribution outcome_distribution(const KrausInstrument& inst, const DensityMatrix& rho,
                                         const Tolerances& tol = {});

/// Quantum Bayes rule: J({x}) rho / tr[J({x}) rho]. Throws
/// ZeroProbabilityOutcome when the probability is at or below kProbFloor.
DensityMatrix posterior_state(const KrausInstrument& inst, const DensityMatrix& rho, std::size_t x);
DensityMatrix posterior_state(const KrausInstrument& inst, const DensityMatrix& rho, const std::string& label);

/// Posterior states indexed like the outcome space; outcomes with
/// probability at or below kProbFloor carry no state.
struct PosteriorFamily {
    KrausInstrument instrument;
    DensityMatrix prior;
    OutcomeDistribution dist;
    std::vector<std::optional<DensityMatrix>> states;
};

/// Builds the family and verifies the state formula (1e-10) and the
/// mixture identity sum_{x in A} states(x) dist(x) = J(A) rho (1e-9) on
/// every singleton and on the whole space.
PosteriorFamily posterior_family(const KrausInstrument& inst, const DensityMatrix& rho);

/// |sum_{x in A} tr(states(x) a) dist(x) - tr(J(A) rho a)|.
double disintegration_residual(const PosteriorFamily& family, const Event& event, const CMatrix& a);

struct PropernessResult {
    bool proper = true;
    std::optional<CMatrix> witness;      ///< positive operator annihilated by J(X) rho
    std::optional<std::string> outcome;  ///< outcome whose state charges the witness
};

/// Tests positive operators from the eigenbasis of J(X) rho, plus the
/// projector onto its kernel: whenever tr[J(X) rho a] <= 1e-12, every
/// covered state must satisfy tr[state a] <= 1e-10.
PropernessResult properness_check(const PosteriorFamily& family);

struct Trajectory {
    std::uint64_t seed = 0;
    std::vector<std::string> outcomes;
    std::vector<std::size_t> indices;
    /// Conditional probability of each realized outcome.
    std::vector<double> probs;
    std::vector<DensityMatrix> states;
    double logprob = 0.0;
};

/// One sampled step: inverse CDF over the ordered outcomes at uniform `u`.
/// Outcomes at or below kProbFloor are never selected.
struct Step {
    std::size_t index;
    double prob;
    DensityMatrix state;
};
Step sample_step(const KrausInstrument& inst, const DensityMatrix& rho, double u);

/// Runs the sequential scheme. Step i draws from substream i of
/// CounterRng(seed, stream), so the result depends only on the inputs.
Trajectory sample_trajectory(std::span<const KrausInstrument> insts, const DensityMatrix& prior, std::uint64_t seed,
                             std::uint64_t stream = 0);

/// pi(theta | x) proportional to p(x | theta) pi(theta). `likelihood` has
/// one row per theta, each a distribution over observations.
std::vector<double> classical_bayes_oracle(std::span<const double> prior_weights,
                                           const std::vector<std::vector<double>>& likelihood, std::size_t observation);

/// CSV with columns step,outcome,prob,purity (steps numbered from 1).
std::string trajectory_csv(const Trajectory& traj);

}  // namespace qbayes
