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
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qbayes/instrument.hpp"
#include "qbayes/posterior.hpp"

namespace qbayes {

/// Repeated application of one square instrument, sampled step by step.
/// Checkpoints are step counts (1-based); cesaro[j] and moments[m][j]
/// belong to checkpoints[j].
struct ChainRun {
    Trajectory trajectory;
    std::vector<std::size_t> checkpoints;
    std::vector<DensityMatrix> cesaro;
    std::map<int, std::vector<double>> moments;
};

/// 1, 2, 4, ... up to n, followed by n itself when n is not a power of two.
std::vector<std::size_t> chain_checkpoints(std::size_t n);

/// Step i uses counter i of CounterRng(seed, stream), so the trajectory is
/// the one sample_trajectory produces for n copies of `inst`.
ChainRun run_chain(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t n, std::uint64_t seed,
                   std::span<const int> moments = {}, std::uint64_t stream = 0);

/// ||Phi(avg) - avg||_1 per checkpoint, Phi the unconditional channel.
std::vector<double> cesaro_fixed_point_residual(const ChainRun& run, const KrausInstrument& inst);

/// max |tr(f_n^m) - tr(f_n'^m)| over the last `window` checkpoints.
double purity_moment_tail(const ChainRun& run, int m, std::size_t window);

/// Per-replica digest of a chain, so replica sweeps do not keep whole
/// trajectories alive.
struct ChainSummary {
    std::vector<std::size_t> checkpoints;
    std::vector<double> residuals;
    std::map<int, double> tails;
};

/// Replica r runs on stream r. Results do not depend on `threads`.
std::vector<ChainSummary> chain_replicas(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t n,
                                         std::uint64_t seed, std::size_t replicas, std::span<const int> moments,
                                         std::size_t window, unsigned threads = 1);

/// Average of the sampled states at steps 1..k over `replicas` chains
/// (replica r on stream r); approximates Phi^j(rho0) at step j.
std::vector<CMatrix> replica_average_states(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t k,
                                            std::uint64_t seed, std::size_t replicas, unsigned threads = 1);

struct IsometryResult {
    bool holds = false;
    std::vector<double> lambdas;
    std::vector<double> residuals;
    std::optional<std::size_t> violating;  ///< first index with residual > 1e-8
};

/// Tests p a_i^dagger a_i p = lambda_i p with lambda_i = tr(p a_i^dagger a_i p) / rank(p).
/// Throws NotAProjection unless p is a projection of rank >= 2.
IsometryResult isometry_condition(std::span<const CMatrix> kraus, const CMatrix& p);

struct SpectrumReport {
    std::vector<Complex> eigenvalues;  ///< descending modulus
    double gap = 0.0;                  ///< 1 - second modulus
    std::optional<DensityMatrix> fixed_point;
    double fixed_point_residual = 0.0;
    std::size_t peripheral_count = 0;  ///< #{|lambda| >= 1 - 1e-9}
};

SpectrumReport channel_spectrum(std::span<const CMatrix> kraus);
SpectrumReport channel_spectrum(const KrausInstrument& inst);

/// Least-squares fit of log d = intercept - rate * n over the points with
/// d > 1e-12.
struct RateFit {
    double rate = 0.0;
    double intercept = 0.0;
    std::vector<std::size_t> used;      ///< positions of the fitted points
    std::vector<double> residuals;      ///< log d - fitted value, per used point
};

/// Throws AlreadyConverged when every d is at or below 1e-12 and
/// InvalidArgument when fewer than two points remain.
RateFit fit_exponential_rate(std::span<const double> ns, std::span<const double> ds);

struct ConvergenceFit {
    std::vector<std::size_t> ns;
    std::vector<double> distances;  ///< ||Phi^n(rho0) - rho_*||_1
    RateFit fit;
    double predicted_rate = 0.0;  ///< -ln |lambda_2|
    DensityMatrix fixed_point;
};

/// Iterates the channel deterministically for n = 1..n_hi and fits over
/// [n_lo, n_hi]. Throws NoSpectralGap unless the spectrum has a single
/// peripheral eigenvalue, AlreadyConverged when rho0 sits at the fixed
/// point.
ConvergenceFit convergence_fit(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t n_lo,
                               std::size_t n_hi);

struct IidDriving {
    std::vector<double> weights;
};
/// Finite-state Markov driving; state i selects channel i.
struct MarkovDriving {
    std::vector<std::vector<double>> transition;
    std::vector<double> initial;
};
using Driving = std::variant<IidDriving, MarkovDriving>;

/// Throws DegenerateDriving for malformed weights, non-stochastic or
/// reducible kernels, and size mismatches with the channel list.
void validate_driving(const Driving& driving, std::size_t channel_count);

struct ContractionResult {
    std::vector<std::size_t> sequence;  ///< channel index per step
    std::vector<double> distances;      ///< ||F_k(rho) - F_k(sigma)||_1, k = 1..n
    std::optional<RateFit> fit;         ///< absent when fewer than two points exceed 1e-12
    std::size_t certified_window = 0;
};

/// Samples one channel sequence (counter i of CounterRng(seed, 0) drives
/// step i), certifies strict positivity on a prefix window of length at
/// most `max_window`, then tracks the pair distance. Throws
/// PositivityCertificateFailed, DegenerateDriving.
ContractionResult random_sequence_contraction(std::span<const KrausInstrument> channels, const Driving& driving,
                                              const DensityMatrix& rho, const DensityMatrix& sigma, std::size_t n,
                                              std::uint64_t seed, std::size_t max_window = 32);

/// Smallest eigenvalue of the map applied to each element of a fixed
/// basis of positive matrices (|i><i|, |i+j><i+j|, |i+ij><i+ij|).
double positivity_margin(const SuperopMatrix& map);

struct WitnessResult {
    bool witnessed = false;
    double min_step_distance = 0.0;
    std::vector<double> step_distances;  ///< ||rho_{k+1} - rho_k||_1, k = 0..n-1
};

/// Deterministic orbit rho_k = u^k rho0 u^-k. Throws InvalidArgument for a
/// non-unitary u and CommutingInput when the orbit is constant.
WitnessResult nonconvergence_witness(const CMatrix& u, const DensityMatrix& rho0, std::size_t n, double threshold);

}  // namespace qbayes
