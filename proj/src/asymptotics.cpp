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

#include "qbayes/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qbayes/errors.hpp"
#include "qbayes/parallel.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

namespace {

constexpr double kDistanceFloor = 1e-12;
constexpr double kPeripheralTol = 1e-9;

void require_square(const KrausInstrument& inst, const char* what) {
    if (inst.dim_in() != inst.dim_out())
        fail(ErrorCode::DimensionMismatch, std::string(what) + ": instrument must map a system to itself");
}

DensityMatrix average_state(const CMatrix& sum, std::size_t count) {
    return DensityMatrix::make(hermitize(sum / static_cast<double>(count)));
}

double clean(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }

}  // namespace

std::vector<std::size_t> chain_checkpoints(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t c = 1; c <= n; c *= 2) {
        out.push_back(c);
        if (c > n / 2) break;
    }
    if (!out.empty() && out.back() != n) out.push_back(n);
    return out;
}

ChainRun run_chain(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t n, std::uint64_t seed,
                   std::span<const int> moments, std::uint64_t stream) {
    require_square(inst, "run_chain");
    if (n < 1) fail(ErrorCode::InvalidArgument, "run_chain: n must be >= 1");
    for (int m : moments)
        if (m < 1) fail(ErrorCode::InvalidArgument, "run_chain: moment orders must be >= 1");

    ChainRun run;
    run.checkpoints = chain_checkpoints(n);
    for (int m : moments) run.moments[m];
    run.trajectory.seed = seed;
    const CounterRng rng(seed, stream);
    CMatrix sum = CMatrix::Zero(inst.dim_in(), inst.dim_in());
    DensityMatrix current = rho0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Step s = sample_step(inst, current, rng.uniform(i));
        run.trajectory.outcomes.push_back(inst.space().label(s.index));
        run.trajectory.indices.push_back(s.index);
        run.trajectory.probs.push_back(s.prob);
        run.trajectory.logprob += std::log(s.prob);
        sum += s.state.matrix();
        current = s.state;
        run.trajectory.states.push_back(std::move(s.state));
        if (i + 1 == run.checkpoints[next]) {
            run.cesaro.push_back(average_state(sum, i + 1));
            for (auto& [m, seq] : run.moments) seq.push_back(current.moment(m));
            ++next;
        }
    }
    return run;
}

std::vector<double> cesaro_fixed_point_residual(const ChainRun& run, const KrausInstrument& inst) {
    std::vector<double> out;
    out.reserve(run.cesaro.size());
    for (const auto& avg : run.cesaro) out.push_back(trace_norm(apply_channel(inst, avg.matrix()) - avg.matrix()));
    return out;
}

double purity_moment_tail(const ChainRun& run, int m, std::size_t window) {
    const auto it = run.moments.find(m);
    if (it == run.moments.end())
        fail(ErrorCode::InvalidArgument, "purity_moment_tail: moment " + std::to_string(m) + " was not recorded");
    const auto& seq = it->second;
    if (window < 1 || window > seq.size())
        fail(ErrorCode::InvalidArgument, "purity_moment_tail: window exceeds the recorded checkpoints");
    const auto first = seq.end() - static_cast<std::ptrdiff_t>(window);
    const auto [lo, hi] = std::minmax_element(first, seq.end());
    return *hi - *lo;
}

std::vector<ChainSummary> chain_replicas(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t n,
                                         std::uint64_t seed, std::size_t replicas, std::span<const int> moments,
                                         std::size_t window, unsigned threads) {
    std::vector<ChainSummary> out(replicas);
    parallel_for(replicas, threads, [&](std::size_t r) {
        const ChainRun run = run_chain(inst, rho0, n, seed, moments, r);
        ChainSummary& s = out[r];
        s.checkpoints = run.checkpoints;
        s.residuals = cesaro_fixed_point_residual(run, inst);
        for (int m : moments) s.tails[m] = purity_moment_tail(run, m, std::min(window, run.checkpoints.size()));
    });
    return out;
}

std::vector<CMatrix> replica_average_states(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t k,
                                            std::uint64_t seed, std::size_t replicas, unsigned threads) {
    require_square(inst, "replica_average_states");
    if (k < 1 || replicas < 1) fail(ErrorCode::InvalidArgument, "replica_average_states: k and replicas must be >= 1");
    std::vector<std::vector<CMatrix>> per(replicas);
    parallel_for(replicas, threads, [&](std::size_t r) {
        const CounterRng rng(seed, r);
        DensityMatrix current = rho0;
        per[r].reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            current = sample_step(inst, current, rng.uniform(i)).state;
            per[r].push_back(current.matrix());
        }
    });
    std::vector<CMatrix> avg(k, CMatrix::Zero(rho0.dim(), rho0.dim()));
    for (const auto& states : per)
        for (std::size_t i = 0; i < k; ++i) avg[i] += states[i];
    for (auto& a : avg) a /= static_cast<double>(replicas);
    return avg;
}

IsometryResult isometry_condition(std::span<const CMatrix> kraus, const CMatrix& p) {
    check_matrix(p);
    if (p.rows() != p.cols()) fail(ErrorCode::NotAProjection, "projection must be square");
    if (hermiticity_residual(p) > kHermTol || max_abs(p * p - p) > kHermTol)
        fail(ErrorCode::NotAProjection, "p is not an orthogonal projection within 1e-10");
    const double trace = p.trace().real();
    const auto rank = static_cast<long>(std::lround(trace));
    if (rank < 2) fail(ErrorCode::NotAProjection, "projection rank must be at least 2");

    IsometryResult res;
    res.holds = true;
    for (std::size_t i = 0; i < kraus.size(); ++i) {
        const CMatrix& a = kraus[i];
        if (a.cols() != p.rows()) fail(ErrorCode::DimensionMismatch, "Kraus operator does not act on the projection's space");
        const CMatrix restricted = p * a.adjoint() * a * p;
        const double lambda = restricted.trace().real() / static_cast<double>(rank);
        const double r = max_abs(restricted - lambda * p);
        res.lambdas.push_back(lambda);
        res.residuals.push_back(r);
        if (r > 1e-8 && res.holds) {
            res.holds = false;
            res.violating = i;
        }
    }
    return res;
}

SpectrumReport channel_spectrum(std::span<const CMatrix> kraus) {
    if (kraus.empty()) fail(ErrorCode::InvalidArgument, "channel_spectrum: empty Kraus list");
    const SuperopMatrix sup = superop_matrix(kraus);
    if (sup.dim_in != sup.dim_out) fail(ErrorCode::DimensionMismatch, "channel_spectrum: channel must be square");
    const Index d = sup.dim_in;

    Eigen::ComplexEigenSolver<CMatrix> solver(sup.entries, false);
    SpectrumReport rep;
    for (const Complex& l : solver.eigenvalues()) rep.eigenvalues.emplace_back(clean(l.real()), clean(l.imag()));
    std::stable_sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](const Complex& a, const Complex& b) {
        const double ma = std::abs(a);
        const double mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    rep.gap = rep.eigenvalues.size() > 1 ? 1.0 - std::abs(rep.eigenvalues[1]) : 1.0;
    for (const Complex& l : rep.eigenvalues)
        if (std::abs(l) >= 1.0 - kPeripheralTol) ++rep.peripheral_count;

    if (rep.peripheral_count == 1 && std::abs(rep.eigenvalues[0] - Complex(1.0, 0.0)) <= kPeripheralTol) {
        // Null vector of M - I from the smallest singular direction.
        const CMatrix shifted = sup.entries - CMatrix::Identity(d * d, d * d);
        Eigen::JacobiSVD<CMatrix> svd(shifted, Eigen::ComputeFullV);
        const CVector v = svd.matrixV().col(d * d - 1);
        CMatrix m = unvec(v, d, d);
        const Complex tr = m.trace();
        if (std::abs(tr) > 1e-12) {
            m = hermitize(m / tr);
            rep.fixed_point_residual = trace_norm(sup.apply(m) - m);
            if (rep.fixed_point_residual <= 1e-8 && is_psd(m)) rep.fixed_point = DensityMatrix::make(m);
        }
    }
    return rep;
}

SpectrumReport channel_spectrum(const KrausInstrument& inst) {
    require_square(inst, "channel_spectrum");
    const KrausList flat = inst.flat_kraus();
    return channel_spectrum(std::span<const CMatrix>(flat));
}

RateFit fit_exponential_rate(std::span<const double> ns, std::span<const double> ds) {
    if (ns.size() != ds.size()) fail(ErrorCode::DimensionMismatch, "fit_exponential_rate: length mismatch");
    RateFit fit;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds[i] > kDistanceFloor) fit.used.push_back(i);
    if (fit.used.empty()) fail(ErrorCode::AlreadyConverged, "every distance is at or below 1e-12");
    if (fit.used.size() < 2) fail(ErrorCode::InvalidArgument, "fewer than two distances above 1e-12 to fit");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i : fit.used) {
        mx += ns[i];
        my += std::log(ds[i]);
    }
    const auto k = static_cast<double>(fit.used.size());
    mx /= k;
    my /= k;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i : fit.used) {
        sxx += (ns[i] - mx) * (ns[i] - mx);
        sxy += (ns[i] - mx) * (std::log(ds[i]) - my);
    }
    if (!(sxx > 0.0)) fail(ErrorCode::InvalidArgument, "fit_exponential_rate: abscissae must not all coincide");
    const double slope = sxy / sxx;
    fit.rate = -slope;
    fit.intercept = my - slope * mx;
    for (std::size_t i : fit.used) fit.residuals.push_back(std::log(ds[i]) - (fit.intercept + slope * ns[i]));
    return fit;
}

ConvergenceFit convergence_fit(const KrausInstrument& inst, const DensityMatrix& rho0, std::size_t n_lo,
                               std::size_t n_hi) {
    require_square(inst, "convergence_fit");
    if (rho0.dim() != inst.dim_in()) fail(ErrorCode::DimensionMismatch, "convergence_fit: state dimension mismatch");
    if (n_lo < 1 || n_hi < n_lo) fail(ErrorCode::InvalidArgument, "convergence_fit: need 1 <= n_lo <= n_hi");
    const SpectrumReport spec = channel_spectrum(inst);
    if (spec.peripheral_count != 1 || !spec.fixed_point)
        fail(ErrorCode::NoSpectralGap, "channel has " + std::to_string(spec.peripheral_count) +
                                           " peripheral eigenvalues; a single simple eigenvalue 1 is required");
    const CMatrix& star = spec.fixed_point->matrix();
    const KrausList flat = inst.flat_kraus();

    ConvergenceFit out{{}, {}, {}, 0.0, *spec.fixed_point};
    out.predicted_rate = spec.eigenvalues.size() > 1 && std::abs(spec.eigenvalues[1]) > 0.0
                             ? -std::log(std::abs(spec.eigenvalues[1]))
                             : std::numeric_limits<double>::infinity();
    CMatrix rho = rho0.matrix();
    std::vector<double> xs;
    for (std::size_t n = 1; n <= n_hi; ++n) {
        rho = apply_kraus(flat, rho);
        if (n < n_lo) continue;
        out.ns.push_back(n);
        xs.push_back(static_cast<double>(n));
        out.distances.push_back(trace_norm(rho - star));
    }
    out.fit = fit_exponential_rate(xs, out.distances);
    return out;
}

void validate_driving(const Driving& driving, std::size_t channel_count) {
    const auto check_dist = [&](const std::vector<double>& w, const std::string& what) {
        if (w.size() != channel_count)
            fail(ErrorCode::DegenerateDriving, what + " has " + std::to_string(w.size()) + " entries for " +
                                                   std::to_string(channel_count) + " channels");
        double s = 0.0;
        for (double x : w) {
            if (!std::isfinite(x) || x < 0.0) fail(ErrorCode::DegenerateDriving, what + " has a negative or non-finite entry");
            s += x;
        }
        if (std::abs(s - 1.0) > kNormTol) fail(ErrorCode::DegenerateDriving, what + " does not sum to 1");
    };
    if (channel_count == 0) fail(ErrorCode::DegenerateDriving, "no channels to drive");
    if (const auto* iid = std::get_if<IidDriving>(&driving)) {
        check_dist(iid->weights, "i.i.d. weight vector");
        return;
    }
    const auto& mk = std::get<MarkovDriving>(driving);
    if (mk.transition.size() != channel_count)
        fail(ErrorCode::DegenerateDriving, "transition matrix needs one row per channel");
    for (std::size_t i = 0; i < channel_count; ++i) check_dist(mk.transition[i], "transition row " + std::to_string(i));
    check_dist(mk.initial, "initial distribution");
    // Irreducible: every state reaches every other along positive entries.
    for (std::size_t s = 0; s < channel_count; ++s) {
        std::vector<bool> seen(channel_count, false);
        std::vector<std::size_t> stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < channel_count; ++j) {
                if (!seen[j] && mk.transition[i][j] > 0.0) {
                    seen[j] = true;
                    stack.push_back(j);
                }
            }
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            fail(ErrorCode::DegenerateDriving, "Markov driving is reducible from state " + std::to_string(s));
    }
}

double positivity_margin(const SuperopMatrix& map) {
    const Index d = map.dim_in;
    double margin = std::numeric_limits<double>::infinity();
    const auto probe = [&](const CVector& psi) {
        const CMatrix out = map.apply(psi * psi.adjoint());
        margin = std::min(margin, eig_hermitian(hermitize(out), 1e-8).values(0));
    };
    for (Index i = 0; i < d; ++i) {
        probe(CVector::Unit(d, i));
        for (Index j = i + 1; j < d; ++j) {
            CVector a = CVector::Unit(d, i) + CVector::Unit(d, j);
            CVector b = CVector::Unit(d, i) + Complex(0.0, 1.0) * CVector::Unit(d, j);
            probe(a / std::sqrt(2.0));
            probe(b / std::sqrt(2.0));
        }
    }
    return margin;
}

namespace {

std::size_t draw_index(const std::vector<double>& weights, double u) {
    double cum = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0)) continue;
        last = i;
        cum += weights[i];
        if (u < cum) return i;
    }
    return last;
}

}  // namespace

ContractionResult random_sequence_contraction(std::span<const KrausInstrument> channels, const Driving& driving,
                                              const DensityMatrix& rho, const DensityMatrix& sigma, std::size_t n,
                                              std::uint64_t seed, std::size_t max_window) {
    validate_driving(driving, channels.size());
    const Index d = channels.front().dim_in();
    for (const auto& c : channels) {
        require_square(c, "random_sequence_contraction");
        if (c.dim_in() != d) fail(ErrorCode::DimensionMismatch, "random_sequence_contraction: channels differ in dimension");
    }
    if (rho.dim() != d || sigma.dim() != d)
        fail(ErrorCode::DimensionMismatch, "random_sequence_contraction: state dimension mismatch");
    if (n < 1 || max_window < 1) fail(ErrorCode::InvalidArgument, "random_sequence_contraction: n and window must be >= 1");

    ContractionResult res;
    const CounterRng rng(seed, 0);
    const std::size_t len = std::max(n, max_window);
    res.sequence.reserve(len);
    if (const auto* iid = std::get_if<IidDriving>(&driving)) {
        for (std::size_t i = 0; i < len; ++i) res.sequence.push_back(draw_index(iid->weights, rng.uniform(i)));
    } else {
        const auto& mk = std::get<MarkovDriving>(driving);
        std::size_t state = draw_index(mk.initial, rng.uniform(0));
        res.sequence.push_back(state);
        for (std::size_t i = 1; i < len; ++i) {
            state = draw_index(mk.transition[state], rng.uniform(i));
            res.sequence.push_back(state);
        }
    }

    std::vector<SuperopMatrix> sups;
    for (const auto& c : channels) {
        const KrausList flat = c.flat_kraus();
        sups.push_back(superop_matrix(flat));
    }
    SuperopMatrix window{d, d, CMatrix::Identity(d * d, d * d)};
    for (std::size_t w = 0; w < max_window && res.certified_window == 0; ++w) {
        window.entries = sups[res.sequence[w]].entries * window.entries;
        if (positivity_margin(window) > 1e-10) res.certified_window = w + 1;
    }
    if (res.certified_window == 0)
        fail(ErrorCode::PositivityCertificateFailed,
             "no prefix window of length <= " + std::to_string(max_window) + " is strictly positive");

    res.sequence.resize(n);
    CMatrix a = rho.matrix();
    CMatrix b = sigma.matrix();
    std::vector<double> xs;
    for (std::size_t k = 0; k < n; ++k) {
        a = sups[res.sequence[k]].apply(a);
        b = sups[res.sequence[k]].apply(b);
        res.distances.push_back(trace_norm(a - b));
        xs.push_back(static_cast<double>(k + 1));
    }
    std::size_t above = 0;
    for (double x : res.distances)
        if (x > kDistanceFloor) ++above;
    if (above >= 2) res.fit = fit_exponential_rate(xs, res.distances);
    return res;
}

WitnessResult nonconvergence_witness(const CMatrix& u, const DensityMatrix& rho0, std::size_t n, double threshold) {
    check_matrix(u);
    if (u.rows() != u.cols() || u.rows() != rho0.dim())
        fail(ErrorCode::DimensionMismatch, "nonconvergence_witness: u must be square and match the state");
    if (max_abs(u.adjoint() * u - identity(u.rows())) > 1e-10)
        fail(ErrorCode::InvalidArgument, "nonconvergence_witness: u is not unitary within 1e-10");
    if (n < 1) fail(ErrorCode::InvalidArgument, "nonconvergence_witness: n must be >= 1");
    CMatrix rho = rho0.matrix();
    if (trace_norm(u * rho * u.adjoint() - rho) <= 1e-10)
        fail(ErrorCode::CommutingInput, "rho0 commutes with u; the orbit is constant");

    WitnessResult res;
    res.step_distances.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        CMatrix next = u * rho * u.adjoint();
        res.step_distances.push_back(trace_norm(next - rho));
        rho = std::move(next);
    }
    res.min_step_distance = *std::min_element(res.step_distances.begin(), res.step_distances.end());
    res.witnessed = res.min_step_distance >= threshold;
    return res;
}

}  // namespace qbayes
