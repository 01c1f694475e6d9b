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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../unit/test_support.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "qbayes/asymptotics.hpp"
#include "qbayes/decision.hpp"
#include "qbayes/errors.hpp"
#include "qbayes/format.hpp"
#include "qbayes/inference.hpp"
#include "qbayes/posterior.hpp"

namespace {

using namespace qbayes;
using qbayes::testing::Gen;
namespace fs = std::filesystem;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

// 1. Disintegration identity.
void disintegration(Outcome& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Gen g(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Index d = g.integer(1, 4);
        const auto inst = g.instrument(d, g.integer(1, 4), g.integer(1, 6), 3);
        const auto rho = DensityMatrix::make(g.density(d));
        const auto family = posterior_family(inst, rho);
        const double r = disintegration_residual(family, g.event(inst.size()), g.hermitian(inst.dim_out()));
        worst = std::max(worst, r);
    }
    const double elapsed = seconds_since(t0);
    out.require(worst <= 1e-9, "residual " + fmt(worst));
    out.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
    out.detail << "1000 tuples, max residual " << fmt(worst) << ", " << elapsed << " s";
}

// 2. Normalization of induced observables and outcome distributions.
void normalization(Outcome& out) {
    Gen g(1002);
    double worst_povm = 0.0;
    double worst_dist = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const Index d = g.integer(1, 4);
        const auto inst = g.instrument(d, g.integer(1, 4), g.integer(1, 6), 3);
        const Povm obs = induced_observable(inst);
        worst_povm = std::max(worst_povm, completeness_residual(obs.effects()));
        const auto dist = outcome_distribution(inst, DensityMatrix::make(g.density(d)));
        double total = 0.0;
        for (double p : dist.probs) total += p;
        worst_dist = std::max(worst_dist, std::abs(total - 1.0));
    }
    out.require(worst_povm <= 1e-9, "completeness " + fmt(worst_povm));
    out.require(worst_dist <= 1e-9, "distribution sum " + fmt(worst_dist));
    out.detail << "500 instruments, max |sum E - I| " << fmt(worst_povm) << ", max |sum p - 1| " << fmt(worst_dist);
}

// 3. Stepwise against composite posterior and probabilities.
void composition(Outcome& out) {
    Gen g(1003);
    double worst_state = 0.0;
    double worst_prob = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Index d1 = g.integer(1, 3);
        const Index d2 = g.integer(1, 3);
        const Index d3 = g.integer(1, 3);
        const auto i1 = g.instrument(d1, d2, g.integer(1, 4), 2);
        const auto i2 = g.instrument(d2, d3, g.integer(1, 4), 2);
        const std::vector<KrausInstrument> seq{i1, i2};
        const auto comp = compose(seq);
        const auto rho = DensityMatrix::make(g.density(d1));
        const auto p1 = outcome_distribution(i1, rho);
        const auto pc = outcome_distribution(comp, rho);
        std::vector<double> chained(comp.size(), 0.0);
        for (std::size_t x = 0; x < i1.size(); ++x) {
            if (p1.probs[x] <= kProbFloor) continue;
            const auto mid = posterior_state(i1, rho, x);
            const auto p2 = outcome_distribution(i2, mid);
            for (std::size_t y = 0; y < i2.size(); ++y) {
                const std::size_t joint = x * i2.size() + y;
                chained[joint] = p1.probs[x] * p2.probs[y];
                worst_prob = std::max(worst_prob, std::abs(chained[joint] - pc.probs[joint]));
                if (p2.probs[y] <= kProbFloor) continue;
                const auto step = posterior_state(i2, mid, y);
                const auto direct = posterior_state(comp, rho, joint);
                worst_state = std::max(worst_state, 0.5 * trace_norm(step.matrix() - direct.matrix()));
            }
        }
        const Event ev = g.event(comp.size());
        double sc = 0.0;
        double sp = 0.0;
        for (std::size_t j : ev) {
            sc += chained[j];
            sp += pc.probs[j];
        }
        worst_prob = std::max(worst_prob, std::abs(sc - sp));
    }
    out.require(worst_state <= 1e-9, "trace distance " + fmt(worst_state));
    out.require(worst_prob <= 1e-10, "probability " + fmt(worst_prob));
    out.detail << "200 pairs, max trace distance " << fmt(worst_state) << ", max probability gap " << fmt(worst_prob);
}

// 4. Classical recovery on diagonal models.
void classical_recovery(Outcome& out) {
    CMatrix k1 = CMatrix::Zero(2, 2);
    k1(0, 0) = std::sqrt(0.4);
    k1(1, 1) = std::sqrt(0.8);
    CMatrix k0 = CMatrix::Zero(2, 2);
    k0(0, 0) = std::sqrt(0.6);
    k0(1, 1) = std::sqrt(0.2);
    const auto inst = KrausInstrument::make(OutcomeSpace({"0", "1"}), {{k0}, {k1}});
    const auto post = posterior_state(inst, DensityMatrix::maximally_mixed(2), 1);
    const std::vector<double> prior{0.5, 0.5};
    const auto oracle = classical_bayes_oracle(prior, {{0.6, 0.4}, {0.2, 0.8}}, 1);
    double two_point = 0.0;
    for (int t = 0; t < 2; ++t)
        two_point = std::max(two_point, std::abs(post.matrix()(t, t).real() - oracle[static_cast<std::size_t>(t)]));
    two_point = std::max(two_point, std::abs(oracle[0] - 1.0 / 3.0));
    two_point = std::max(two_point, std::abs(oracle[1] - 2.0 / 3.0));
    out.require(two_point <= 1e-12, "two-point model " + fmt(two_point));

    Gen g(1004);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = g.integer(2, 6);
        const int nx = g.integer(2, 5);
        std::vector<std::vector<double>> lik(static_cast<std::size_t>(m));
        for (auto& row : lik) {
            double s = 0.0;
            for (int x = 0; x < nx; ++x) {
                row.push_back(g.uniform(0.05, 1.0));
                s += row.back();
            }
            for (double& v : row) v /= s;
        }
        std::vector<double> pri;
        double s = 0.0;
        for (int t = 0; t < m; ++t) {
            pri.push_back(g.uniform(0.05, 1.0));
            s += pri.back();
        }
        for (double& v : pri) v /= s;
        std::vector<KrausList> kraus;
        std::vector<std::string> labels;
        for (int x = 0; x < nx; ++x) {
            CMatrix k = CMatrix::Zero(m, m);
            for (int t = 0; t < m; ++t) k(t, t) = std::sqrt(lik[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)]);
            kraus.push_back({k});
            labels.push_back(std::to_string(x));
        }
        const auto model_inst = KrausInstrument::make(OutcomeSpace(labels), kraus);
        CMatrix p = CMatrix::Zero(m, m);
        for (int t = 0; t < m; ++t) p(t, t) = pri[static_cast<std::size_t>(t)];
        const auto x = static_cast<std::size_t>(g.integer(0, nx - 1));
        const auto q = posterior_state(model_inst, DensityMatrix::make(p), x);
        const auto o = classical_bayes_oracle(pri, lik, x);
        for (int t = 0; t < m; ++t)
            worst = std::max(worst, std::abs(q.matrix()(t, t).real() - o[static_cast<std::size_t>(t)]));
    }
    out.require(worst <= 1e-10, "random diagonal models " + fmt(worst));
    out.detail << "two-point gap " << fmt(two_point) << ", 100 random models max gap " << fmt(worst);
}

// 5. Dilation.
void dilation(Outcome& out) {
    Gen g(1005);
    double worst_iso = 0.0;
    double worst_dual = 0.0;
    bool equivalent = true;
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = g.integer(1, 3);
        const auto inst = g.instrument(d, d, g.integer(1, 4), 2);
        const CMatrix v = dilation_isometry(inst);
        worst_iso = std::max(worst_iso, max_abs(v.adjoint() * v - identity(d)));
        const auto im = dilate(inst);
        for (std::size_t x = 0; x < inst.size(); ++x)
            for (Index k = 0; k < d; ++k)
                for (Index l = 0; l < d; ++l) {
                    const CMatrix e = qbayes::testing::ket_bra(d, k, l);
                    worst_dual = std::max(worst_dual, max_abs(reconstruct_dual(im, {x}, e) - dual_outcome(inst, x, e)));
                }
        equivalent = equivalent && statistically_equivalent(im, im);
    }
    out.require(worst_iso <= 1e-10, "isometry " + fmt(worst_iso));
    out.require(worst_dual <= 1e-8, "dual action " + fmt(worst_dual));
    out.require(equivalent, "self-equivalence");
    out.detail << "100 instruments, max |V*V - I| " << fmt(worst_iso) << ", max dual gap " << fmt(worst_dual);
}

// 6. Estimator optimality against a 2001-point action grid.
void estimator_optimality(Outcome& out) {
    Gen g(1006);
    double margin_mean = std::numeric_limits<double>::infinity();
    double margin_quantile = margin_mean;
    double margin_mode = margin_mean;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = g.integer(2, 64);
        std::vector<double> grid;
        double x = g.uniform(-1.0, 1.0);
        for (int i = 0; i < n; ++i) {
            grid.push_back(x);
            x += g.uniform(0.01, 0.2);
        }
        std::vector<double> mass;
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            mass.push_back(g.uniform() < 0.2 ? 0.0 : g.uniform(0.0, 1.0));
            s += mass.back();
        }
        if (s == 0.0) mass[0] = s = 1.0;
        for (double& m : mass) m /= s;
        const auto dist = PosteriorDist::from_mass(grid, mass);

        std::vector<double> c;
        for (int i = 0; i < n; ++i) c.push_back(g.uniform(0.1, 2.0));
        const double k0 = g.uniform(0.1, 3.0);
        const double k1 = g.uniform(0.1, 3.0);
        const LossSpec quad = WeightedQuadraticLoss{c};
        const LossSpec lin = LinearLoss{k0, k1};
        const LossSpec zo = ZeroOneLoss{};
        const double mean = point_estimate(dist, WeightedMean{c});
        const double quant = point_estimate(dist, Quantile::from_linear_loss(k0, k1));
        const double mode = point_estimate(dist, Mode{});
        const double r_mean = posterior_risk(dist, quad, mean);
        const double r_quant = posterior_risk(dist, lin, quant);
        const double r_mode = posterior_risk(dist, zo, mode);

        const double lo = grid.front();
        const double hi = grid.back();
        for (int a = 0; a <= 2000; ++a) {
            const double act = lo + (hi - lo) * a / 2000.0;
            margin_mean = std::min(margin_mean, posterior_risk(dist, quad, act) - r_mean);
            margin_quantile = std::min(margin_quantile, posterior_risk(dist, lin, act) - r_quant);
            margin_mode = std::min(margin_mode, posterior_risk(dist, zo, act) - r_mode);
        }
        // Grid points themselves are actions too; the mode must beat them.
        for (double t : grid) margin_mode = std::min(margin_mode, posterior_risk(dist, zo, t) - r_mode);
    }
    out.require(margin_mean >= -1e-9, "mean margin " + fmt(margin_mean));
    out.require(margin_quantile >= -1e-9, "quantile margin " + fmt(margin_quantile));
    out.require(margin_mode >= -1e-9, "mode margin " + fmt(margin_mode));
    out.detail << "100 posteriors, min margins mean " << fmt(margin_mean) << ", quantile " << fmt(margin_quantile)
               << ", mode " << fmt(margin_mode);
}

// 7. Toy decision problem.
void decision_toy(Outcome& out) {
    const Povm z = Povm::make(OutcomeSpace({"0", "1"}), {qbayes::testing::diag2(1, 0), qbayes::testing::diag2(0, 1)});
    const std::vector<DensityMatrix> states{DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)};
    const auto make_model = [&](double w0) {
        return ParamModel::make({0.0, 1.0}, z, DensityMatrix::make(qbayes::testing::diag2(w0, 1 - w0)), states,
                                std::vector<double>{w0, 1 - w0});
    };
    const std::vector<KrausInstrument> insts{qbayes::testing::noisy_readout(0.8)};
    const std::vector<Action> actions{0.0, 0.5, 1.0};
    const LossSpec loss = WeightedQuadraticLoss{};
    const auto rules = enumerate_rules(2, actions);
    out.require(rules.size() == 9, "rule count");

    // Unique Bayes solution under prior (0.7, 0.3), admissible by exhaustive search.
    const auto skewed = make_model(0.7);
    std::vector<double> bayes;
    for (const auto& r : rules) bayes.push_back(bayes_risk(skewed, insts, r, loss).bayes);
    const double best = *std::min_element(bayes.begin(), bayes.end());
    std::size_t winners = 0;
    std::size_t winner = 0;
    for (std::size_t r = 0; r < rules.size(); ++r)
        if (bayes[r] <= best + 1e-12) {
            ++winners;
            winner = r;
        }
    out.require(winners == 1, "Bayes solution not unique");
    const auto table = risk_table(skewed, insts, rules, loss);
    const auto verdict = admissibility_from_table(table[winner], table, DominanceOptions{});
    out.require(verdict.admissible, "Bayes solution dominated");
    const auto enumerated = bayes_solution_enumerate(skewed, insts, loss, actions);
    out.require(action_to_string(enumerated.actions[0]) == action_to_string(rules[winner].actions[0]) &&
                    action_to_string(enumerated.actions[1]) == action_to_string(rules[winner].actions[1]),
                "pointwise solution disagrees with enumeration");

    // Constant-risk Bayes solution under the uniform prior lies in the minimax set.
    const auto uniform = make_model(0.5);
    const auto eq = bayes_solution_enumerate(uniform, insts, loss, actions);
    const auto eq_risk = risk_table(uniform, insts, {eq}, loss).front();
    out.require(std::abs(eq_risk[0] - eq_risk[1]) <= 1e-12, "uniform-prior solution has non-constant risk");
    const auto mm = minimax_check(uniform, insts, loss, rules);
    std::optional<std::size_t> eq_index;
    for (std::size_t r = 0; r < rules.size(); ++r)
        if (action_to_string(rules[r].actions[0]) == action_to_string(eq.actions[0]) &&
            action_to_string(rules[r].actions[1]) == action_to_string(eq.actions[1]))
            eq_index = r;
    const bool in_set = eq_index && std::find(mm.minimax.begin(), mm.minimax.end(), *eq_index) != mm.minimax.end();
    out.require(in_set, "constant-risk Bayes solution outside the minimax set");
    out.detail << "Bayes rule (" << action_to_string(rules[winner].actions[0]) << ", "
               << action_to_string(rules[winner].actions[1]) << ") risk " << fmt(best) << " admissible; constant-risk rule ("
               << action_to_string(eq.actions[0]) << ", " << action_to_string(eq.actions[1]) << ") sup risk "
               << fmt(eq_risk[0]);
}

// 8. Spectral convergence for amplitude damping.
void spectral(Outcome& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ad = KrausInstrument::channel(qbayes::testing::amplitude_damping(0.75));
    const auto rep = channel_spectrum(ad);
    std::vector<Complex> expected{1.0, 0.5, 0.5, 0.25};
    std::vector<Complex> got = rep.eigenvalues;
    double worst = got.size() == 4 ? 0.0 : std::numeric_limits<double>::infinity();
    if (got.size() == 4) {
        auto key = [](Complex a, Complex b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); };
        std::sort(got.begin(), got.end(), key);
        std::sort(expected.begin(), expected.end(), key);
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(got[i] - expected[i]));
    }
    out.require(worst <= 1e-9, "eigenvalues " + fmt(worst));
    double fp = std::numeric_limits<double>::infinity();
    if (rep.fixed_point) fp = trace_norm(rep.fixed_point->matrix() - DensityMatrix::basis(2, 0).matrix());
    out.require(fp <= 1e-8, "fixed point " + fmt(fp));
    CVector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const auto fit = convergence_fit(ad, DensityMatrix::pure(plus), 5, 40);
    const double rel = std::abs(fit.fit.rate / std::numbers::ln2 - 1.0);
    out.require(rel <= 0.05, "rate " + fmt(fit.fit.rate));
    const double elapsed = seconds_since(t0);
    out.require(elapsed < 1.0, "runtime " + fmt(elapsed) + " s");
    out.detail << "eigenvalue gap " << fmt(worst) << ", fixed point gap " << fmt(fp) << ", fitted rate "
               << fmt(fit.fit.rate) << " (rel " << fmt(rel) << " vs ln 2), " << elapsed << " s";
}

DensityMatrix plus_state() {
    CVector v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return DensityMatrix::pure(v);
}

// 9. Ergodic averages.
void ergodic(Outcome& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto lz = qbayes::testing::luders_z();
    const auto proj = run_chain(lz, plus_state(), 1000, 9001);
    const auto proj_res = cesaro_fixed_point_residual(proj, lz);
    out.require(proj_res.back() <= 1e-6, "projective residual " + fmt(proj_res.back()));

    // A random two-outcome commuting (diagonal) measurement.
    Gen g(1009);
    const double a = g.uniform(0.1, 0.9);
    const double b = g.uniform(0.1, 0.9);
    const auto inst = KrausInstrument::make(
        OutcomeSpace({"0", "1"}), {{qbayes::testing::diag2(std::sqrt(a), std::sqrt(b))},
                                   {qbayes::testing::diag2(std::sqrt(1 - a), std::sqrt(1 - b))}});
    const std::vector<int> none;
    const auto reps = chain_replicas(inst, plus_state(), 10000, 9009, 100, none, 1);
    std::size_t ok = 0;
    double worst = 0.0;
    for (const auto& r : reps) {
        ok += r.residuals.back() <= 0.05;
        worst = std::max(worst, r.residuals.back());
    }
    out.require(ok >= 95, "commuting chain " + std::to_string(ok) + "/100");
    const double elapsed = seconds_since(t0);
    out.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
    out.detail << "projective residual at 1e3 " << fmt(proj_res.back()) << "; commuting chain (a=" << fmt(a)
               << ", b=" << fmt(b) << ") " << ok << "/100 replicas <= 0.05 at 1e4, worst " << fmt(worst) << ", "
               << elapsed << " s";
}

// 10. Purity moments.
void purity_moments(Outcome& out) {
    const auto lz = qbayes::testing::luders_z();
    const std::vector<int> m2{2};
    const auto proj = run_chain(lz, DensityMatrix::maximally_mixed(2), 1000, 10001, m2);
    bool exact = true;
    for (const auto& s : proj.trajectory.states) exact = exact && s.moment(2) == 1.0;
    for (double v : proj.moments.at(2)) exact = exact && v == 1.0;
    out.require(exact, "projective chain purity differs from 1");

    // Random measurement chains: one Kraus operator per outcome, fresh
    // instrument for every replica batch of ten.
    Gen g(1010);
    std::size_t ok = 0;
    double worst = 0.0;
    for (int batch = 0; batch < 10; ++batch) {
        const auto inst = g.instrument(2, 2, g.integer(2, 4), 1);
        const auto reps =
            chain_replicas(inst, plus_state(), 10000, 10010 + static_cast<std::uint64_t>(batch), 10, m2, 5);
        for (const auto& r : reps) {
            const double tail = r.tails.at(2);
            ok += tail <= 0.05;
            worst = std::max(worst, tail);
        }
    }
    out.require(ok >= 90, "random chains " + std::to_string(ok) + "/100");
    out.detail << "projective tr(f_n^2) = 1 at all 1000 steps; random chains " << ok
               << "/100 with m=2 tail <= 0.05 (engineering threshold), worst " << fmt(worst);
}

// 11. Non-convergence witness.
void witness(Outcome& out) {
    CMatrix u = CMatrix::Zero(2, 2);
    const double theta = std::numbers::pi * std::sqrt(2.0);
    u(0, 0) = 1.0;
    u(1, 1) = std::polar(1.0, theta);
    const auto w = nonconvergence_witness(u, plus_state(), 10000, 0.1);
    const double oracle = std::abs(std::polar(1.0, theta) - Complex(1.0, 0.0));
    double gap = 0.0;
    for (double d : w.step_distances) gap = std::max(gap, std::abs(d - oracle));
    out.require(w.witnessed && w.min_step_distance >= 0.1, "min step distance " + fmt(w.min_step_distance));
    out.require(w.step_distances.size() == 10000, "step count");
    out.require(gap <= 1e-9, "oracle gap " + fmt(gap));
    out.detail << "min step distance " << fmt(w.min_step_distance) << " over 1e4 steps, oracle " << fmt(oracle)
               << ", max gap " << fmt(gap);
}

// 12. Random-sequence contraction.
void contraction(Outcome& out) {
    const auto dep = KrausInstrument::channel(qbayes::testing::depolarizing(0.5));
    const auto gad = KrausInstrument::channel(qbayes::testing::generalized_amplitude_damping(0.5, 0.3));
    const auto zero = DensityMatrix::basis(2, 0);
    const auto one = DensityMatrix::basis(2, 1);

    const std::vector<KrausInstrument> pair{dep, gad};
    const auto mix = random_sequence_contraction(pair, IidDriving{{0.5, 0.5}}, zero, one, 40, 12001);
    const double mix_rate = mix.fit ? mix.fit->rate : 0.0;
    out.require(mix.fit && mix_rate > 0.0, "mixture rate " + fmt(mix_rate));

    const std::vector<KrausInstrument> single{dep};
    const auto solo = random_sequence_contraction(single, IidDriving{{1.0}}, zero, one, 40, 12002);
    const auto rep = channel_spectrum(dep);
    const double spectral_rate = -std::log(std::abs(rep.eigenvalues[1]));
    const double solo_rate = solo.fit ? solo.fit->rate : 0.0;
    const double rel = std::abs(solo_rate / spectral_rate - 1.0);
    out.require(rel <= 0.10, "single-channel rate " + fmt(solo_rate) + " vs " + fmt(spectral_rate));
    out.detail << "iid mixture rate " << fmt(mix_rate) << " (certified window " << mix.certified_window
               << "); depolarizing rate " << fmt(solo_rate) << " vs spectral " << fmt(spectral_rate) << " (rel "
               << fmt(rel) << ")";
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

// 13. Determinism and golden files.
void determinism(Outcome& out) {
    const fs::path fixtures(QBAYES_FIXTURE_DIR);
    const fs::path golden(QBAYES_GOLDEN_DIR);
    const fs::path scratch = fs::temp_directory_path() / ("qbayes_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    const auto manifest = cli::json::parse(slurp(fixtures / "manifest.json"));
    std::size_t files = 0;
    std::size_t fixtures_run = 0;
    for (const auto& [name, commands] : manifest.items()) {
        const auto cfg = cli::load_config((fixtures / (name + ".json")).string());
        for (const char* pass : {"a", "b"}) {
            cli::RunOptions opts;
            opts.out_dir = (scratch / pass / name).string();
            for (const auto& c : commands) cli::run_command(cfg, c.get<std::string>(), opts);
            cli::write_report(opts.out_dir);
        }
        ++fixtures_run;
        for (const auto& e : fs::directory_iterator(scratch / "a" / name)) {
            const auto file = e.path().filename();
            const std::string a = slurp(e.path());
            out.require(a == slurp(scratch / "b" / name / file), "rerun differs: " + name + "/" + file.string());
            out.require(fs::exists(golden / name / file) && a == slurp(golden / name / file),
                        "golden differs: " + name + "/" + file.string());
            ++files;
        }
        std::size_t golden_count = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(golden / name)) ++golden_count;
        out.require(golden_count == static_cast<std::size_t>(std::distance(
                                        fs::directory_iterator(scratch / "a" / name), fs::directory_iterator{})),
                    "golden file set differs for " + name);
    }
    fs::remove_all(scratch);
    out.require(fixtures_run == 6, "expected 6 fixture configs, found " + std::to_string(fixtures_run));
    out.detail << fixtures_run << " fixtures, " << files << " artifacts byte-identical on rerun and against golden";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"disintegration identity", disintegration},
        {"POVM/instrument normalization", normalization},
        {"composition consistency", composition},
        {"classical recovery", classical_recovery},
        {"dilation", dilation},
        {"estimator optimality", estimator_optimality},
        {"decision theory toy problem", decision_toy},
        {"spectral convergence", spectral},
        {"ergodic average", ergodic},
        {"purity moments", purity_moments},
        {"non-convergence witness", witness},
        {"random-sequence contraction", contraction},
        {"determinism and golden files", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
                  << "): " << o.detail.str() << std::endl;
        failed += !o.pass;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
