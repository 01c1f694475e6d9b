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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "qbayes/asymptotics.hpp"
#include "qbayes/decision.hpp"
#include "qbayes/errors.hpp"
#include "qbayes/format.hpp"
#include "qbayes/posterior.hpp"

namespace qbayes::cli {

namespace {

namespace fs = std::filesystem;

struct Output {
    std::string csv;
    json result = json::object();
    /// Scalar metrics lifted into the merged report.
    json headline = json::object();
    std::vector<std::pair<std::string, std::string>> extra;  ///< file name, contents
};

class Params {
public:
    Params(const Config& cfg, const Registry& reg, const RunOptions& opts, std::string command)
        : run_(cfg.run), reg_(reg), opts_(opts), command_(std::move(command)) {}

    const Registry& reg() const { return reg_; }
    const RunOptions& opts() const { return opts_; }
    const json& run() const { return run_; }
    bool has(const char* key) const { return run_.contains(key); }

    const json& need(const char* key) const {
        if (!run_.contains(key)) throw UsageError("run." + std::string(key) + " is required for '" + command_ + "'");
        return run_.at(key);
    }

    std::string string(const char* key) const {
        const json& j = need(key);
        if (!j.is_string()) throw UsageError("run." + std::string(key) + " must be a string");
        return j.get<std::string>();
    }

    double real(const char* key, std::optional<double> fallback = std::nullopt) const {
        if (!run_.contains(key)) {
            if (fallback) return *fallback;
            need(key);
        }
        const json& j = run_.at(key);
        if (!j.is_number()) throw UsageError("run." + std::string(key) + " must be a number");
        return j.get<double>();
    }

    std::size_t count(const char* key, std::optional<std::size_t> fallback = std::nullopt) const {
        if (!run_.contains(key)) {
            if (fallback) return *fallback;
            need(key);
        }
        const json& j = run_.at(key);
        if (!j.is_number_integer() || j.get<long long>() < 0)
            throw UsageError("run." + std::string(key) + " must be a non-negative integer");
        return j.get<std::size_t>();
    }

    std::uint64_t seed() const {
        if (opts_.seed) return *opts_.seed;
        if (!run_.contains("seed"))
            throw UsageError("'" + command_ + "' is stochastic and needs a seed (--seed or run.seed)");
        const json& j = run_.at("seed");
        if (!j.is_number_unsigned()) throw UsageError("run.seed must be a non-negative integer");
        return j.get<std::uint64_t>();
    }

    std::size_t steps(std::optional<std::size_t> fallback = std::nullopt) const {
        if (opts_.steps) return *opts_.steps;
        return count("steps", fallback);
    }

    double alpha() const {
        if (opts_.alpha) return *opts_.alpha;
        return real("alpha");
    }

    const KrausInstrument& instrument(const char* key = "instrument") const { return reg_.instrument(string(key)); }

    DensityMatrix state(const char* key = "state") const {
        if (has(key)) return reg_.state(string(key));
        if (has("model")) return reg_.model(string("model")).prior_state();
        need(key);
        throw UsageError("unreachable");
    }

    std::vector<KrausInstrument> sequence() const {
        std::vector<KrausInstrument> seq;
        if (has("sequence")) {
            const json& j = run_.at("sequence");
            if (!j.is_array() || j.empty()) throw UsageError("run.sequence must be a nonempty list of instrument names");
            for (const auto& name : j) {
                if (!name.is_string()) throw UsageError("run.sequence entries must be instrument names");
                seq.push_back(reg_.instrument(name.get<std::string>()));
            }
            return seq;
        }
        const KrausInstrument& inst = instrument();
        const std::size_t n = steps(1);
        if (n < 1) throw UsageError("steps must be >= 1");
        seq.assign(n, inst);
        return seq;
    }

    std::vector<std::string> labels(const char* key) const {
        const json& j = need(key);
        if (!j.is_array()) throw UsageError("run." + std::string(key) + " must be a list of labels");
        std::vector<std::string> out;
        for (const auto& x : j) {
            if (!x.is_string()) throw UsageError("run." + std::string(key) + " entries must be strings");
            out.push_back(x.get<std::string>());
        }
        return out;
    }

private:
    const json& run_;
    const Registry& reg_;
    const RunOptions& opts_;
    std::string command_;
};

std::vector<double> numbers(const json& j, const std::string& what) {
    if (!j.is_array()) throw UsageError(what + " must be a list of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw UsageError(what + " must be a list of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<std::size_t> indices(const json& j, const std::string& what) {
    if (!j.is_array()) throw UsageError(what + " must be a list of indices");
    std::vector<std::size_t> out;
    for (const auto& x : j) {
        if (!x.is_number_unsigned()) throw UsageError(what + " must be a list of non-negative integers");
        out.push_back(x.get<std::size_t>());
    }
    return out;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ------------------------------------------------------------ posterior family

struct Observed {
    DensityMatrix state;
    Trajectory steps;
    double probability = 1.0;
};

/// Applies the quantum Bayes rule along run.sequence for run.outcomes.
Observed observe(const Params& p, DensityMatrix start) {
    Observed obs{std::move(start), {}, 1.0};
    if (!p.has("outcomes")) return obs;
    const auto seq = p.sequence();
    const auto outcomes = p.labels("outcomes");
    if (outcomes.size() != seq.size())
        throw UsageError("run.outcomes needs one label per instrument in the sequence (" + std::to_string(seq.size()) +
                         ")");
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double prob = outcome_distribution(seq[i], obs.state, p.opts().tol).prob(outcomes[i]);
        obs.state = posterior_state(seq[i], obs.state, outcomes[i]);
        obs.probability *= prob;
        obs.steps.outcomes.push_back(outcomes[i]);
        obs.steps.indices.push_back(seq[i].space().index_of(outcomes[i]));
        obs.steps.probs.push_back(prob);
        obs.steps.logprob += std::log(prob);
        obs.steps.states.push_back(obs.state);
    }
    return obs;
}

struct ModelPosterior {
    PosteriorDist dist;
    double evidence;
};

ModelPosterior model_posterior(const Params& p) {
    const ParamModel& model = p.reg().model(p.string("model"));
    const Observed obs = observe(p, model.prior_state());
    return {posterior_parameter_distribution(model, obs.state), obs.probability};
}

std::string dist_csv(const PosteriorDist& d, const std::function<std::string(std::size_t)>& extra = {},
                     const std::string& extra_name = "") {
    std::string out = "theta,mass,cdf";
    if (extra) out += "," + extra_name;
    out += "\n";
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        out += format_double(d.grid[i]) + "," + format_double(d.mass[i]) + "," + format_double(d.cdf[i]);
        if (extra) out += "," + extra(i);
        out += "\n";
    }
    return out;
}

EstimatorSpec parse_estimator(const Params& p) {
    if (!p.has("estimator")) return WeightedMean{};
    const json& j = p.run().at("estimator");
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw UsageError("run.estimator must be an object with a string \"type\"");
    const std::string type = j.at("type").get<std::string>();
    if (type == "mean") {
        WeightedMean m;
        if (j.contains("c")) m.c = numbers(j.at("c"), "run.estimator.c");
        return m;
    }
    if (type == "quantile") {
        if (j.contains("k0") || j.contains("k1")) {
            if (!j.contains("k0") || !j.contains("k1")) throw UsageError("quantile from linear loss needs k0 and k1");
            return Quantile::from_linear_loss(j.at("k0").get<double>(), j.at("k1").get<double>());
        }
        return Quantile{j.value("p", 0.5)};
    }
    if (type == "mode") return Mode{};
    throw UsageError("unknown estimator type \"" + type + "\" (mean, quantile, mode)");
}

Output cmd_estimate(const Params& p) {
    const auto mp = model_posterior(p);
    const EstimatorSpec spec = parse_estimator(p);
    Output out;
    out.csv = dist_csv(mp.dist);
    const double value = point_estimate(mp.dist, spec);
    out.result["estimator"] = estimator_name(spec);
    out.result["value"] = value;
    out.result["auxiliary"] = {{"posterior_mass", mp.dist.mass}, {"evidence", mp.evidence}};
    out.headline = {{"estimator", estimator_name(spec)}, {"value", value}};
    return out;
}

Output cmd_credible(const Params& p) {
    const auto mp = model_posterior(p);
    const double alpha = p.alpha();
    const CredibleInterval ci = credible_interval(mp.dist, alpha);
    Output out;
    out.csv = dist_csv(
        mp.dist, [&](std::size_t i) { return mp.dist.grid[i] >= ci.lo && mp.dist.grid[i] <= ci.hi ? "1" : "0"; },
        "in_interval");
    out.result["estimator"] = "credible_interval";
    out.result["value"] = {ci.lo, ci.hi};
    out.result["auxiliary"] = {{"coverage", ci.coverage}, {"alpha", alpha}};
    out.headline = {{"lo", ci.lo}, {"hi", ci.hi}, {"coverage", ci.coverage}};
    return out;
}

Output cmd_hqpd(const Params& p) {
    const auto mp = model_posterior(p);
    const double alpha = p.alpha();
    const HqpdSet set = hqpd_set(mp.dist, alpha);
    Output out;
    out.csv = dist_csv(
        mp.dist,
        [&](std::size_t i) {
            return std::find(set.values.begin(), set.values.end(), mp.dist.grid[i]) != set.values.end() ? "1" : "0";
        },
        "in_set");
    out.result["estimator"] = "hqpd_set";
    out.result["value"] = set.values;
    out.result["auxiliary"] = {{"coverage", set.coverage}, {"alpha", alpha}};
    out.headline = {{"size", set.values.size()}, {"coverage", set.coverage}};
    return out;
}

Partition parse_partition(const json& j, const std::string& what) {
    if (!j.is_array()) throw UsageError(what + " must be a list of index lists");
    Partition cells;
    for (std::size_t i = 0; i < j.size(); ++i) cells.push_back(indices(j[i], what + "[" + std::to_string(i) + "]"));
    return cells;
}

Output cmd_test(const Params& p) {
    const auto mp = model_posterior(p);
    const Partition cells = parse_partition(p.need("partition"), "run.partition");
    const auto costs = numbers(p.need("costs"), "run.costs");
    const bool conventional = p.run().value("conventional", false);
    const std::size_t chosen = hypothesis_test(mp.dist, cells, costs, conventional);
    const auto masses = cell_masses(mp.dist, cells);
    Output out;
    out.csv = "cell,mass,cost,chosen\n";
    for (std::size_t i = 0; i < cells.size(); ++i)
        out.csv += std::to_string(i) + "," + format_double(masses[i]) + "," + format_double(costs[i]) + "," +
                   (i == chosen ? "1" : "0") + "\n";
    out.result["estimator"] = "hypothesis_test";
    out.result["value"] = chosen;
    out.result["auxiliary"] = {{"cell_mass", masses}, {"costs", costs}, {"conventional", conventional}};
    out.headline = {{"chosen_cell", chosen}};
    return out;
}

// ------------------------------------------------------------------- decision

LossSpec parse_loss(const Params& p) {
    const json& j = p.need("loss");
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw UsageError("run.loss must be an object with a string \"type\"");
    const std::string type = j.at("type").get<std::string>();
    if (type == "quadratic") {
        WeightedQuadraticLoss l;
        if (j.contains("c")) l.c = numbers(j.at("c"), "run.loss.c");
        return l;
    }
    if (type == "linear") return LinearLoss{j.value("k0", 1.0), j.value("k1", 1.0)};
    if (type == "zero_one") return ZeroOneLoss{j.value("eps", 1e-6)};
    if (type == "interval") return IntervalLoss{j.value("k0", 1.0), j.value("k1", 1.0)};
    if (type == "partition") {
        if (!j.contains("cells") || !j.contains("costs")) throw UsageError("partition loss needs cells and costs");
        return PartitionLoss{parse_partition(j.at("cells"), "run.loss.cells"), numbers(j.at("costs"), "run.loss.costs"),
                             j.value("conventional", false)};
    }
    throw UsageError("unknown loss type \"" + type + "\" (quadratic, linear, zero_one, interval, partition)");
}

std::vector<Action> parse_actions(const Params& p, const LossSpec& loss) {
    if (const auto* part = std::get_if<PartitionLoss>(&loss); part && !p.has("actions")) {
        std::vector<Action> cells;
        for (std::size_t i = 0; i < part->cells.size(); ++i) cells.emplace_back(CellAction{i});
        return cells;
    }
    const json& j = p.need("actions");
    if (!j.is_array() || j.empty()) throw UsageError("run.actions must be a nonempty list");
    std::vector<Action> out;
    for (const auto& a : j) {
        if (std::holds_alternative<PartitionLoss>(loss)) {
            if (!a.is_number_unsigned()) throw UsageError("partition actions are cell indices");
            out.emplace_back(CellAction{a.get<std::size_t>()});
        } else if (std::holds_alternative<IntervalLoss>(loss)) {
            if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
                throw UsageError("interval actions are [lo, hi] pairs");
            out.emplace_back(IntervalAction{a[0].get<double>(), a[1].get<double>()});
        } else {
            if (!a.is_number()) throw UsageError("point actions are numbers");
            out.emplace_back(a.get<double>());
        }
    }
    return out;
}

std::vector<DecisionRule> parse_rules(const Params& p, const std::vector<Action>& actions, std::size_t outcomes) {
    if (!p.has("rules") || (p.run().at("rules").is_string() && p.run().at("rules").get<std::string>() == "all"))
        return enumerate_rules(outcomes, actions);
    const json& j = p.run().at("rules");
    if (!j.is_array()) throw UsageError("run.rules must be \"all\" or a list of action-index lists");
    std::vector<DecisionRule> rules;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto idx = indices(j[r], "run.rules[" + std::to_string(r) + "]");
        if (idx.size() != outcomes)
            throw UsageError("run.rules[" + std::to_string(r) + "] needs one action index per composite outcome (" +
                             std::to_string(outcomes) + ")");
        DecisionRule rule;
        for (std::size_t i : idx) {
            if (i >= actions.size()) throw UsageError("run.rules refers to a missing action index");
            rule.actions.push_back(actions[i]);
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

json rule_json(const DecisionRule& r) {
    json out = json::array();
    for (const auto& a : r.actions) out.push_back(action_to_string(a));
    return out;
}

Output cmd_risk(const Params& p, std::optional<std::uint64_t>& seed_used) {
    const ParamModel& model = p.reg().model(p.string("model"));
    const auto seq = p.sequence();
    const LossSpec loss = parse_loss(p);
    validate_loss(loss, model.grid().size());
    const auto actions = parse_actions(p, loss);
    const std::size_t outcomes = composite_outcome_count(seq);
    const auto rules = parse_rules(p, actions, outcomes);

    RiskOptions ro;
    ro.threads = p.opts().threads;
    ro.samples = p.count("samples", 10000);
    const std::string method = p.has("risk_method") ? p.string("risk_method") : "auto";
    if (method == "exact") {
        ro.method = RiskOptions::Method::Exact;
    } else if (method == "monte_carlo") {
        ro.method = RiskOptions::Method::MonteCarlo;
    } else if (method != "auto") {
        throw UsageError("run.risk_method must be auto, exact or monte_carlo");
    }
    const bool stochastic = ro.method == RiskOptions::Method::MonteCarlo ||
                            (ro.method == RiskOptions::Method::Auto && outcomes > 10000);
    if (stochastic) {
        ro.seed = p.seed();
        seed_used = ro.seed;
    }

    const bool weighted = model.prior_weights().has_value();
    std::vector<std::vector<double>> table;
    std::vector<double> bayes;
    std::string method_name = "exact_enumeration";
    for (const auto& rule : rules) {
        std::vector<double> row;
        if (weighted) {
            const RiskReport rep = bayes_risk(model, seq, rule, loss, ro);
            row = rep.per_theta;
            bayes.push_back(rep.bayes);
            method_name = rep.method;
        } else {
            for (double theta : model.grid()) {
                const RiskValue v = risk(model, seq, rule, loss, theta, ro);
                row.push_back(v.value);
                if (!v.exact) method_name = "monte_carlo";
            }
        }
        table.push_back(std::move(row));
    }

    std::vector<double> sup;
    double best = 0.0;
    for (std::size_t r = 0; r < table.size(); ++r) {
        sup.push_back(*std::max_element(table[r].begin(), table[r].end()));
        if (r == 0 || sup.back() < best) best = sup.back();
    }
    const DominanceOptions dom;
    std::vector<std::size_t> minimax;
    json admissible = json::array();
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (sup[r] <= best + dom.slack) minimax.push_back(r);
        admissible.push_back(admissibility_from_table(table[r], table, dom).admissible);
    }

    Output out;
    out.csv = "rule_id,theta,risk\n";
    for (std::size_t r = 0; r < table.size(); ++r)
        for (std::size_t t = 0; t < model.grid().size(); ++t)
            out.csv += std::to_string(r) + "," + format_double(model.grid()[t]) + "," + format_double(table[r][t]) + "\n";
    json rules_j = json::array();
    for (const auto& r : rules) rules_j.push_back(rule_json(r));
    out.result["loss"] = loss_name(loss);
    out.result["method"] = method_name;
    out.result["outcome_labels"] = compose(std::span<const KrausInstrument>(seq)).space().labels();
    out.result["rules"] = std::move(rules_j);
    out.result["bayes_risk"] = weighted ? json(bayes) : json(nullptr);
    out.result["sup_risk"] = sup;
    out.result["minimax_set"] = minimax;
    out.result["admissible"] = std::move(admissible);
    out.headline = {{"rules", rules.size()}, {"minimax_sup_risk", best}};
    if (weighted) out.headline["min_bayes_risk"] = *std::min_element(bayes.begin(), bayes.end());
    return out;
}

Output cmd_bayes_solve(const Params& p) {
    const ParamModel& model = p.reg().model(p.string("model"));
    const auto seq = p.sequence();
    const LossSpec loss = parse_loss(p);
    validate_loss(loss, model.grid().size());
    const auto actions = parse_actions(p, loss);
    const std::string solver = p.has("solver") ? p.string("solver") : "bayes";
    DecisionRule rule;
    if (solver == "bayes") {
        rule = bayes_solution_enumerate(model, seq, loss, actions, p.opts().threads);
    } else if (solver == "posterior") {
        rule = posterior_solution_enumerate(model, seq, loss, actions);
    } else {
        throw UsageError("run.solver must be bayes or posterior");
    }
    const auto labels = compose(std::span<const KrausInstrument>(seq)).space().labels();
    Output out;
    out.csv = "outcome,action\n";
    for (std::size_t x = 0; x < labels.size(); ++x)
        out.csv += csv_field(labels[x]) + "," + csv_field(action_to_string(rule.actions[x])) + "\n";
    out.result["solver"] = solver;
    out.result["loss"] = loss_name(loss);
    out.result["outcome_labels"] = labels;
    out.result["rule"] = rule_json(rule);
    if (model.prior_weights() && model.states_by_theta()) {
        const RiskReport rep = bayes_risk(model, seq, rule, loss);
        out.result["bayes_risk"] = rep.bayes;
        out.result["risk_by_theta"] = rep.per_theta;
        out.headline["bayes_risk"] = rep.bayes;
    } else {
        out.result["bayes_risk"] = nullptr;
    }
    out.headline["outcomes"] = labels.size();
    return out;
}

// ---------------------------------------------------------------- simulation

Output cmd_simulate(const Params& p, std::optional<std::uint64_t>& seed_used) {
    const auto seq = p.sequence();
    const DensityMatrix rho = p.state();
    const std::uint64_t seed = p.seed();
    seed_used = seed;
    const Trajectory traj = sample_trajectory(seq, rho, seed);
    Output out;
    out.csv = trajectory_csv(traj);
    out.result["outcomes"] = traj.outcomes;
    out.result["logprob"] = traj.logprob;
    out.result["final_state"] = matrix_to_json(traj.states.back().matrix());
    out.headline = {{"steps", traj.outcomes.size()}, {"logprob", traj.logprob}};
    if (p.run().value("export_states", false)) {
        json states = json::array();
        for (const auto& s : traj.states) states.push_back(matrix_to_json(s.matrix()));
        out.extra.emplace_back("simulate.states.json", states.dump(2) + "\n");
    }
    return out;
}

Output cmd_posterior(const Params& p) {
    const Observed obs = observe(p, p.state());
    if (!p.has("outcomes")) throw UsageError("run.outcomes is required for 'posterior'");
    Output out;
    out.csv = trajectory_csv(obs.steps);
    out.result["outcomes"] = obs.steps.outcomes;
    out.result["probability"] = obs.probability;
    out.result["state"] = matrix_to_json(obs.state.matrix());
    out.result["purity"] = obs.state.purity();
    if (p.has("model")) {
        const auto dist = posterior_parameter_distribution(p.reg().model(p.string("model")), obs.state);
        out.result["parameter_distribution"] = {{"grid", dist.grid}, {"mass", dist.mass}};
    }
    out.headline = {{"probability", obs.probability}, {"purity", obs.state.purity()}};
    return out;
}

// ---------------------------------------------------------------- asymptotics

double spectral_rate(const SpectrumReport& rep) {
    if (rep.eigenvalues.size() < 2) return std::numeric_limits<double>::infinity();
    const double m = std::abs(rep.eigenvalues[1]);
    return m > 0.0 ? -std::log(m) : std::numeric_limits<double>::infinity();
}

Output cmd_spectrum(const Params& p) {
    const SpectrumReport rep = channel_spectrum(p.instrument());
    Output out;
    out.csv = "index,re,im,modulus\n";
    json eig = json::array();
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
        const Complex l = rep.eigenvalues[i];
        out.csv += std::to_string(i) + "," + format_double(l.real()) + "," + format_double(l.imag()) + "," +
                   format_double(std::abs(l)) + "\n";
        eig.push_back(complex_to_json(l));
    }
    out.result["eigenvalues"] = std::move(eig);
    out.result["gap"] = rep.gap;
    out.result["peripheral_count"] = rep.peripheral_count;
    out.result["fixed_point"] = rep.fixed_point ? matrix_to_json(rep.fixed_point->matrix()) : json(nullptr);
    out.result["fixed_point_residual"] = rep.fixed_point ? json(rep.fixed_point_residual) : json(nullptr);
    out.result["spectral_rate"] = nullable(spectral_rate(rep));
    out.headline = {{"gap", rep.gap}, {"peripheral_count", rep.peripheral_count},
                    {"spectral_rate", nullable(spectral_rate(rep))}};
    return out;
}

Output cmd_converge(const Params& p) {
    std::size_t lo = 1;
    std::size_t hi = 0;
    if (p.has("n_range")) {
        const auto r = indices(p.run().at("n_range"), "run.n_range");
        if (r.size() != 2) throw UsageError("run.n_range must be [lo, hi]");
        lo = r[0];
        hi = r[1];
        if (p.opts().steps) hi = *p.opts().steps;
    } else {
        hi = p.steps();
    }
    const ConvergenceFit fit = convergence_fit(p.instrument(), p.state(), lo, hi);
    Output out;
    out.csv = "n,distance\n";
    for (std::size_t i = 0; i < fit.ns.size(); ++i)
        out.csv += std::to_string(fit.ns[i]) + "," + format_double(fit.distances[i]) + "\n";
    const double ratio = fit.fit.rate / fit.predicted_rate;
    out.result["alpha_hat"] = fit.fit.rate;
    out.result["intercept"] = fit.fit.intercept;
    out.result["c_hat"] = std::exp(fit.fit.intercept);
    out.result["predicted_rate"] = nullable(fit.predicted_rate);
    out.result["ratio"] = nullable(ratio);
    out.result["points_used"] = fit.fit.used.size();
    out.result["fixed_point"] = matrix_to_json(fit.fixed_point.matrix());
    out.headline = {{"alpha_hat", fit.fit.rate}, {"predicted_rate", nullable(fit.predicted_rate)}};
    return out;
}

std::vector<int> parse_moments(const Params& p) {
    if (!p.has("moments")) return {2};
    const auto m = indices(p.run().at("moments"), "run.moments");
    std::vector<int> out;
    for (std::size_t x : m) {
        if (x < 1 || x > 64) throw UsageError("run.moments entries must lie in [1, 64]");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

Output cmd_chain(const Params& p, std::optional<std::uint64_t>& seed_used) {
    const KrausInstrument& inst = p.instrument();
    const DensityMatrix rho = p.state();
    const std::size_t n = p.steps();
    if (n < 1) throw UsageError("steps must be >= 1");
    const std::uint64_t seed = p.seed();
    seed_used = seed;
    const auto moments = parse_moments(p);
    const std::size_t window = p.count("window", 5);
    const std::size_t replicas = p.count("replicas", 1);
    if (replicas < 1) throw UsageError("run.replicas must be >= 1");
    const auto summaries = chain_replicas(inst, rho, n, seed, replicas, moments, window, p.opts().threads);

    Output out;
    out.csv = "replica,checkpoint,residual\n";
    json finals = json::array();
    json tails = json::object();
    for (std::size_t r = 0; r < summaries.size(); ++r) {
        const auto& s = summaries[r];
        for (std::size_t j = 0; j < s.checkpoints.size(); ++j)
            out.csv += std::to_string(r) + "," + std::to_string(s.checkpoints[j]) + "," + format_double(s.residuals[j]) +
                       "\n";
        finals.push_back(s.residuals.back());
        for (const auto& [m, t] : s.tails) tails[std::to_string(m)].push_back(t);
    }
    if (replicas == 1) {
        const ChainRun run = run_chain(inst, rho, n, seed, moments);
        json mom = json::object();
        for (const auto& [m, seq] : run.moments) mom[std::to_string(m)] = seq;
        out.result["checkpoints"] = run.checkpoints;
        out.result["moments"] = std::move(mom);
        out.result["outcome_counts"] = [&] {
            json counts = json::object();
            for (const auto& o : run.trajectory.outcomes) counts[o] = counts.value(o, 0) + 1;
            return counts;
        }();
    }
    out.result["replicas"] = replicas;
    out.result["steps"] = n;
    out.result["window"] = window;
    out.result["final_residuals"] = finals;
    out.result["moment_tails"] = tails;
    double worst = 0.0;
    for (const auto& f : finals) worst = std::max(worst, f.get<double>());
    out.headline = {{"steps", n}, {"replicas", replicas}, {"max_final_residual", worst}};
    return out;
}

Driving parse_driving(const Params& p) {
    const json& j = p.need("driving");
    if (j.is_object() && j.contains("iid")) return IidDriving{numbers(j.at("iid"), "run.driving.iid")};
    if (j.is_object() && j.contains("markov")) {
        const json& m = j.at("markov");
        if (!m.is_object() || !m.contains("transition") || !m.contains("initial"))
            throw UsageError("run.driving.markov needs transition and initial");
        MarkovDriving md;
        if (!m.at("transition").is_array()) throw UsageError("run.driving.markov.transition must be a matrix");
        for (const auto& row : m.at("transition")) md.transition.push_back(numbers(row, "run.driving.markov.transition"));
        md.initial = numbers(m.at("initial"), "run.driving.markov.initial");
        return md;
    }
    throw UsageError("run.driving must be {\"iid\": [...]} or {\"markov\": {...}}");
}

Output cmd_contraction(const Params& p, std::optional<std::uint64_t>& seed_used) {
    const json& names = p.need("channels");
    if (!names.is_array() || names.empty()) throw UsageError("run.channels must be a nonempty list of instrument names");
    std::vector<KrausInstrument> channels;
    for (const auto& n : names) {
        if (!n.is_string()) throw UsageError("run.channels entries must be instrument names");
        channels.push_back(p.reg().instrument(n.get<std::string>()));
    }
    const Driving driving = parse_driving(p);
    const DensityMatrix rho = p.state();
    const DensityMatrix sigma = p.state("sigma");
    const std::size_t n = p.steps();
    const std::uint64_t seed = p.seed();
    seed_used = seed;
    const auto res = random_sequence_contraction(channels, driving, rho, sigma, n, seed, p.count("max_window", 32));
    Output out;
    out.csv = "step,channel,distance\n";
    for (std::size_t k = 0; k < res.distances.size(); ++k)
        out.csv += std::to_string(k + 1) + "," + csv_field(names[res.sequence[k]].get<std::string>()) + "," +
                   format_double(res.distances[k]) + "\n";
    out.result["rate"] = res.fit ? json(res.fit->rate) : json(nullptr);
    out.result["intercept"] = res.fit ? json(res.fit->intercept) : json(nullptr);
    out.result["certified_window"] = res.certified_window;
    out.result["final_distance"] = res.distances.back();
    out.headline = {{"rate", out.result["rate"]}, {"certified_window", res.certified_window}};
    return out;
}

Output cmd_witness(const Params& p) {
    const KrausInstrument& inst = p.instrument();
    if (inst.size() != 1 || inst.kraus(0).size() != 1)
        fail(ErrorCode::InvalidArgument, "witness needs a single-outcome instrument with one (unitary) Kraus operator");
    const std::size_t n = p.steps();
    const double threshold = p.real("threshold", 0.1);
    const WitnessResult w = nonconvergence_witness(inst.kraus(0).front(), p.state(), n, threshold);
    Output out;
    out.csv = "step,distance\n";
    for (std::size_t k = 0; k < w.step_distances.size(); ++k)
        out.csv += std::to_string(k + 1) + "," + format_double(w.step_distances[k]) + "\n";
    out.result["witnessed"] = w.witnessed;
    out.result["min_step_distance"] = w.min_step_distance;
    out.result["threshold"] = threshold;
    out.result["steps"] = n;
    out.headline = {{"witnessed", w.witnessed}, {"min_step_distance", w.min_step_distance}};
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::InvalidArgument, "cannot write " + path.string());
    f << text;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate", "posterior", "estimate",    "credible",    "hqpd",
                                                "test",     "risk",      "bayes-solve", "spectrum",    "converge",
                                                "chain",    "contraction", "witness"};
    return names;
}

RunSummary run_command(const Config& cfg, const std::string& command, const RunOptions& opts) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw UsageError("unknown command '" + command + "'");
    if (opts.format != "csv" && opts.format != "json" && opts.format != "both")
        throw UsageError("--format must be csv, json or both");
    // Every object is validated before the command starts.
    const Registry reg = build_registry(cfg, opts.tol);
    const Params p(cfg, reg, opts, command);

    std::optional<std::uint64_t> seed;
    Output out;
    if (command == "simulate") out = cmd_simulate(p, seed);
    else if (command == "posterior") out = cmd_posterior(p);
    else if (command == "estimate") out = cmd_estimate(p);
    else if (command == "credible") out = cmd_credible(p);
    else if (command == "hqpd") out = cmd_hqpd(p);
    else if (command == "test") out = cmd_test(p);
    else if (command == "risk") out = cmd_risk(p, seed);
    else if (command == "bayes-solve") out = cmd_bayes_solve(p);
    else if (command == "spectrum") out = cmd_spectrum(p);
    else if (command == "converge") out = cmd_converge(p);
    else if (command == "chain") out = cmd_chain(p, seed);
    else if (command == "contraction") out = cmd_contraction(p, seed);
    else out = cmd_witness(p);

    out.result["command"] = command;
    out.result["seed"] = seed ? json(*seed) : json(nullptr);
    out.result["headline"] = out.headline;

    RunSummary summary{command, seed, {}};
    const fs::path dir(opts.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::InvalidArgument, "cannot create output directory " + dir.string());
    const auto emit = [&](const std::string& name, const std::string& text) {
        const fs::path path = dir / name;
        write_file(path, text);
        summary.outputs.push_back(path.string());
    };
    if (opts.format != "json") emit(command + ".csv", out.csv);
    if (opts.format != "csv") emit(command + ".result.json", out.result.dump(2) + "\n");
    for (const auto& [name, text] : out.extra) emit(name, text);
    return summary;
}

std::vector<std::string> write_report(const std::string& run_dir) {
    const fs::path dir(run_dir);
    if (!fs::is_directory(dir)) fail(ErrorCode::EmptyRunDir, run_dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > 12 && name.ends_with(".result.json")) files.push_back(e.path());
    }
    if (files.empty()) fail(ErrorCode::EmptyRunDir, run_dir + " holds no run artifacts (*.result.json)");
    std::sort(files.begin(), files.end());

    struct Row {
        std::string command;
        std::string seed;
        std::string summary;
        json headline;
    };
    std::vector<Row> rows;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            fail(ErrorCode::ParseError, f.string() + ": " + e.what());
        }
        Row row;
        row.command = doc.value("command", f.filename().string());
        row.seed = doc.contains("seed") && !doc.at("seed").is_null() ? doc.at("seed").dump() : "";
        row.headline = doc.value("headline", json::object());
        for (const auto& [k, v] : row.headline.items()) {
            if (!row.summary.empty()) row.summary += "; ";
            row.summary += k + "=" + (v.is_number_float() ? format_double(v.get<double>()) : v.dump());
        }
        rows.push_back(std::move(row));
    }

    std::string csv = "command,seed,summary\n";
    std::string md = "# Run report\n\n| command | seed | summary |\n|---|---|---|\n";
    std::optional<json> conv;
    std::optional<json> spec;
    for (const auto& r : rows) {
        csv += csv_field(r.command) + "," + r.seed + "," + csv_field(r.summary) + "\n";
        md += "| " + r.command + " | " + r.seed + " | " + r.summary + " |\n";
        if (r.command == "converge") conv = r.headline;
        if (r.command == "spectrum") spec = r.headline;
    }
    if (conv && spec && conv->contains("alpha_hat") && spec->contains("spectral_rate") &&
        (*spec)["spectral_rate"].is_number()) {
        const double a = (*conv)["alpha_hat"].get<double>();
        const double s = (*spec)["spectral_rate"].get<double>();
        md += "\n## Convergence against spectrum\n\n| alpha_hat | spectral_rate | ratio |\n|---|---|---|\n| " +
              format_double(a) + " | " + format_double(s) + " | " + format_double(a / s) + " |\n";
        csv += "\nalpha_hat,spectral_rate,ratio\n" + format_double(a) + "," + format_double(s) + "," +
               format_double(a / s) + "\n";
    }
    write_file(dir / "report.md", md);
    write_file(dir / "report.csv", csv);
    return {(dir / "report.md").string(), (dir / "report.csv").string()};
}

}  // namespace qbayes::cli
