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

#include "qbayes/decision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "qbayes/format.hpp"
#include "qbayes/parallel.hpp"
#include "qbayes/posterior.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

namespace {

constexpr std::size_t kExactLimit = 10'000;
constexpr std::size_t kSolveBudget = 1'000'000;
constexpr std::size_t kRuleBudget = 10'000;
constexpr double kTieTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void incompatible(const LossSpec& loss, const Action& a) {
    fail(ErrorCode::IncompatibleAction,
         "action " + action_to_string(a) + " does not fit the " + loss_name(loss) + " loss");
}

const std::vector<DensityMatrix>& theta_states(const ParamModel& model) {
    if (!model.states_by_theta()) fail(ErrorCode::MissingThetaStates, "model has no states_by_theta");
    return *model.states_by_theta();
}

void check_rule(const DecisionRule& rule, std::size_t outcomes) {
    if (rule.actions.size() != outcomes) {
        std::ostringstream os;
        os << "decision rule has " << rule.actions.size() << " actions but the composite space has " << outcomes
           << " outcomes";
        fail(ErrorCode::InvalidArgument, os.str());
    }
}

double expected_loss(const std::vector<double>& probs, const DecisionRule& rule, const LossSpec& loss,
                     const std::vector<double>& grid, std::size_t t) {
    double acc = 0.0;
    for (std::size_t x = 0; x < probs.size(); ++x)
        if (probs[x] > 0.0) acc += probs[x] * loss_value(loss, grid, t, rule.actions[x]);
    return acc;
}

std::size_t composite_index(std::span<const KrausInstrument> insts, const std::vector<std::size_t>& indices) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < insts.size(); ++i) idx = idx * insts[i].size() + indices[i];
    return idx;
}

}  // namespace

std::string loss_name(const LossSpec& loss) {
    return std::visit(overloaded{[](const WeightedQuadraticLoss&) { return std::string("weighted_quadratic"); },
                                 [](const LinearLoss&) { return std::string("linear"); },
                                 [](const ZeroOneLoss&) { return std::string("zero_one"); },
                                 [](const IntervalLoss&) { return std::string("interval"); },
                                 [](const PartitionLoss&) { return std::string("partition"); }},
                      loss);
}

void validate_loss(const LossSpec& loss, std::size_t grid_size) {
    std::visit(overloaded{[&](const WeightedQuadraticLoss& l) {
                              if (!l.c.empty() && l.c.size() != grid_size)
                                  fail(ErrorCode::InvalidArgument, "quadratic loss needs one weight per grid point");
                              for (double c : l.c)
                                  if (!(c >= 0.0)) fail(ErrorCode::InvalidArgument, "loss weights must be nonnegative");
                          },
                          [](const LinearLoss& l) {
                              if (!(l.k0 >= 0.0) || !(l.k1 >= 0.0))
                                  fail(ErrorCode::InvalidArgument, "linear loss costs must be nonnegative");
                          },
                          [](const ZeroOneLoss& l) {
                              if (!(l.eps > 0.0)) fail(ErrorCode::InvalidArgument, "zero_one loss needs eps > 0");
                          },
                          [](const IntervalLoss& l) {
                              if (!(l.k0 >= 0.0) || !(l.k1 >= 0.0))
                                  fail(ErrorCode::InvalidArgument, "interval loss costs must be nonnegative");
                          },
                          [&](const PartitionLoss& l) {
                              check_partition(l.cells, grid_size);
                              if (l.costs.size() != l.cells.size())
                                  fail(ErrorCode::MalformedPartition, "one cost per partition cell required");
                              for (double k : l.costs)
                                  if (!(k >= 0.0)) fail(ErrorCode::InvalidArgument, "partition costs must be nonnegative");
                          }},
               loss);
}

std::string action_to_string(const Action& a) {
    return std::visit(overloaded{[](double y) { return format_double(y); },
                                 [](const IntervalAction& i) {
                                     return "[" + format_double(i.lo) + "," + format_double(i.hi) + "]";
                                 },
                                 [](const CellAction& c) { return "cell" + std::to_string(c.index); }},
                      a);
}

double loss_value(const LossSpec& loss, const std::vector<double>& grid, std::size_t t, const Action& a) {
    const double theta = grid.at(t);
    return std::visit(
        overloaded{[&](const WeightedQuadraticLoss& l) {
                       const double* y = std::get_if<double>(&a);
                       if (!y) incompatible(loss, a);
                       const double c = l.c.empty() ? 1.0 : l.c.at(t);
                       return c * (theta - *y) * (theta - *y);
                   },
                   [&](const LinearLoss& l) {
                       const double* y = std::get_if<double>(&a);
                       if (!y) incompatible(loss, a);
                       return theta >= *y ? l.k1 * (theta - *y) : l.k0 * (*y - theta);
                   },
                   [&](const ZeroOneLoss& l) {
                       const double* y = std::get_if<double>(&a);
                       if (!y) incompatible(loss, a);
                       return std::abs(theta - *y) > l.eps ? 1.0 : 0.0;
                   },
                   [&](const IntervalLoss& l) {
                       const auto* iv = std::get_if<IntervalAction>(&a);
                       if (!iv || !(iv->hi >= iv->lo)) incompatible(loss, a);
                       const bool inside = theta >= iv->lo - kTieTol && theta <= iv->hi + kTieTol;
                       return l.k0 * (iv->hi - iv->lo) + l.k1 * (inside ? 0.0 : 1.0);
                   },
                   [&](const PartitionLoss& l) {
                       const auto* c = std::get_if<CellAction>(&a);
                       if (!c || c->index >= l.cells.size()) incompatible(loss, a);
                       const auto& cell = l.cells[c->index];
                       const bool in = std::find(cell.begin(), cell.end(), t) != cell.end();
                       const double ind = l.conventional ? (in ? 0.0 : 1.0) : (in ? 1.0 : 0.0);
                       return l.costs[c->index] * ind;
                   }},
        loss);
}

std::size_t composite_outcome_count(std::span<const KrausInstrument> insts) {
    if (insts.empty()) fail(ErrorCode::InvalidArgument, "empty instrument sequence");
    std::size_t n = 1;
    for (const auto& inst : insts) {
        if (n > 1'000'000 / inst.size()) fail(ErrorCode::OutcomeExplosion, "composite outcome space exceeds 10^6 outcomes");
        n *= inst.size();
    }
    return n;
}

std::vector<double> composite_outcome_probs(std::span<const KrausInstrument> insts, const DensityMatrix& rho) {
    const std::size_t total = composite_outcome_count(insts);
    if (insts.front().dim_in() != rho.dim())
        fail(ErrorCode::DimensionMismatch, "state dimension does not match the first instrument");
    for (std::size_t i = 1; i < insts.size(); ++i)
        if (insts[i - 1].dim_out() != insts[i].dim_in())
            fail(ErrorCode::DimensionChainMismatch, "instrument dimensions do not chain");
    std::vector<double> probs(total, 0.0);
    std::function<void(std::size_t, const CMatrix&, std::size_t)> walk = [&](std::size_t step, const CMatrix& state,
                                                                             std::size_t prefix) {
        const auto& inst = insts[step];
        for (std::size_t x = 0; x < inst.size(); ++x) {
            const CMatrix out = apply_outcome(inst, x, state);
            const double p = out.trace().real();
            const std::size_t idx = prefix * inst.size() + x;
            if (!(p > 0.0)) continue;
            if (step + 1 == insts.size()) {
                probs[idx] = p;
            } else {
                walk(step + 1, out, idx);
            }
        }
    };
    walk(0, rho.matrix(), 0);
    normalize_probabilities(probs);
    return probs;
}

RiskValue risk(const ParamModel& model, std::span<const KrausInstrument> insts, const DecisionRule& rule,
               const LossSpec& loss, double theta, const RiskOptions& opts) {
    const auto& states = theta_states(model);
    const std::size_t t = model.theta_index(theta);
    validate_loss(loss, model.grid().size());
    const std::size_t count = composite_outcome_count(insts);
    check_rule(rule, count);
    const bool exact = opts.method == RiskOptions::Method::Exact ||
                       (opts.method == RiskOptions::Method::Auto && count <= kExactLimit);
    if (exact) {
        const auto probs = composite_outcome_probs(insts, states[t]);
        return {expected_loss(probs, rule, loss, model.grid(), t), 0.0, true};
    }
    if (!opts.seed) fail(ErrorCode::InvalidArgument, "Monte Carlo risk requires a seed");
    if (opts.samples < 2) fail(ErrorCode::InvalidArgument, "Monte Carlo risk needs at least two samples");
    const CounterRng base(*opts.seed, t);
    std::vector<double> losses(opts.samples);
    parallel_for(opts.samples, opts.threads, [&](std::size_t r) {
        const auto traj = sample_trajectory(insts, states[t], *opts.seed, base.split(r).stream());
        losses[r] = loss_value(loss, model.grid(), t, rule.actions[composite_index(insts, traj.indices)]);
    });
    double mean = 0.0;
    for (double l : losses) mean += l;
    mean /= static_cast<double>(losses.size());
    double var = 0.0;
    for (double l : losses) var += (l - mean) * (l - mean);
    var /= static_cast<double>(losses.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(losses.size())), false};
}

RiskReport bayes_risk(const ParamModel& model, std::span<const KrausInstrument> insts, const DecisionRule& rule,
                      const LossSpec& loss, const RiskOptions& opts) {
    if (!model.prior_weights()) fail(ErrorCode::MissingPriorWeights, "bayes_risk requires prior_weights");
    theta_states(model);
    const auto& w = *model.prior_weights();
    const std::size_t m = model.grid().size();
    RiskReport rep;
    rep.per_theta.resize(m);
    rep.per_theta_stderr.resize(m);
    std::vector<RiskValue> values(m);
    RiskOptions inner = opts;
    inner.threads = 1;
    parallel_for(m, opts.threads, [&](std::size_t t) { values[t] = risk(model, insts, rule, loss, model.grid()[t], inner); });
    double var = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        rep.per_theta[t] = values[t].value;
        rep.per_theta_stderr[t] = values[t].stderr_value;
        rep.bayes += w[t] * values[t].value;
        var += w[t] * w[t] * values[t].stderr_value * values[t].stderr_value;
    }
    rep.bayes_stderr = std::sqrt(var);
    const bool exact = values.empty() || values.front().exact;
    rep.method = exact ? "exact_enumeration" : "monte_carlo";
    if (!exact) {
        rep.samples = opts.samples;
        rep.seed = opts.seed;
    }
    return rep;
}

double posterior_risk(const PosteriorDist& dist, const LossSpec& loss, const Action& action) {
    validate_loss(loss, dist.grid.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < dist.grid.size(); ++t) acc += dist.mass[t] * loss_value(loss, dist.grid, t, action);
    return acc;
}

DecisionRule bayes_solution_enumerate(const ParamModel& model, std::span<const KrausInstrument> insts,
                                      const LossSpec& loss, const std::vector<Action>& action_set, unsigned threads) {
    if (action_set.empty()) fail(ErrorCode::InvalidArgument, "action set is empty");
    if (!model.prior_weights()) fail(ErrorCode::MissingPriorWeights, "bayes_solution_enumerate requires prior_weights");
    const auto& states = theta_states(model);
    validate_loss(loss, model.grid().size());
    const std::size_t count = composite_outcome_count(insts);
    if (count > kSolveBudget / action_set.size())
        fail(ErrorCode::BudgetExceeded, "composite outcomes x actions exceed 10^6");
    const std::size_t m = model.grid().size();
    std::vector<std::vector<double>> probs(m);
    parallel_for(m, threads, [&](std::size_t t) { probs[t] = composite_outcome_probs(insts, states[t]); });
    std::vector<std::vector<double>> table(m, std::vector<double>(action_set.size()));
    for (std::size_t t = 0; t < m; ++t)
        for (std::size_t a = 0; a < action_set.size(); ++a) table[t][a] = loss_value(loss, model.grid(), t, action_set[a]);
    const auto& w = *model.prior_weights();
    DecisionRule rule;
    rule.actions.reserve(count);
    for (std::size_t x = 0; x < count; ++x) {
        std::size_t best = 0;
        double best_val = 0.0;
        for (std::size_t a = 0; a < action_set.size(); ++a) {
            double v = 0.0;
            for (std::size_t t = 0; t < m; ++t) v += w[t] * probs[t][x] * table[t][a];
            if (a == 0 || v < best_val - kTieTol) {
                best = a;
                best_val = v;
            }
        }
        rule.actions.push_back(action_set[best]);
    }
    return rule;
}

DecisionRule posterior_solution_enumerate(const ParamModel& model, std::span<const KrausInstrument> insts,
                                          const LossSpec& loss, const std::vector<Action>& action_set) {
    if (action_set.empty()) fail(ErrorCode::InvalidArgument, "action set is empty");
    validate_loss(loss, model.grid().size());
    const std::size_t count = composite_outcome_count(insts);
    if (count > kSolveBudget / action_set.size())
        fail(ErrorCode::BudgetExceeded, "composite outcomes x actions exceed 10^6");
    DecisionRule rule;
    rule.actions.reserve(count);
    std::function<void(std::size_t, const CMatrix&, std::size_t)> walk;
    std::vector<std::optional<DensityMatrix>> posts(count);
    walk = [&](std::size_t step, const CMatrix& state, std::size_t prefix) {
        const auto& inst = insts[step];
        for (std::size_t x = 0; x < inst.size(); ++x) {
            const CMatrix out = apply_outcome(inst, x, state);
            const double p = out.trace().real();
            const std::size_t idx = prefix * inst.size() + x;
            if (!(p > kProbFloor)) continue;
            if (step + 1 == insts.size()) {
                Tolerances tol;
                tol.psd = std::max(kPsdTol, 1e-13 / p);
                tol.herm = std::max(kHermTol, 1e-13 / p);
                posts[idx] = DensityMatrix::make(hermitize(out) / p, tol);
            } else {
                walk(step + 1, out, idx);
            }
        }
    };
    if (insts.front().dim_in() != model.dim())
        fail(ErrorCode::DimensionMismatch, "model dimension does not match the first instrument");
    walk(0, model.prior_state().matrix(), 0);
    for (std::size_t x = 0; x < count; ++x) {
        if (!posts[x] || posts[x]->dim() != model.dim()) {
            rule.actions.push_back(action_set.front());
            continue;
        }
        const PosteriorDist dist = posterior_parameter_distribution(model, *posts[x]);
        std::size_t best = 0;
        double best_val = 0.0;
        for (std::size_t a = 0; a < action_set.size(); ++a) {
            const double v = posterior_risk(dist, loss, action_set[a]);
            if (a == 0 || v < best_val - kTieTol) {
                best = a;
                best_val = v;
            }
        }
        rule.actions.push_back(action_set[best]);
    }
    return rule;
}

std::vector<DecisionRule> enumerate_rules(std::size_t outcome_count, const std::vector<Action>& action_set) {
    if (action_set.empty()) fail(ErrorCode::InvalidArgument, "action set is empty");
    std::size_t total = 1;
    for (std::size_t i = 0; i < outcome_count; ++i) {
        if (total > kRuleBudget / action_set.size()) fail(ErrorCode::BudgetExceeded, "rule class exceeds 10^4 rules");
        total *= action_set.size();
    }
    std::vector<DecisionRule> rules(total);
    for (std::size_t r = 0; r < total; ++r) {
        rules[r].actions.resize(outcome_count, action_set.front());
        std::size_t code = r;
        for (std::size_t x = outcome_count; x-- > 0;) {
            rules[r].actions[x] = action_set[code % action_set.size()];
            code /= action_set.size();
        }
    }
    return rules;
}

std::vector<std::vector<double>> risk_table(const ParamModel& model, std::span<const KrausInstrument> insts,
                                            const std::vector<DecisionRule>& rules, const LossSpec& loss,
                                            unsigned threads) {
    if (rules.size() > kRuleBudget) fail(ErrorCode::BudgetExceeded, "rule class exceeds 10^4 rules");
    const auto& states = theta_states(model);
    validate_loss(loss, model.grid().size());
    const std::size_t count = composite_outcome_count(insts);
    for (const auto& r : rules) check_rule(r, count);
    const std::size_t m = model.grid().size();
    std::vector<std::vector<double>> probs(m);
    parallel_for(m, threads, [&](std::size_t t) { probs[t] = composite_outcome_probs(insts, states[t]); });
    std::vector<std::vector<double>> table(rules.size(), std::vector<double>(m));
    parallel_for(rules.size(), threads, [&](std::size_t r) {
        for (std::size_t t = 0; t < m; ++t) table[r][t] = expected_loss(probs[t], rules[r], loss, model.grid(), t);
    });
    return table;
}

AdmissibilityVerdict admissibility_from_table(const std::vector<double>& rule_risk,
                                              const std::vector<std::vector<double>>& table,
                                              const DominanceOptions& opts) {
    for (std::size_t r = 0; r < table.size(); ++r) {
        bool weakly = true;
        bool strictly = false;
        for (std::size_t t = 0; t < rule_risk.size(); ++t) {
            if (table[r][t] > rule_risk[t] + opts.slack) {
                weakly = false;
                break;
            }
            if (table[r][t] < rule_risk[t] - opts.strict) strictly = true;
        }
        if (weakly && strictly) return {false, r};
    }
    return {};
}

AdmissibilityVerdict admissibility_check(const ParamModel& model, std::span<const KrausInstrument> insts,
                                         const LossSpec& loss, const DecisionRule& rule,
                                         const std::vector<DecisionRule>& rule_class, const DominanceOptions& opts,
                                         unsigned threads) {
    if (rule_class.size() > kRuleBudget) fail(ErrorCode::BudgetExceeded, "rule class exceeds 10^4 rules");
    const auto own = risk_table(model, insts, {rule}, loss, threads);
    const auto table = risk_table(model, insts, rule_class, loss, threads);
    return admissibility_from_table(own.front(), table, opts);
}

MinimaxResult minimax_check(const ParamModel& model, std::span<const KrausInstrument> insts, const LossSpec& loss,
                            const std::vector<DecisionRule>& rule_class, const DominanceOptions& opts,
                            unsigned threads) {
    if (rule_class.empty()) fail(ErrorCode::InvalidArgument, "rule class is empty");
    MinimaxResult res;
    res.table = risk_table(model, insts, rule_class, loss, threads);
    double best = 0.0;
    for (std::size_t r = 0; r < res.table.size(); ++r) {
        const double s = *std::max_element(res.table[r].begin(), res.table[r].end());
        res.sup_risk.push_back(s);
        if (r == 0 || s < best) best = s;
    }
    for (std::size_t r = 0; r < res.sup_risk.size(); ++r)
        if (res.sup_risk[r] <= best + opts.slack) res.minimax.push_back(r);
    return res;
}

}  // namespace qbayes
