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
#include <variant>
#include <vector>

#include "qbayes/inference.hpp"
#include "qbayes/instrument.hpp"

namespace qbayes {

/// c(theta) (theta - y)^2; empty c means c = 1.
struct WeightedQuadraticLoss {
    std::vector<double> c;
};
/// k1 (theta - y) when theta >= y, k0 (y - theta) when theta < y. The
/// Bayes action is the k1 / (k0 + k1) quantile.
struct LinearLoss {
    double k0 = 1.0;
    double k1 = 1.0;
};
/// 1 when |theta - y| > eps, else 0.
struct ZeroOneLoss {
    double eps = 1e-6;
};
/// k0 (hi - lo) + k1 [1 - 1_{[lo, hi]}(theta)].
struct IntervalLoss {
    double k0 = 1.0;
    double k1 = 1.0;
};
/// k_y 1_{cell y}(theta), or k_y (1 - 1_{cell y}(theta)) when conventional.
struct PartitionLoss {
    Partition cells;
    std::vector<double> costs;
    bool conventional = false;
};
using LossSpec = std::variant<WeightedQuadraticLoss, LinearLoss, ZeroOneLoss, IntervalLoss, PartitionLoss>;

std::string loss_name(const LossSpec& loss);
/// Throws InvalidArgument (or MalformedPartition) for bad parameters.
void validate_loss(const LossSpec& loss, std::size_t grid_size);

struct IntervalAction {
    double lo;
    double hi;
    friend bool operator==(const IntervalAction&, const IntervalAction&) = default;
};
struct CellAction {
    std::size_t index;
    friend bool operator==(const CellAction&, const CellAction&) = default;
};
using Action = std::variant<double, IntervalAction, CellAction>;

std::string action_to_string(const Action& a);

/// L(theta, action) for the grid point `theta_index`. Throws
/// IncompatibleAction when the action kind does not fit the loss.
double loss_value(const LossSpec& loss, const std::vector<double>& grid, std::size_t theta_index, const Action& a);

/// Nonrandomized rule: one action per composite outcome, indexed like the
/// outcome space of compose(insts).
struct DecisionRule {
    std::vector<Action> actions;
};

/// Number of composite outcomes, or OutcomeExplosion beyond 10^6.
std::size_t composite_outcome_count(std::span<const KrausInstrument> insts);

/// P(x) = tr[J_n(x_n) ... J_1(x_1) rho] for every composite outcome, by
/// depth-first enumeration with pruning of null branches.
std::vector<double> composite_outcome_probs(std::span<const KrausInstrument> insts, const DensityMatrix& rho);

struct RiskOptions {
    enum class Method { Auto, Exact, MonteCarlo };
    Method method = Method::Auto;
    std::size_t samples = 10000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

struct RiskValue {
    double value = 0.0;
    double stderr_value = 0.0;
    bool exact = true;
};

/// R(theta, rule). Exact enumeration when the composite space has at most
/// 10^4 outcomes (or when requested), otherwise Monte Carlo with the given
/// seed. Throws MissingThetaStates, UnknownTheta, InvalidArgument (Monte
/// Carlo without a seed).
RiskValue risk(const ParamModel& model, std::span<const KrausInstrument> insts, const DecisionRule& rule,
               const LossSpec& loss, double theta, const RiskOptions& opts = {});

struct RiskReport {
    std::vector<double> per_theta;
    std::vector<double> per_theta_stderr;
    double bayes = 0.0;
    double bayes_stderr = 0.0;
    std::string method;  ///< "exact_enumeration" or "monte_carlo"
    std::size_t samples = 0;
    std::optional<std::uint64_t> seed;
};

/// Throws MissingPriorWeights.
RiskReport bayes_risk(const ParamModel& model, std::span<const KrausInstrument> insts, const DecisionRule& rule,
                      const LossSpec& loss, const RiskOptions& opts = {});

/// sum_theta mass(theta) L(theta, action).
double posterior_risk(const PosteriorDist& dist, const LossSpec& loss, const Action& action);

/// Pointwise Bayes solution over a finite action set: for each composite
/// outcome choose the action minimizing sum_theta P(theta) p(x|theta)
/// L(theta, a); ties go to the earliest action. Throws BudgetExceeded when
/// outcomes x actions exceed 10^6.
DecisionRule bayes_solution_enumerate(const ParamModel& model, std::span<const KrausInstrument> insts,
                                      const LossSpec& loss, const std::vector<Action>& action_set,
                                      unsigned threads = 1);

/// Posterior solution under the quantum Bayes rule: for each composite
/// outcome with positive probability under the prior normal state, the
/// action minimizing the posterior risk of the parameter distribution of
/// the posterior state. Null outcomes get the first action.
DecisionRule posterior_solution_enumerate(const ParamModel& model, std::span<const KrausInstrument> insts,
                                          const LossSpec& loss, const std::vector<Action>& action_set);

/// Every rule mapping composite outcomes to the action set, in
/// lexicographic order (outcome 0 varies slowest). Throws BudgetExceeded
/// above 10^4 rules.
std::vector<DecisionRule> enumerate_rules(std::size_t outcome_count, const std::vector<Action>& action_set);

/// risk[r][t] = R(theta_t, rules[r]) by exact enumeration.
std::vector<std::vector<double>> risk_table(const ParamModel& model, std::span<const KrausInstrument> insts,
                                            const std::vector<DecisionRule>& rules, const LossSpec& loss,
                                            unsigned threads = 1);

struct DominanceOptions {
    double slack = 1e-12;
    double strict = 1e-9;
};

struct AdmissibilityVerdict {
    bool admissible = true;
    std::optional<std::size_t> dominating_rule;  ///< index into rule_class
};

/// Searches rule_class for a rule with risk <= rule's risk at every theta
/// (within slack) and strictly smaller (by more than strict) somewhere.
AdmissibilityVerdict admissibility_check(const ParamModel& model, std::span<const KrausInstrument> insts,
                                         const LossSpec& loss, const DecisionRule& rule,
                                         const std::vector<DecisionRule>& rule_class,
                                         const DominanceOptions& opts = {}, unsigned threads = 1);

/// Same search on precomputed risk rows.
AdmissibilityVerdict admissibility_from_table(const std::vector<double>& rule_risk,
                                              const std::vector<std::vector<double>>& table,
                                              const DominanceOptions& opts = {});

struct MinimaxResult {
    std::vector<std::size_t> minimax;  ///< indices into rule_class
    std::vector<double> sup_risk;
    std::vector<std::vector<double>> table;
};

MinimaxResult minimax_check(const ParamModel& model, std::span<const KrausInstrument> insts, const LossSpec& loss,
                            const std::vector<DecisionRule>& rule_class, const DominanceOptions& opts = {},
                            unsigned threads = 1);

}  // namespace qbayes
