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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qbayes/measure.hpp"

namespace qbayes {

/// Statistical model over a finite real parameter grid.
///
/// The parameter observable is a POVM on the grid labels whose outcome
/// space embeds each label at its grid value. Per-theta states and prior
/// weights are optional; the decision module needs both.
class ParamModel {
public:
    static ParamModel make(std::vector<double> grid, Povm param_observable, DensityMatrix prior_state,
                           std::optional<std::vector<DensityMatrix>> states_by_theta = std::nullopt,
                           std::optional<std::vector<double>> prior_weights = std::nullopt,
                           const Tolerances& tol = {});

    const std::vector<double>& grid() const noexcept { return grid_; }
    const Povm& param_observable() const noexcept { return observable_; }
    const DensityMatrix& prior_state() const noexcept { return prior_state_; }
    const std::optional<std::vector<DensityMatrix>>& states_by_theta() const noexcept { return states_; }
    const std::optional<std::vector<double>>& prior_weights() const noexcept { return weights_; }
    Index dim() const noexcept { return prior_state_.dim(); }

    /// Index of theta on the grid (exact match within 1e-12). Throws UnknownTheta.
    std::size_t theta_index(double theta) const;

private:
    ParamModel(std::vector<double> grid, Povm obs, DensityMatrix prior, std::optional<std::vector<DensityMatrix>> states,
               std::optional<std::vector<double>> weights)
        : grid_(std::move(grid)),
          observable_(std::move(obs)),
          prior_state_(std::move(prior)),
          states_(std::move(states)),
          weights_(std::move(weights)) {}

    std::vector<double> grid_;
    Povm observable_;
    DensityMatrix prior_state_;
    std::optional<std::vector<DensityMatrix>> states_;
    std::optional<std::vector<double>> weights_;
};

/// Grid labels as printed by the tools: shortest round-trip decimal.
std::vector<std::string> grid_labels(const std::vector<double>& grid);

struct PosteriorDist {
    std::vector<double> grid;
    std::vector<double> mass;
    std::vector<double> cdf;

    /// Validates and fills the cdf. Throws InvalidArgument on a malformed grid.
    static PosteriorDist from_mass(std::vector<double> grid, std::vector<double> mass);
};

/// mass(theta) = tr[state nu({theta})].
PosteriorDist posterior_parameter_distribution(const ParamModel& model, const DensityMatrix& state);

struct WeightedMean {
    std::vector<double> c;  ///< per-grid weights; empty means c = 1
};
struct Quantile {
    double p = 0.5;
    /// Quantile minimizing the linear loss with underestimation cost k1 and
    /// overestimation cost k0: p = k1 / (k0 + k1).
    static Quantile from_linear_loss(double k0, double k1);
};
struct Mode {};
using EstimatorSpec = std::variant<WeightedMean, Quantile, Mode>;

std::string estimator_name(const EstimatorSpec& spec);

/// Throws DegenerateWeight when sum c(theta) mass(theta) = 0.
double point_estimate(const PosteriorDist& dist, const EstimatorSpec& spec);

struct CredibleInterval {
    double lo;
    double hi;
    double coverage;
};

/// Shortest contiguous grid window with coverage >= 1 - alpha; ties go to
/// the smallest lower end.
CredibleInterval credible_interval(const PosteriorDist& dist, double alpha);

struct HqpdSet {
    std::vector<double> values;  ///< ascending
    double coverage;
};

/// Greedy highest-mass set; ties enter in ascending theta order.
HqpdSet hqpd_set(const PosteriorDist& dist, double alpha);

/// Partition cells as lists of grid indices.
using Partition = std::vector<std::vector<std::size_t>>;

/// Throws MalformedPartition unless the cells are disjoint, nonempty and
/// cover the grid.
void check_partition(const Partition& cells, std::size_t grid_size);

std::vector<double> cell_masses(const PosteriorDist& dist, const Partition& cells);

/// argmin_i k_i P(theta in cell i), ties to the smallest index. With
/// `conventional` the loss is k_i (1 - 1_{cell i}), i.e. argmin k_i (1 - P).
std::size_t hypothesis_test(const PosteriorDist& dist, const Partition& cells, const std::vector<double>& costs,
                            bool conventional = false);

}  // namespace qbayes
