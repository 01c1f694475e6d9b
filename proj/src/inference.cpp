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

#include "qbayes/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qbayes/format.hpp"

namespace qbayes {

namespace {

constexpr double kTieTol = 1e-12;

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) fail(ErrorCode::InvalidArgument, "parameter grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) fail(ErrorCode::InvalidArgument, "parameter grid has non-finite values");
        if (i > 0 && !(grid[i] > grid[i - 1])) fail(ErrorCode::InvalidArgument, "parameter grid must be strictly increasing");
    }
}

}  // namespace

std::vector<std::string> grid_labels(const std::vector<double>& grid) {
    std::vector<std::string> out;
    out.reserve(grid.size());
    for (double v : grid) out.push_back(format_double(v));
    return out;
}

ParamModel ParamModel::make(std::vector<double> grid, Povm param_observable, DensityMatrix prior_state,
                            std::optional<std::vector<DensityMatrix>> states_by_theta,
                            std::optional<std::vector<double>> prior_weights, const Tolerances& tol) {
    check_grid(grid);
    if (param_observable.size() != grid.size())
        fail(ErrorCode::DimensionMismatch, "parameter observable needs one effect per grid point");
    if (const auto& emb = param_observable.space().embedding()) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::abs((*emb)[i] - grid[i]) > kTieTol)
                fail(ErrorCode::InvalidArgument, "parameter observable embedding disagrees with the grid");
    }
    Povm obs = Povm::make(param_observable.space().with_embedding(grid), param_observable.effects(), tol);
    if (obs.dim() != prior_state.dim())
        fail(ErrorCode::DimensionMismatch, "parameter observable and prior state dimensions differ");
    if (states_by_theta) {
        if (states_by_theta->size() != grid.size())
            fail(ErrorCode::MissingThetaStates, "states_by_theta needs one state per grid point");
        for (const auto& s : *states_by_theta)
            if (s.dim() != prior_state.dim())
                fail(ErrorCode::DimensionMismatch, "states_by_theta dimension differs from the prior state");
    }
    if (prior_weights) {
        if (prior_weights->size() != grid.size())
            fail(ErrorCode::InvalidArgument, "prior_weights needs one weight per grid point");
        normalize_probabilities(*prior_weights, tol.norm);
    }
    return ParamModel(std::move(grid), std::move(obs), std::move(prior_state), std::move(states_by_theta),
                      std::move(prior_weights));
}

std::size_t ParamModel::theta_index(double theta) const {
    for (std::size_t i = 0; i < grid_.size(); ++i)
        if (std::abs(grid_[i] - theta) <= kTieTol) return i;
    fail(ErrorCode::UnknownTheta, "theta " + format_double(theta) + " is not on the parameter grid");
}

PosteriorDist PosteriorDist::from_mass(std::vector<double> grid, std::vector<double> mass) {
    check_grid(grid);
    if (mass.size() != grid.size()) fail(ErrorCode::InvalidArgument, "mass and grid lengths differ");
    normalize_probabilities(mass);
    std::vector<double> cdf(mass.size());
    std::partial_sum(mass.begin(), mass.end(), cdf.begin());
    cdf.back() = 1.0;
    for (std::size_t i = 0; i + 1 < cdf.size(); ++i) cdf[i] = std::min(cdf[i], 1.0);
    return {std::move(grid), std::move(mass), std::move(cdf)};
}

PosteriorDist posterior_parameter_distribution(const ParamModel& model, const DensityMatrix& state) {
    if (state.dim() != model.dim()) fail(ErrorCode::DimensionMismatch, "state dimension differs from the model");
    const auto dist = induced_measure(model.param_observable(), state);
    return PosteriorDist::from_mass(model.grid(), dist.probs);
}

Quantile Quantile::from_linear_loss(double k0, double k1) {
    if (!(k0 >= 0.0) || !(k1 >= 0.0) || !(k0 + k1 > 0.0))
        fail(ErrorCode::InvalidArgument, "linear loss costs must be nonnegative and not both zero");
    return {k1 / (k0 + k1)};
}

std::string estimator_name(const EstimatorSpec& spec) {
    if (std::holds_alternative<WeightedMean>(spec)) return "weighted_mean";
    if (std::holds_alternative<Quantile>(spec)) return "quantile";
    return "mode";
}

double point_estimate(const PosteriorDist& dist, const EstimatorSpec& spec) {
    const std::size_t m = dist.grid.size();
    if (const auto* wm = std::get_if<WeightedMean>(&spec)) {
        if (!wm->c.empty() && wm->c.size() != m)
            fail(ErrorCode::InvalidArgument, "weighted_mean needs one weight per grid point");
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double c = wm->c.empty() ? 1.0 : wm->c[i];
            if (!(c >= 0.0)) fail(ErrorCode::InvalidArgument, "weighted_mean weights must be nonnegative");
            num += dist.grid[i] * c * dist.mass[i];
            den += c * dist.mass[i];
        }
        if (!(den > 0.0)) fail(ErrorCode::DegenerateWeight, "sum of c(theta) p(theta|x) is zero");
        return num / den;
    }
    if (const auto* q = std::get_if<Quantile>(&spec)) {
        if (!(q->p > 0.0 && q->p < 1.0)) fail(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
        for (std::size_t i = 0; i < m; ++i)
            if (dist.cdf[i] >= q->p - kTieTol) return dist.grid[i];
        return dist.grid.back();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (dist.mass[i] > dist.mass[best] + kTieTol) best = i;
    return dist.grid[best];
}

CredibleInterval credible_interval(const PosteriorDist& dist, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    const std::size_t m = dist.grid.size();
    const double target = 1.0 - alpha - kTieTol;
    CredibleInterval best{dist.grid.front(), dist.grid.back(), 1.0};
    double best_width = dist.grid.back() - dist.grid.front();
    bool found = false;
    for (std::size_t i = 0; i < m; ++i) {
        double cov = 0.0;
        for (std::size_t j = i; j < m; ++j) {
            cov += dist.mass[j];
            if (cov >= target) {
                const double width = dist.grid[j] - dist.grid[i];
                if (!found || width < best_width - kTieTol) {
                    best = {dist.grid[i], dist.grid[j], cov};
                    best_width = width;
                    found = true;
                }
                break;
            }
        }
    }
    return best;
}

HqpdSet hqpd_set(const PosteriorDist& dist, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    std::vector<std::size_t> order(dist.grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist.mass[a] > dist.mass[b]; });
    const double target = 1.0 - alpha - kTieTol;
    std::vector<std::size_t> chosen;
    double cov = 0.0;
    for (std::size_t i : order) {
        chosen.push_back(i);
        cov += dist.mass[i];
        if (cov >= target) break;
    }
    double min_in = 1.0;
    for (std::size_t i : chosen) min_in = std::min(min_in, dist.mass[i]);
    for (std::size_t i = 0; i < dist.grid.size(); ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end() && dist.mass[i] > min_in)
            fail(ErrorCode::InvalidArgument, "hqpd_set: excluded point outweighs an included one");
    }
    std::sort(chosen.begin(), chosen.end());
    HqpdSet out{{}, cov};
    for (std::size_t i : chosen) out.values.push_back(dist.grid[i]);
    return out;
}

void check_partition(const Partition& cells, std::size_t grid_size) {
    if (cells.empty()) fail(ErrorCode::MalformedPartition, "partition has no cells");
    std::vector<int> seen(grid_size, 0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].empty()) fail(ErrorCode::MalformedPartition, "partition cell " + std::to_string(c) + " is empty");
        for (std::size_t i : cells[c]) {
            if (i >= grid_size) fail(ErrorCode::MalformedPartition, "partition refers to a point outside the grid");
            if (seen[i]++) fail(ErrorCode::MalformedPartition, "partition cells overlap");
        }
    }
    for (std::size_t i = 0; i < grid_size; ++i)
        if (!seen[i]) fail(ErrorCode::MalformedPartition, "partition does not cover grid point " + std::to_string(i));
}

std::vector<double> cell_masses(const PosteriorDist& dist, const Partition& cells) {
    check_partition(cells, dist.grid.size());
    std::vector<double> out;
    for (const auto& cell : cells) {
        double s = 0.0;
        for (std::size_t i : cell) s += dist.mass[i];
        out.push_back(s);
    }
    return out;
}

std::size_t hypothesis_test(const PosteriorDist& dist, const Partition& cells, const std::vector<double>& costs,
                            bool conventional) {
    const std::vector<double> mass = cell_masses(dist, cells);
    if (costs.size() != cells.size()) fail(ErrorCode::MalformedPartition, "one cost per partition cell required");
    std::size_t best = 0;
    double best_val = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!(costs[i] >= 0.0)) fail(ErrorCode::InvalidArgument, "test costs must be nonnegative");
        const double v = costs[i] * (conventional ? 1.0 - mass[i] : mass[i]);
        if (i == 0 || v < best_val - kTieTol) {
            best = i;
            best_val = v;
        }
    }
    return best;
}

}  // namespace qbayes
