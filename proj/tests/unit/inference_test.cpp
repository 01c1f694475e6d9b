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

#include <gtest/gtest.h>

#include "qbayes/inference.hpp"
#include "qbayes/posterior.hpp"
#include "test_support.hpp"

namespace qbayes {
namespace {

using testing::Gen;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

PosteriorDist dist_of(std::vector<double> mass) {
    std::vector<double> grid;
    for (std::size_t i = 0; i < mass.size(); ++i) grid.push_back(static_cast<double>(i + 1));
    return PosteriorDist::from_mass(grid, mass);
}

PosteriorDist random_dist(Gen& g) {
    const int m = g.integer(1, 12);
    std::vector<double> grid;
    std::vector<double> mass;
    double x = g.uniform(-2, 2);
    double s = 0;
    for (int i = 0; i < m; ++i) {
        x += g.uniform(0.05, 1.0);
        grid.push_back(x);
        mass.push_back(g.uniform() < 0.2 ? 0.0 : g.uniform());
        s += mass.back();
    }
    if (s == 0) mass[0] = s = 1;
    for (double& v : mass) v /= s;
    return PosteriorDist::from_mass(grid, mass);
}

TEST(ParamModel, TwoPointDiagonalPosterior) {
    const auto model = ParamModel::make({0.4, 0.8}, Povm::make(OutcomeSpace({"0.4", "0.8"}), Povm::computational(2).effects()),
                                        DensityMatrix::maximally_mixed(2));
    const auto inst = KrausInstrument::make(OutcomeSpace({"0", "1"}),
                                            {{testing::diag2(std::sqrt(0.6), std::sqrt(0.2))},
                                             {testing::diag2(std::sqrt(0.4), std::sqrt(0.8))}});
    const auto post = posterior_state(inst, model.prior_state(), 1);
    const auto dist = posterior_parameter_distribution(model, post);
    const std::vector<double> prior{0.5, 0.5};
    const auto oracle = classical_bayes_oracle(prior, {{0.6, 0.4}, {0.2, 0.8}}, 1);
    EXPECT_NEAR(dist.mass[0], oracle[0], 1e-12);
    EXPECT_NEAR(dist.mass[1], oracle[1], 1e-12);
    EXPECT_NEAR(point_estimate(dist, WeightedMean{}), 0.6666666666666666, 1e-10);
    EXPECT_EQ(point_estimate(dist, Quantile{0.5}), 0.8);

    const auto prior_dist = posterior_parameter_distribution(model, model.prior_state());
    EXPECT_NEAR(prior_dist.mass[0], 0.5, 1e-15);
    const auto point = posterior_parameter_distribution(model, DensityMatrix::basis(2, 1));
    EXPECT_EQ(point.mass[1], 1.0);
    EXPECT_EQ(model.param_observable().space().embedding()->at(1), 0.8);
}

TEST(ParamModel, Validation) {
    const Povm obs = Povm::computational(2);
    EXPECT_EQ(code_of([&] { ParamModel::make({0.8, 0.4}, obs, DensityMatrix::maximally_mixed(2)); }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { ParamModel::make({0.4, 0.8, 1.0}, obs, DensityMatrix::maximally_mixed(2)); }),
              ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] {
                  ParamModel::make({0.4, 0.8}, obs, DensityMatrix::maximally_mixed(2), std::nullopt,
                                   std::vector<double>{0.5, 0.6});
              }),
              ErrorCode::NotAPovm);
    const auto model = ParamModel::make({0.4, 0.8}, obs, DensityMatrix::maximally_mixed(2));
    EXPECT_EQ(model.theta_index(0.8), 1u);
    EXPECT_EQ(code_of([&] { model.theta_index(0.5); }), ErrorCode::UnknownTheta);
    EXPECT_EQ(code_of([&] { posterior_parameter_distribution(model, DensityMatrix::maximally_mixed(3)); }),
              ErrorCode::DimensionMismatch);
}

TEST(PointEstimate, Examples) {
    const auto d = PosteriorDist::from_mass({0.4, 0.8}, {1.0 / 3.0, 2.0 / 3.0});
    EXPECT_NEAR(point_estimate(d, WeightedMean{}), 0.6666666666666666, 1e-10);
    EXPECT_EQ(point_estimate(d, Quantile{0.5}), 0.8);
    EXPECT_EQ(point_estimate(d, Quantile{1.0 / 3.0}), 0.4);

    const auto point = dist_of({0, 0, 1, 0});
    EXPECT_EQ(point_estimate(point, WeightedMean{}), 3.0);
    EXPECT_EQ(point_estimate(point, Quantile{0.5}), 3.0);
    EXPECT_EQ(point_estimate(point, Mode{}), 3.0);

    EXPECT_EQ(point_estimate(dist_of({0.4, 0.2, 0.4}), Mode{}), 1.0);
    EXPECT_EQ(code_of([&] { point_estimate(point, WeightedMean{{1, 1, 0, 1}}); }), ErrorCode::DegenerateWeight);
    EXPECT_NEAR(Quantile::from_linear_loss(1, 3).p, 0.75, 1e-15);
}

TEST(PointEstimate, MeanMinimizesQuadraticRisk) {
    Gen g(1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_dist(g);
        std::vector<double> c;
        for (std::size_t i = 0; i < d.grid.size(); ++i) c.push_back(g.uniform(0.1, 2.0));
        const double est = point_estimate(d, WeightedMean{c});
        auto risk = [&](double y) {
            double r = 0;
            for (std::size_t i = 0; i < d.grid.size(); ++i) r += c[i] * d.mass[i] * (d.grid[i] - y) * (d.grid[i] - y);
            return r;
        };
        const double lo = d.grid.front();
        const double hi = d.grid.back();
        for (int k = 0; k <= 2000; ++k) {
            const double y = lo + (hi - lo) * k / 2000.0;
            EXPECT_GE(risk(y) - risk(est), -1e-9);
        }
    }
}

TEST(PointEstimate, QuantileMinimizesLinearRisk) {
    Gen g(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_dist(g);
        const double k0 = g.uniform(0.1, 3);
        const double k1 = g.uniform(0.1, 3);
        const double est = point_estimate(d, Quantile::from_linear_loss(k0, k1));
        auto risk = [&](double y) {
            double r = 0;
            for (std::size_t i = 0; i < d.grid.size(); ++i) {
                const double t = d.grid[i];
                r += d.mass[i] * (t >= y ? k1 * (t - y) : k0 * (y - t));
            }
            return r;
        };
        for (double y : d.grid) EXPECT_GE(risk(y) - risk(est), -1e-9);
    }
}

TEST(PointEstimate, ModeIsZeroOneLimit) {
    Gen g(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_dist(g);
        const double mode = point_estimate(d, Mode{});
        const std::size_t mi = static_cast<std::size_t>(std::find(d.grid.begin(), d.grid.end(), mode) - d.grid.begin());
        for (double m : d.mass) EXPECT_GE(d.mass[mi], m - 1e-12);
        // With spacing > 2 eps the zero-one posterior risk at grid point y
        // is 1 - mass(y); the mode attains the minimum.
        for (double eps : {1e-3, 1e-2}) {
            auto risk = [&](double y) {
                double r = 0;
                for (std::size_t i = 0; i < d.grid.size(); ++i)
                    if (std::abs(d.grid[i] - y) > eps) r += d.mass[i];
                return r;
            };
            for (double y : d.grid) EXPECT_GE(risk(y) - risk(mode), -1e-12);
        }
    }
}

TEST(CredibleInterval, Examples) {
    const auto point = dist_of({0, 1, 0});
    const auto ci = credible_interval(point, 0.3);
    EXPECT_EQ(ci.lo, 2.0);
    EXPECT_EQ(ci.hi, 2.0);

    const auto uni = dist_of(std::vector<double>(10, 0.1));
    const auto cu = credible_interval(uni, 0.05);
    EXPECT_EQ(cu.lo, 1.0);
    EXPECT_EQ(cu.hi, 10.0);

    // 0.8 on the middle point covers only 1 - 0.2, so alpha = 0.15 needs
    // two points and alpha = 0.2 accepts the middle alone.
    const auto tri = dist_of({0.1, 0.8, 0.1});
    const auto c15 = credible_interval(tri, 0.15);
    EXPECT_EQ(c15.lo, 1.0);
    EXPECT_EQ(c15.hi, 2.0);
    EXPECT_NEAR(c15.coverage, 0.9, 1e-15);
    const auto c20 = credible_interval(tri, 0.2);
    EXPECT_EQ(c20.lo, 2.0);
    EXPECT_EQ(c20.hi, 2.0);
    EXPECT_NEAR(c20.coverage, 0.8, 1e-15);
}

TEST(CredibleInterval, CoverageAndMinimality) {
    Gen g(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_dist(g);
        const double alpha = g.uniform(0.01, 0.5);
        const auto ci = credible_interval(d, alpha);
        EXPECT_GE(ci.coverage, 1 - alpha - 1e-12);
        for (std::size_t i = 0; i < d.grid.size(); ++i) {
            double cov = 0;
            for (std::size_t j = i; j < d.grid.size(); ++j) {
                cov += d.mass[j];
                if (cov >= 1 - alpha - 1e-12) {
                    EXPECT_GE(d.grid[j] - d.grid[i], ci.hi - ci.lo - 1e-12);
                    break;
                }
            }
        }
    }
}

TEST(Hqpd, Examples) {
    EXPECT_EQ(hqpd_set(dist_of({0, 0, 1}), 0.1).values, std::vector<double>{3.0});
    EXPECT_EQ(hqpd_set(dist_of({0.5, 0.3, 0.2}), 0.25).values, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(hqpd_set(dist_of({0.45, 0.05, 0.45, 0.05}), 0.2).values, (std::vector<double>{1.0, 3.0}));
}

TEST(Hqpd, ThresholdProperty) {
    Gen g(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_dist(g);
        const double alpha = g.uniform(0.01, 0.9);
        const auto h = hqpd_set(d, alpha);
        EXPECT_GE(h.coverage, 1 - alpha - 1e-12);
        double min_in = 2;
        double max_out = -1;
        for (std::size_t i = 0; i < d.grid.size(); ++i) {
            const bool in = std::find(h.values.begin(), h.values.end(), d.grid[i]) != h.values.end();
            (in ? min_in : max_out) = in ? std::min(min_in, d.mass[i]) : std::max(max_out, d.mass[i]);
        }
        EXPECT_GE(min_in, max_out);
    }
}

TEST(HypothesisTest, Examples) {
    const auto d = PosteriorDist::from_mass({0.4, 0.8}, {1.0 / 3.0, 2.0 / 3.0});
    const Partition cells{{0}, {1}};
    EXPECT_EQ(hypothesis_test(d, cells, {1, 1}), 0u);
    EXPECT_EQ(hypothesis_test(d, cells, {1, 1}, true), 1u);

    const auto z = dist_of({0.0, 1.0});
    EXPECT_EQ(hypothesis_test(z, cells, {0.1, 5.0}), 0u);
    EXPECT_EQ(hypothesis_test(dist_of({1.0, 0.0}), cells, {5.0, 0.1}), 1u);
    EXPECT_EQ(hypothesis_test(d, cells, {0, 0}), 0u);

    EXPECT_EQ(code_of([&] { hypothesis_test(d, {{0}, {0, 1}}, {1, 1}); }), ErrorCode::MalformedPartition);
    EXPECT_EQ(code_of([&] { hypothesis_test(d, {{0}}, {1}); }), ErrorCode::MalformedPartition);
    EXPECT_EQ(code_of([&] { hypothesis_test(d, cells, {1}); }), ErrorCode::MalformedPartition);
}

}  // namespace
}  // namespace qbayes
